#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace msgames {

struct SuiteResult {
    std::string name;
    int passed = 0;
    int failed = 0;
    std::vector<std::string> failures;  // first few failure messages
    double seconds = 0.0;
};

// Runs every invariant suite; deterministic for a fixed seed.
std::vector<SuiteResult> run_selftest(std::uint64_t seed);

}  // namespace msgames
