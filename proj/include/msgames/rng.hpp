#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace msgames {

// Seeded random stream keyed by (seed, path id, chain of purpose ids).
//
// The engine is std::mt19937_64 seeded through std::seed_seq with the full
// key, so two streams with the same key produce bitwise identical draws and
// streams with different keys share no state. A stream has a single owner;
// concurrent consumers fork their own child streams.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t path_id, std::uint64_t purpose_id);

    // Child stream whose key is this stream's key extended by `purpose_id`.
    // The parent's state and counter are left untouched.
    [[nodiscard]] RngStream fork(std::uint64_t purpose_id) const;

    // Uniform double in [0, 1) with 53 random bits.
    double uniform01();

    // Uniform integer in [0, n). Requires n > 0.
    std::uint64_t uniform_index(std::uint64_t n);

    std::uint64_t next_u64();

    [[nodiscard]] std::uint64_t seed() const { return seed_; }
    [[nodiscard]] std::uint64_t path_id() const { return path_id_; }
    [[nodiscard]] const std::vector<std::uint64_t>& purposes() const { return purposes_; }
    [[nodiscard]] std::uint64_t counter() const { return counter_; }

private:
    RngStream(std::uint64_t seed, std::uint64_t path_id, std::vector<std::uint64_t> purposes);
    void reseed();

    std::uint64_t seed_;
    std::uint64_t path_id_;
    std::vector<std::uint64_t> purposes_;
    std::uint64_t counter_ = 0;
    std::mt19937_64 engine_;
};

// Well-known purpose ids so independent consumers never collide.
namespace purpose {
inline constexpr std::uint64_t kOracle = 1;
inline constexpr std::uint64_t kSelection = 2;
inline constexpr std::uint64_t kOutputIndex = 3;
inline constexpr std::uint64_t kDiagnostics = 4;
inline constexpr std::uint64_t kSelfTest = 5;
}  // namespace purpose

}  // namespace msgames
