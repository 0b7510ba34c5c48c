#pragma once

#include <stdexcept>
#include <string>

namespace msgames {

// Malformed or out-of-range user configuration (CLI exit code 1).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A structural assumption of a scheme does not hold for the given game and
// parameters (CLI exit code 2).
class AssumptionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An iterative procedure did not reach its tolerance within its budget.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace msgames
