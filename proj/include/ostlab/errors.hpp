#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace ostlab {

// Invalid argument or violated precondition (xi = 0 for a derivative, eta <= 0, ...).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// The grid cannot represent the requested object (Nyquist criterion, size mismatch).
class ResolutionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Iterative procedure failed: quadrature budget, Picard non-contraction, blow-up.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A hypothesis required by an analysis routine does not hold for the data.
class HypothesisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

}  // namespace ostlab
