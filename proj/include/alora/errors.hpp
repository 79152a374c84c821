#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace alora {

// Bad or inconsistent run configuration (unknown key, malformed value, ...).
// Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string message, int line = -1, std::string key = "")
        : std::runtime_error(std::move(message)), line_(line), key_(std::move(key)) {}

    int line() const { return line_; }
    const std::string& key() const { return key_; }

private:
    int line_;
    std::string key_;
};

// Iterative numerical routine failed to converge. Carries the residual
// (e.g. worst relative off-diagonal coupling for the Jacobi SVD).
class NumericalError : public std::runtime_error {
public:
    NumericalError(std::string message, double residual)
        : std::runtime_error(std::move(message)), residual_(residual) {}

    double residual() const { return residual_; }

private:
    double residual_;
};

// Training produced a non-finite loss or gradient. Carries the offending
// step. Maps to CLI exit code 3.
class DivergedError : public std::runtime_error {
public:
    DivergedError(std::string message, std::int64_t step)
        : std::runtime_error(std::move(message)), step_(step) {}

    std::int64_t step() const { return step_; }

private:
    std::int64_t step_;
};

// A guaranteed internal invariant was observed to fail; indicates an
// implementation bug, not bad input. Maps to CLI exit code 4.
class InvariantBreachError : public std::runtime_error {
public:
    explicit InvariantBreachError(std::string message)
        : std::runtime_error(std::move(message)) {}
};

} // namespace alora
