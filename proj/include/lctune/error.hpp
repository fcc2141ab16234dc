#pragma once

#include <stdexcept>
#include <string>

namespace lctune {

// Invalid argument supplied by the caller (bad director, non-positive s_ref, ...).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Argument is well formed but outside the domain of the formula.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

// Backtracking drove the step below its floor without an accepted step.
class StagnationError : public SolverError {
public:
    using SolverError::SolverError;
};

// Iteration budget exhausted. Carries the voltage when raised from a sweep.
class NonConvergenceError : public SolverError {
public:
    NonConvergenceError(const std::string& what, double residual, double voltage = 0.0)
        : SolverError(what, residual), voltage_(voltage) {}

    double voltage() const noexcept { return voltage_; }

private:
    double voltage_;
};

class OpticsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CalibrationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace lctune
