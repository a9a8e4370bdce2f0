#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fnrd {

/// Invalid user input: bad levels, unknown datum, inconsistent study setup.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operands live on incompatible meshes or have mismatched sizes.
class MeshMismatchError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

/// Base for failures of the numerics themselves (CLI exit code 2).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ProjectionError : public NumericalError {
public:
    ProjectionError(const std::string& what, std::ptrdiff_t element)
        : NumericalError(what + " (element " + std::to_string(element) + ")"), element_(element) {}

    [[nodiscard]] std::ptrdiff_t element() const noexcept { return element_; }

private:
    std::ptrdiff_t element_;
};

/// A datum was evaluated exactly at its singular point.
class SingularEvaluationError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Non-finite values appeared in the state or an intermediate stage.
class BlowUpError : public NumericalError {
public:
    explicit BlowUpError(const std::string& what, long step = -1)
        : NumericalError(step < 0 ? what : what + " at step " + std::to_string(step)), step_(step) {}

    [[nodiscard]] long step() const noexcept { return step_; }

private:
    long step_;
};

class DecompositionError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace fnrd
