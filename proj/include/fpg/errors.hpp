#pragma once

#include <stdexcept>
#include <string>

namespace fpg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Gamma-type function evaluated at a pole.
class PoleError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Result not representable in double precision.
class OverflowError : public Error {
public:
    using Error::Error;
};

/// Series or iteration failed to reach its tolerance.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// A callback returned a non-finite value.
class EvaluationError : public Error {
public:
    using Error::Error;
};

/// Inconsistent matrix or tensor dimensions.
class ShapeError : public Error {
public:
    using Error::Error;
};

class SingularMatrixError : public Error {
public:
    SingularMatrixError(const std::string& what, double condition_estimate)
        : Error(what), condition_estimate_(condition_estimate) {}

    double condition_estimate() const noexcept { return condition_estimate_; }

private:
    double condition_estimate_;
};

/// Invalid problem or configuration input. `field` holds the offending key.
class ValidationError : public Error {
public:
    ValidationError(std::string field, const std::string& what)
        : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace fpg
