#pragma once

#include <stdexcept>
#include <string>

namespace hdp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or out-of-domain input (non-finite values, bad dimensions, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// A delimited input file does not match the expected layout.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// A file could not be opened or written.
class IoError : public Error {
public:
    using Error::Error;
};

/// Base for failures of the numerics themselves (as opposed to bad input).
class NumericError : public Error {
public:
    using Error::Error;
};

class DegenerateCovarianceError : public NumericError {
public:
    using NumericError::NumericError;
};

/// The estimated squared Sharpe ratio is not positive, so the normalized
/// pseudoinverse portfolio is undefined.
class NonPositiveThetaError : public NumericError {
public:
    NonPositiveThetaError(const std::string& what, double theta_hat)
        : NumericError(what), theta_hat_(theta_hat) {}
    double theta_hat() const noexcept { return theta_hat_; }

private:
    double theta_hat_;
};

/// N/T (or its limit) is too close to 1 for the closed-form expressions.
class UnsupportedAspectRatioError : public NumericError {
public:
    using NumericError::NumericError;
};

class ZeroSignalError : public NumericError {
public:
    using NumericError::NumericError;
};

class SolverError : public NumericError {
public:
    using NumericError::NumericError;
};

} // namespace hdp
