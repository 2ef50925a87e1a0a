#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fracpersist {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
/// Path storage: one path per row, contiguous in time.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

/*
 * Error hierarchy. The CLI maps ValidationError to exit code 2 and
 * NumericalError to exit code 3.
 */

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad input: a precondition of an operation does not hold.
class ValidationError : public Error {
public:
    using Error::Error;
};

class DomainError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Closed-form g_H requested inside the degenerate band around H = 1/2.
class DegenerateHurst : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class OffGridHorizon : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// A numerical procedure failed to deliver its contract.
class NumericalError : public Error {
public:
    using Error::Error;
};

class QuadratureFailure : public NumericalError {
public:
    QuadratureFailure(const std::string& what, double estimate, double error)
        : NumericalError(what), estimate_(estimate), error_(error) {}
    double estimate() const noexcept { return estimate_; }
    double achieved_error() const noexcept { return error_; }

private:
    double estimate_;
    double error_;
};

class NotPositiveDefinite : public NumericalError {
public:
    NotPositiveDefinite(const std::string& what, double smallest_pivot)
        : NumericalError(what), pivot_(smallest_pivot) {}
    double smallest_pivot() const noexcept { return pivot_; }

private:
    double pivot_;
};

class EmbeddingNotNonnegative : public NumericalError {
public:
    EmbeddingNotNonnegative(const std::string& what, double min_eigenvalue)
        : NumericalError(what), min_eigenvalue_(min_eigenvalue) {}
    double min_eigenvalue() const noexcept { return min_eigenvalue_; }

private:
    double min_eigenvalue_;
};

class TailBudgetExceeded : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class InsufficientSurvivors : public NumericalError {
public:
    using NumericalError::NumericalError;
};

namespace constants {
inline constexpr double pi = 3.141592653589793238462643383279502884;
inline constexpr double euler_gamma = 0.577215664901532860606512090082402431;
inline constexpr double ln2 = 0.693147180559945309417232121458176568;
/// int_0^inf log(1 + 1/u)^2 du
inline constexpr double log_kernel_norm = pi * pi / 3.0;
}  // namespace constants

}  // namespace fracpersist
