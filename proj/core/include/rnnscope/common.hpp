#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace rnnscope {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

/// Base class for all errors raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Dimension/shape mismatch between operands.
struct ShapeError : Error {
    using Error::Error;
};

/// Invalid or unparseable configuration.
struct ConfigError : Error {
    using Error::Error;
};

/// Unreadable, malformed, or insufficient data.
struct DataError : Error {
    using Error::Error;
};

struct InsufficientDataError : DataError {
    using DataError::DataError;
};

/// Numerical failure (ill-conditioned system, divergence).
struct NumericsError : Error {
    explicit NumericsError(const std::string& msg, double condition_estimate = 0.0)
        : Error(msg), condition_estimate(condition_estimate) {}
    double condition_estimate;
};

inline bool all_finite(const Matrix& m) { return m.allFinite(); }
inline bool all_finite(const Vector& v) { return v.allFinite(); }

inline void require_finite(const Matrix& m, const char* what) {
    if (!m.allFinite()) throw NumericsError(std::string(what) + ": non-finite entries");
}
inline void require_finite(const Vector& v, const char* what) {
    if (!v.allFinite()) throw NumericsError(std::string(what) + ": non-finite entries");
}

}  // namespace rnnscope
