#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace lotkit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Rows are points.
using PointMatrix = Eigen::MatrixXd;

/// Raised when arguments violate a documented precondition.
class InvalidArgument : public std::invalid_argument {
 public:
  explicit InvalidArgument(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised when a numerical routine cannot produce a trustworthy result
/// (non-convergence, loss of definiteness, underflow).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

}  // namespace lotkit
