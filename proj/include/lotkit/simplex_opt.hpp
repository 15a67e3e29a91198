#pragma once

#include "lotkit/common.hpp"
#include "lotkit/measures.hpp"

namespace lotkit {

struct QpResult {
  SimplexWeights lambda;
  double objective = 0.0;
  /// Frank-Wolfe duality gap at the returned point; bounds objective - optimum.
  double certificate_gap = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Dimension of the numerical null space of the quadratic term. Values
  /// above one mean the minimizer need not be unique.
  int null_space_dim = 0;
};

struct QpOptions {
  /// Stop when the duality gap falls below tol * (problem scale).
  double tol = 1e-10;
  int max_iter = 200000;
};

/// Euclidean projection onto the probability simplex (sort and threshold).
SimplexWeights project_simplex(const Vector& x);
/// Projection without wrapping, for callers iterating in raw vectors.
Vector project_simplex_raw(const Vector& x);

/// argmin over the simplex of lambda^T A lambda for symmetric PSD A.
QpResult min_quadratic_simplex(const Matrix& a, const QpOptions& opts = {});

/// argmin over the simplex of |B lambda - c|^2.
QpResult project_convex_hull(const Matrix& b, const Vector& c, const QpOptions& opts = {});

}  // namespace lotkit
