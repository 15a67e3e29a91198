#pragma once

#include "lotkit/common.hpp"
#include "lotkit/measures.hpp"

#include <vector>

namespace lotkit {

struct EotConfig {
  double epsilon = 1.0;
  int max_iter = 10000;
  /// Maximum L1 violation of the source marginal at termination.
  double tol = 1e-6;
};

/// Entropic dual potentials for the cost 0.5*|x-y|^2. The gauge is fixed so
/// that sum_i f_i a_i = 0.
struct DualPotentials {
  Vector f;
  Vector g;
  double epsilon = 0.0;
  int iterations = 0;
  double marginal_violation = 0.0;
  /// Dual objective after each full sweep.
  std::vector<double> objective_trace;
};

/// 0.5 * squared Euclidean distances between rows of x and rows of y.
Matrix half_squared_cost(const PointMatrix& x, const PointMatrix& y);

/// Sinkhorn iterations on the entropic dual until the source-marginal
/// violation of the induced plan drops below cfg.tol. Throws NumericalError
/// if that does not happen within cfg.max_iter sweeps.
DualPotentials solve_dual(const DiscreteMeasure& source, const DiscreteMeasure& target,
                          const EotConfig& cfg);

/// pi_ij = a_i b_j exp((f_i + g_j - c_ij) / eps).
Matrix entropic_plan(const DualPotentials& pot, const DiscreteMeasure& source,
                     const DiscreteMeasure& target);

/// The entropic dual objective including the constant +eps.
double dual_objective(const DualPotentials& pot, const DiscreteMeasure& source,
                      const DiscreteMeasure& target);

/// Barycentric projection of the entropic plan, extended out of sample
/// through the softmin relation for f. Works in the log domain.
Vector entropic_map_at(const DualPotentials& pot, const DiscreteMeasure& target, const Vector& x);
PointMatrix entropic_map(const DualPotentials& pot, const DiscreteMeasure& target,
                         const PointMatrix& xs);

/// c * n^(-1/(d + alpha_bar + 1)).
double epsilon_schedule(long n, long d, double alpha_bar, double constant = 1.0);

}  // namespace lotkit
