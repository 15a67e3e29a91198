#pragma once

#include "lotkit/common.hpp"
#include "lotkit/measures.hpp"

namespace lotkit {

/// Largest n*k handled by the dense exact solver.
inline constexpr double kExactBudget = 4e6;

struct TransportPlan {
  Matrix plan;
  /// sum_ij plan_ij |x_i - y_j|^2
  double cost = 0.0;
};

struct ExactOtResult {
  TransportPlan plan;
  double w2 = 0.0;
};

/// F_target^{-1}(F_source(x)) with right-continuous CDFs and the
/// left-continuous generalized inverse.
double quantile_map_1d(const DiscreteMeasure& source, const DiscreteMeasure& target, double x);

/// Exact W2 between discrete measures by network simplex on the
/// transportation problem. Throws InvalidArgument when n*k exceeds the budget.
ExactOtResult discrete_w2(const DiscreteMeasure& source, const DiscreteMeasure& target);

/// Squared W2 between two 1D measures from the quantile coupling.
double quantile_w2_squared_1d(const DiscreteMeasure& a, const DiscreteMeasure& b);

/// Conditional mean of the plan given each source atom.
MapOnSample barycentric_projection(const TransportPlan& plan, const DiscreteMeasure& source,
                                   const DiscreteMeasure& target);

}  // namespace lotkit
