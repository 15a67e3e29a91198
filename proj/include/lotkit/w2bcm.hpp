#pragma once

#include "lotkit/common.hpp"
#include "lotkit/eot.hpp"
#include "lotkit/exact_ot.hpp"
#include "lotkit/measures.hpp"
#include "lotkit/simplex_opt.hpp"

#include <vector>

namespace lotkit {

/// A_ij = <T_i - id, T_j - id> in L2 of the target sample.
Matrix build_gram_bcm(const DiscreteMeasure& target_sample, const std::vector<MapOnSample>& ref_maps_from_target);

struct BcmEstimate {
  QpResult qp;
  Matrix gram;
};

/// Entropic maps from the target sample to each reference, then the simplex QP.
BcmEstimate estimate_lambda_bcm(const DiscreteMeasure& target, const std::vector<DiscreteMeasure>& refs,
                                double eps, const EotConfig& solver = {}, const QpOptions& qp = {});

enum class PlanBackend { kAuto, kExact, kEntropic };

struct BarycenterConfig {
  double alpha = 0.05;
  int k = 200;
  PlanBackend backend = PlanBackend::kAuto;
  /// Entropic regularization; non-positive means 1e-3 times the squared diameter.
  double epsilon = 0.0;
  /// Also compute the objective of the final iterate (one extra round of plans).
  bool final_objective = true;
};

struct BarycenterResult {
  DiscreteMeasure measure;
  /// sum_j lambda_j W2^2(rho_l, mu_j) for l = 0, 1, ... (cost of the plans used).
  std::vector<double> objectives;
};

/// Transport plan between two measures from the chosen backend.
TransportPlan transport_plan(const DiscreteMeasure& source, const DiscreteMeasure& target, PlanBackend backend,
                             double epsilon = 0.0);

/// rho_l = [(1 - alpha) id + alpha sum_j lambda_j Tbar_j] # rho_{l-1} for k rounds,
/// with Tbar_j the barycentric projection of the plan from rho_{l-1} to refs[j].
BarycenterResult iterative_barycenter(const std::vector<DiscreteMeasure>& refs, const SimplexWeights& lambda,
                                      const DiscreteMeasure& rho0, const BarycenterConfig& cfg);

}  // namespace lotkit
