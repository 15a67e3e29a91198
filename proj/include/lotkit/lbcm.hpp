#pragma once

#include "lotkit/common.hpp"
#include "lotkit/eot.hpp"
#include "lotkit/measures.hpp"
#include "lotkit/simplex_opt.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace lotkit {

/// Maps from a shared base measure to each reference (and optionally the
/// target), all evaluated on the same evaluation sample.
struct LbcmProblem {
  std::vector<MapOnSample> reference_maps;
  std::optional<MapOnSample> target_map;
};

/// Square root of the base-weighted mean squared distance between images.
double lot_distance(const MapOnSample& t_mu, const MapOnSample& t_nu);

/// Symmetrized Gram matrix of the displacement fields maps[i] - reference,
/// with negative eigenvalues below -1e-10 |A| clipped to zero.
Matrix gram_of_differences(const std::vector<MapOnSample>& maps, const MapOnSample& reference);

/// A^L_ij = <T_i - T_eta, T_j - T_eta> in L2 of the evaluation sample.
Matrix build_gram(const LbcmProblem& problem);

/// Entropic map from `fit_source` to `target`, evaluated at the points of `eval`.
MapOnSample fit_entropic_map(const DiscreteMeasure& fit_source, const DiscreteMeasure& target,
                             const MapOnSample& eval, const EotConfig& cfg);

/// Exact 1D monotone map from `source` to `target`, evaluated at the points of `eval`.
MapOnSample fit_quantile_map(const DiscreteMeasure& source, const DiscreteMeasure& target,
                             const MapOnSample& eval);

/// x -> C x + shift evaluated at the points of `eval`.
MapOnSample affine_map(const Matrix& c, const Vector& shift, const MapOnSample& eval);

/// Fits entropic maps from base_fit to every reference and to the target,
/// evaluated on base_eval. The m + 1 solves run in parallel.
LbcmProblem make_entropic_problem(const DiscreteMeasure& base_fit, const DiscreteMeasure& base_eval,
                                  const std::vector<DiscreteMeasure>& refs,
                                  const std::optional<DiscreteMeasure>& target, const EotConfig& cfg);

struct LbcmEstimate {
  QpResult qp;
  Matrix gram;
};

/// Coordinate estimation from samples: the first half of `base` fits the
/// potentials, the second half carries the Monte-Carlo integral.
LbcmEstimate estimate_lambda(const DiscreteMeasure& base, const std::vector<DiscreteMeasure>& refs,
                             const DiscreteMeasure& target, double eps, const EotConfig& solver = {},
                             const QpOptions& qp = {});

/// Same with explicit (possibly weighted) fit and evaluation base measures.
LbcmEstimate estimate_lambda_measures(const DiscreteMeasure& base_fit, const DiscreteMeasure& base_eval,
                                      const std::vector<DiscreteMeasure>& refs, const DiscreteMeasure& target,
                                      const EotConfig& cfg, const QpOptions& qp = {});

/// Splits a sample into its first and second halves (uniform weights).
std::pair<DiscreteMeasure, DiscreteMeasure> split_base_sample(const DiscreteMeasure& base);

/// Pushforward of the evaluation sample through sum_i lambda_i T_i.
DiscreteMeasure synthesize(const SimplexWeights& lambda, const LbcmProblem& problem);

}  // namespace lotkit
