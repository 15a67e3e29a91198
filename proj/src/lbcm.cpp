#include "lotkit/lbcm.hpp"

#include "lotkit/exact_ot.hpp"
#include "lotkit/parallel.hpp"

#include <cmath>

namespace lotkit {

double lot_distance(const MapOnSample& t_mu, const MapOnSample& t_nu) {
  if (!t_mu.shares_base_with(t_nu)) throw InvalidArgument("incompatible base sample");
  require(t_mu.dim() == t_nu.dim(), "maps have different image dimensions");
  const Vector sq = (t_mu.images() - t_nu.images()).rowwise().squaredNorm();
  return std::sqrt(std::max(0.0, t_mu.base_weights().dot(sq)));
}

Matrix gram_of_differences(const std::vector<MapOnSample>& maps, const MapOnSample& reference) {
  require(!maps.empty(), "need at least one map");
  const auto n = reference.size();
  const auto d = reference.dim();
  const auto m = static_cast<Eigen::Index>(maps.size());
  const Vector sqrt_w = reference.base_weights().cwiseSqrt();
  Matrix stacked(n * d, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& map = maps[static_cast<std::size_t>(i)];
    if (!map.shares_base_with(reference)) throw InvalidArgument("incompatible base sample");
    require(map.dim() == d, "maps have different image dimensions");
    const PointMatrix diff = sqrt_w.asDiagonal() * (map.images() - reference.images());
    stacked.col(i) = Eigen::Map<const Vector>(diff.data(), n * d);
  }
  Matrix gram = stacked.transpose() * stacked;
  gram = 0.5 * (gram + gram.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
  const double scale = gram.norm();
  if (es.eigenvalues().minCoeff() < -1e-10 * scale) {
    Vector ev = es.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i)
      if (ev[i] < -1e-10 * scale) ev[i] = 0.0;
    gram = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
    gram = 0.5 * (gram + gram.transpose());
  }
  return gram;
}

Matrix build_gram(const LbcmProblem& problem) {
  if (!problem.target_map) throw InvalidArgument("build_gram needs a target map");
  return gram_of_differences(problem.reference_maps, *problem.target_map);
}

MapOnSample fit_entropic_map(const DiscreteMeasure& fit_source, const DiscreteMeasure& target,
                             const MapOnSample& eval, const EotConfig& cfg) {
  const DualPotentials pot = solve_dual(fit_source, target, cfg);
  return MapOnSample(eval.shared_base(), eval.shared_weights(), entropic_map(pot, target, eval.base_points()));
}

MapOnSample fit_quantile_map(const DiscreteMeasure& source, const DiscreteMeasure& target,
                             const MapOnSample& eval) {
  require(eval.base_points().cols() == 1, "quantile maps are one-dimensional");
  PointMatrix images(eval.size(), 1);
  for (Eigen::Index i = 0; i < eval.size(); ++i)
    images(i, 0) = quantile_map_1d(source, target, eval.base_points()(i, 0));
  return MapOnSample(eval.shared_base(), eval.shared_weights(), std::move(images));
}

MapOnSample affine_map(const Matrix& c, const Vector& shift, const MapOnSample& eval) {
  require(c.cols() == eval.base_points().cols() && c.rows() == shift.size(), "affine map dimensions disagree");
  PointMatrix images = eval.base_points() * c.transpose();
  images.rowwise() += shift.transpose();
  return MapOnSample(eval.shared_base(), eval.shared_weights(), std::move(images));
}

LbcmProblem make_entropic_problem(const DiscreteMeasure& base_fit, const DiscreteMeasure& base_eval,
                                  const std::vector<DiscreteMeasure>& refs,
                                  const std::optional<DiscreteMeasure>& target, const EotConfig& cfg) {
  require(!refs.empty(), "need at least one reference");
  const MapOnSample eval = MapOnSample::identity(base_eval);
  const std::size_t jobs = refs.size() + (target ? 1 : 0);
  std::vector<MapOnSample> maps(jobs);
  parallel_for(jobs, [&](std::size_t i) {
    const DiscreteMeasure& dest = i < refs.size() ? refs[i] : *target;
    maps[i] = fit_entropic_map(base_fit, dest, eval, cfg);
  });
  LbcmProblem problem;
  if (target) {
    problem.target_map = maps.back();
    maps.pop_back();
  }
  problem.reference_maps = std::move(maps);
  return problem;
}

std::pair<DiscreteMeasure, DiscreteMeasure> split_base_sample(const DiscreteMeasure& base) {
  require(base.size() >= 2, "base sample needs at least two points");
  const auto half = base.size() / 2;
  return {DiscreteMeasure::uniform(base.support().topRows(half)),
          DiscreteMeasure::uniform(base.support().bottomRows(base.size() - half))};
}

LbcmEstimate estimate_lambda_measures(const DiscreteMeasure& base_fit, const DiscreteMeasure& base_eval,
                                      const std::vector<DiscreteMeasure>& refs, const DiscreteMeasure& target,
                                      const EotConfig& cfg, const QpOptions& qp) {
  const LbcmProblem problem = make_entropic_problem(base_fit, base_eval, refs, target, cfg);
  LbcmEstimate out;
  out.gram = build_gram(problem);
  out.qp = min_quadratic_simplex(out.gram, qp);
  return out;
}

LbcmEstimate estimate_lambda(const DiscreteMeasure& base, const std::vector<DiscreteMeasure>& refs,
                             const DiscreteMeasure& target, double eps, const EotConfig& solver,
                             const QpOptions& qp) {
  if (!(eps > 0.0)) throw InvalidArgument("epsilon must be positive");
  auto [fit, eval] = split_base_sample(base);
  EotConfig cfg = solver;
  cfg.epsilon = eps;
  return estimate_lambda_measures(fit, eval, refs, target, cfg, qp);
}

DiscreteMeasure synthesize(const SimplexWeights& lambda, const LbcmProblem& problem) {
  require(!problem.reference_maps.empty(), "synthesis needs reference maps");
  return pushforward(combine_maps(lambda, problem.reference_maps));
}

}  // namespace lotkit
