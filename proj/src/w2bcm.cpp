#include "lotkit/w2bcm.hpp"

#include "lotkit/lbcm.hpp"
#include "lotkit/parallel.hpp"

#include <cmath>

namespace lotkit {
namespace {

double squared_diameter(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  PointMatrix all(a.size() + b.size(), a.dim());
  all << a.support(), b.support();
  const Eigen::RowVectorXd span = all.colwise().maxCoeff() - all.colwise().minCoeff();
  return span.squaredNorm();
}

}  // namespace

Matrix build_gram_bcm(const DiscreteMeasure& target_sample, const std::vector<MapOnSample>& ref_maps_from_target) {
  require(!ref_maps_from_target.empty(), "need at least one map");
  const MapOnSample id = MapOnSample::identity(target_sample);
  for (const auto& map : ref_maps_from_target)
    if (!map.shares_base_with(id) || map.base_weights() != id.base_weights())
      throw InvalidArgument("incompatible base sample");
  // Rebase on the identity's shared pointer so the Gram helper sees one sample.
  std::vector<MapOnSample> maps;
  maps.reserve(ref_maps_from_target.size());
  for (const auto& map : ref_maps_from_target)
    maps.emplace_back(id.shared_base(), id.shared_weights(), map.images());
  return gram_of_differences(maps, id);
}

BcmEstimate estimate_lambda_bcm(const DiscreteMeasure& target, const std::vector<DiscreteMeasure>& refs,
                                double eps, const EotConfig& solver, const QpOptions& qp) {
  if (!(eps > 0.0)) throw InvalidArgument("epsilon must be positive");
  require(!refs.empty(), "need at least one reference");
  EotConfig cfg = solver;
  cfg.epsilon = eps;
  const MapOnSample id = MapOnSample::identity(target);
  std::vector<MapOnSample> maps(refs.size());
  parallel_for(refs.size(), [&](std::size_t i) { maps[i] = fit_entropic_map(target, refs[i], id, cfg); });
  BcmEstimate out;
  out.gram = build_gram_bcm(target, maps);
  out.qp = min_quadratic_simplex(out.gram, qp);
  return out;
}

TransportPlan transport_plan(const DiscreteMeasure& source, const DiscreteMeasure& target, PlanBackend backend,
                             double epsilon) {
  const double product = static_cast<double>(source.size()) * static_cast<double>(target.size());
  if (backend == PlanBackend::kAuto) backend = product <= kExactBudget ? PlanBackend::kExact : PlanBackend::kEntropic;
  if (backend == PlanBackend::kExact) return discrete_w2(source, target).plan;

  EotConfig cfg;
  cfg.epsilon = epsilon > 0.0 ? epsilon : 1e-3 * squared_diameter(source, target);
  if (!(cfg.epsilon > 0.0)) cfg.epsilon = 1e-12;
  const DualPotentials pot = solve_dual(source, target, cfg);
  TransportPlan out;
  out.plan = entropic_plan(pot, source, target);
  // cost 0.5|x-y|^2 in the solver; report the squared distance
  out.cost = 2.0 * out.plan.cwiseProduct(half_squared_cost(source.support(), target.support())).sum();
  return out;
}

BarycenterResult iterative_barycenter(const std::vector<DiscreteMeasure>& refs, const SimplexWeights& lambda,
                                      const DiscreteMeasure& rho0, const BarycenterConfig& cfg) {
  require(!refs.empty(), "need at least one reference");
  require(rho0.size() >= 1, "initial measure is empty");
  require(lambda.size() == static_cast<Eigen::Index>(refs.size()), "lambda and references differ in length");
  require(cfg.alpha > 0.0 && cfg.alpha <= 1.0, "alpha must lie in (0, 1]");
  require(cfg.k >= 1, "k must be at least 1");
  for (const auto& r : refs) require(r.dim() == rho0.dim(), "references live in different dimensions");

  BarycenterResult out;
  DiscreteMeasure rho = rho0;
  const std::size_t m = refs.size();
  std::vector<TransportPlan> plans(m);
  auto compute_plans = [&] {
    parallel_for(m, [&](std::size_t j) {
      if (lambda[static_cast<Eigen::Index>(j)] > 0.0) plans[j] = transport_plan(rho, refs[j], cfg.backend, cfg.epsilon);
    });
    double objective = 0.0;
    for (std::size_t j = 0; j < m; ++j)
      if (lambda[static_cast<Eigen::Index>(j)] > 0.0) objective += lambda[static_cast<Eigen::Index>(j)] * plans[j].cost;
    out.objectives.push_back(objective);
  };

  for (int l = 0; l < cfg.k; ++l) {
    compute_plans();
    PointMatrix target = PointMatrix::Zero(rho.size(), rho.dim());
    for (std::size_t j = 0; j < m; ++j) {
      const double w = lambda[static_cast<Eigen::Index>(j)];
      if (w > 0.0) target += w * barycentric_projection(plans[j], rho, refs[j]).images();
    }
    PointMatrix next = (1.0 - cfg.alpha) * rho.support() + cfg.alpha * target;
    if (!next.allFinite()) throw NumericalError("iterate has non-finite points");
    rho = DiscreteMeasure(std::move(next), rho.weights());
  }
  if (cfg.final_objective) compute_plans();
  out.measure = std::move(rho);
  return out;
}

}  // namespace lotkit
