#include "doctest.h"

#include "lotkit/exact_ot.hpp"
#include "lotkit/lbcm.hpp"
#include "lotkit/sampling.hpp"
#include "lotkit/w2bcm.hpp"

#include <cmath>

using namespace lotkit;

namespace {

DiscreteMeasure grid_measure(double lo, double hi, Eigen::Index n) {
  PointMatrix g(n, 1);
  for (Eigen::Index j = 0; j < n; ++j) g(j, 0) = lo + (hi - lo) * (static_cast<double>(j) + 0.5) / static_cast<double>(n);
  return DiscreteMeasure::uniform(g);
}

MapOnSample displaced(const DiscreteMeasure& target, double c) {
  const auto id = MapOnSample::identity(target);
  PointMatrix img = target.support();
  img.array() += c;
  return MapOnSample(id.shared_base(), id.shared_weights(), img);
}

}  // namespace

TEST_CASE("build_gram_bcm examples") {
  const auto eta = sample_uniform_interval(1, 2, 200, 1);
  const Matrix a = build_gram_bcm(eta, {displaced(eta, -1.0), displaced(eta, 1.0)});
  CHECK(a(0, 0) == doctest::Approx(1.0));
  CHECK(a(0, 1) == doctest::Approx(-1.0));
  const Matrix z = build_gram_bcm(eta, {displaced(eta, 0.0), displaced(eta, 0.0)});
  CHECK(z.norm() == 0.0);
  const auto other = sample_uniform_interval(1, 2, 200, 2);
  CHECK_THROWS_WITH_AS(build_gram_bcm(eta, {displaced(other, 1.0)}), "incompatible base sample", InvalidArgument);
}

TEST_CASE("build_gram_bcm quadratic form is permutation invariant") {
  auto eta = DiscreteMeasure::uniform(PointMatrix::Random(30, 2));
  std::vector<MapOnSample> maps;
  const auto id = MapOnSample::identity(eta);
  for (int i = 0; i < 3; ++i) maps.emplace_back(id.shared_base(), id.shared_weights(), PointMatrix::Random(30, 2));
  const Matrix a = build_gram_bcm(eta, maps);
  const Matrix b = build_gram_bcm(eta, {maps[2], maps[0], maps[1]});
  Vector l(3), lp(3);
  l << 0.2, 0.3, 0.5;
  lp << 0.5, 0.2, 0.3;
  CHECK(l.dot(a * l) == doctest::Approx(lp.dot(b * lp)).epsilon(1e-12));
}

TEST_CASE("estimate_lambda_bcm on compatible 1D data") {
  const Eigen::Index n = 2000;
  const std::vector<DiscreteMeasure> refs{sample_uniform_interval(0, 1, n, 3), sample_uniform_interval(2, 3, n, 4)};
  const auto target = sample_uniform_interval(1, 2, n, 5);
  const double eps = epsilon_schedule(n, 1, 3.0);
  const auto est = estimate_lambda_bcm(target, refs, eps);
  CHECK((est.gram - (Matrix(2, 2) << 1, -1, -1, 1).finished()).cwiseAbs().maxCoeff() <= 0.05);
  CHECK((est.qp.lambda.values() - Vector::Constant(2, 0.5)).norm() <= 0.1);

  // agreement with the LBCM estimate on the same compatible family
  const auto base = sample_uniform_interval(0, 1, 2 * n, 6);
  const auto lbcm = estimate_lambda(base, refs, target, eps);
  CHECK((lbcm.qp.lambda.values() - est.qp.lambda.values()).norm() <= 0.15);

  CHECK(estimate_lambda_bcm(target, {refs[0]}, eps).qp.lambda[0] == 1.0);
  // a target of width 3 is far from any mix of the width-1 references
  const auto wide = sample_uniform_interval(1, 4, n, 8);
  const auto self = estimate_lambda_bcm(wide, {refs[0], wide, sample_uniform_interval(5, 6, n, 7)}, 1e-2);
  CHECK(self.qp.lambda[1] >= 0.9);
}

TEST_CASE("iterative barycenter: single reference, alpha = 1") {
  const auto ref = grid_measure(2, 3, 40);
  const auto rho0 = sample_uniform_interval(0, 1, 40, 8);
  BarycenterConfig cfg;
  cfg.alpha = 1.0;
  cfg.k = 1;
  const auto r = iterative_barycenter({ref}, SimplexWeights::vertex(1, 0), rho0, cfg);
  const auto proj = barycentric_projection(discrete_w2(rho0, ref).plan, rho0, ref);
  CHECK((r.measure.support() - proj.images()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(r.measure.size() == rho0.size());
}

TEST_CASE("iterative barycenter: objective non-increasing, duplication invariant") {
  const auto nu = DiscreteMeasure::uniform(PointMatrix::Random(30, 2).array() + 3.0);
  const auto rho0 = DiscreteMeasure::uniform(PointMatrix::Random(25, 2));
  BarycenterConfig cfg;
  cfg.alpha = 0.3;
  cfg.k = 15;
  const auto single = iterative_barycenter({nu}, SimplexWeights::vertex(1, 0), rho0, cfg);
  for (std::size_t l = 1; l < single.objectives.size(); ++l)
    CHECK(single.objectives[l] <= single.objectives[l - 1] + 1e-6);
  CHECK(single.objectives.front() == doctest::Approx(std::pow(discrete_w2(rho0, nu).w2, 2)).epsilon(1e-9));
  const auto dup = iterative_barycenter({nu, nu}, SimplexWeights::barycenter(2), rho0, cfg);
  CHECK((dup.measure.support() - single.measure.support()).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("iterative barycenter: two references, objective monotone") {
  Rng rng(12);
  const auto a = DiscreteMeasure::uniform(PointMatrix::Random(20, 2));
  const auto b = DiscreteMeasure::uniform((PointMatrix::Random(24, 2).array() + 4.0).matrix());
  const auto rho0 = DiscreteMeasure::uniform(PointMatrix::Random(18, 2).array() * 3.0);
  BarycenterConfig cfg;
  cfg.alpha = 0.2;
  cfg.k = 20;
  Vector l(2);
  l << 0.3, 0.7;
  const auto r = iterative_barycenter({a, b}, SimplexWeights(l), rho0, cfg);
  REQUIRE(r.objectives.size() == 21);
  for (std::size_t i = 1; i < r.objectives.size(); ++i) CHECK(r.objectives[i] <= r.objectives[i - 1] + 1e-6);
  // reported objective is the true weighted W2^2 of the final iterate
  const double direct = 0.3 * std::pow(discrete_w2(r.measure, a).w2, 2) + 0.7 * std::pow(discrete_w2(r.measure, b).w2, 2);
  CHECK(r.objectives.back() == doctest::Approx(direct).epsilon(1e-9));
}

TEST_CASE("iterative barycenter: 1D grids converge to U[1,2]") {
  const auto r = iterative_barycenter({grid_measure(0, 1, 200), grid_measure(2, 3, 200)}, SimplexWeights::barycenter(2),
                                     grid_measure(0, 3, 200), BarycenterConfig{});
  CHECK(std::sqrt(quantile_w2_squared_1d(r.measure, grid_measure(1, 2, 200))) <= 0.1);
}

TEST_CASE("iterative barycenter validation and entropic backend") {
  const auto a = grid_measure(0, 1, 10);
  BarycenterConfig bad;
  bad.alpha = 0.0;
  CHECK_THROWS_AS(iterative_barycenter({a}, SimplexWeights::vertex(1, 0), a, bad), InvalidArgument);
  bad.alpha = 0.5;
  bad.k = 0;
  CHECK_THROWS_AS(iterative_barycenter({a}, SimplexWeights::vertex(1, 0), a, bad), InvalidArgument);
  BarycenterConfig ent;
  ent.backend = PlanBackend::kEntropic;
  ent.alpha = 1.0;
  ent.k = 3;
  const auto r = iterative_barycenter({grid_measure(2, 3, 50)}, SimplexWeights::vertex(1, 0), grid_measure(0, 1, 50), ent);
  CHECK(std::sqrt(quantile_w2_squared_1d(r.measure, grid_measure(2, 3, 50))) <= 0.05);
}
