#include "doctest.h"

#include "lotkit/exact_ot.hpp"
#include "lotkit/gaussian_bw.hpp"
#include "lotkit/lbcm.hpp"
#include "lotkit/sampling.hpp"

#include <cmath>

using namespace lotkit;

namespace {

MapOnSample shift_map(const MapOnSample& id, double c) {
  PointMatrix img = id.base_points();
  img.array() += c;
  return MapOnSample(id.shared_base(), id.shared_weights(), img);
}

DiscreteMeasure shifted_uniform(double lo, Eigen::Index n, std::uint64_t seed) {
  return sample_uniform_interval(lo, lo + 1.0, n, seed);
}

}  // namespace

TEST_CASE("lot_distance") {
  const auto base = sample_uniform_interval(0, 1, 50, 1);
  const auto id = MapOnSample::identity(base);
  CHECK(lot_distance(id, id) == 0.0);
  CHECK(lot_distance(id, shift_map(id, 0.7)) == doctest::Approx(0.7).epsilon(1e-12));
  const auto other = MapOnSample::identity(sample_uniform_interval(0, 1, 50, 2));
  CHECK_THROWS_WITH_AS(lot_distance(id, other), "incompatible base sample", InvalidArgument);
}

TEST_CASE("lot_distance between 1D Gaussians matches the affine closed form") {
  const Eigen::Index n = 10000;
  const auto base = sample_gaussian(Vector::Zero(1), Matrix::Identity(1, 1), n, 3);
  const auto id = MapOnSample::identity(base);
  const double m1 = 0.5, s1 = 2.0, m2 = -1.0, s2 = 0.5;
  const auto t1 = affine_map(Matrix::Constant(1, 1, s1), Vector::Constant(1, m1), id);
  const auto t2 = affine_map(Matrix::Constant(1, 1, s2), Vector::Constant(1, m2), id);
  const double expected = std::sqrt((m1 - m2) * (m1 - m2) + (s1 - s2) * (s1 - s2));
  CHECK(std::abs(lot_distance(t1, t2) - expected) <= 0.05);
}

TEST_CASE("Gram matrix examples") {
  const auto base = sample_uniform_interval(0, 1, 40, 4);
  const auto id = MapOnSample::identity(base);
  LbcmProblem p;
  p.reference_maps = {id, shift_map(id, 2.0)};
  p.target_map = shift_map(id, 1.0);
  const Matrix a = build_gram(p);
  CHECK(a(0, 0) == doctest::Approx(1.0));
  CHECK(a(0, 1) == doctest::Approx(-1.0));
  CHECK(a(1, 1) == doctest::Approx(1.0));

  p.target_map = p.reference_maps[0];
  const Matrix z = build_gram(p);
  CHECK(std::abs(z(0, 0)) <= 1e-15);
  CHECK(std::abs(z(0, 1)) <= 1e-15);

  LbcmProblem one;
  one.reference_maps = {shift_map(id, 0.3)};
  one.target_map = id;
  CHECK(build_gram(one)(0, 0) == doctest::Approx(0.09));

  LbcmProblem missing;
  missing.reference_maps = {id};
  CHECK_THROWS_AS(build_gram(missing), InvalidArgument);
}

TEST_CASE("Gram quadratic form equals the squared LOT distance of the combination") {
  auto base = std::make_shared<const PointMatrix>(PointMatrix::Random(100, 2));
  LbcmProblem p;
  for (int i = 0; i < 4; ++i) p.reference_maps.emplace_back(base, PointMatrix::Random(100, 2));
  p.target_map = MapOnSample(base, PointMatrix::Random(100, 2));
  const Matrix a = build_gram(p);
  CHECK((a - a.transpose()).norm() == 0.0);
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    const auto l = sample_simplex_uniform(4, rng);
    const double d = lot_distance(combine_maps(l, p.reference_maps), *p.target_map);
    CHECK(std::abs(l.values().dot(a * l.values()) - d * d) <= 1e-10);
  }
}

TEST_CASE("estimate_lambda in 1D recovers the midpoint") {
  const Eigen::Index n = 2000;
  const auto base = sample_uniform_interval(0, 1, 2 * n, 10);
  const std::vector<DiscreteMeasure> refs{shifted_uniform(0, n, 11), shifted_uniform(2, n, 12)};
  const auto target = shifted_uniform(1, n, 13);
  const double eps = epsilon_schedule(n, 1, 3.0);
  const auto est = estimate_lambda(base, refs, target, eps);
  Vector half = Vector::Constant(2, 0.5);
  CHECK((est.qp.lambda.values() - half).norm() <= 0.1);

  const auto single = estimate_lambda(base, {refs[0]}, target, eps);
  CHECK(single.qp.lambda[0] == 1.0);
  CHECK_THROWS_AS(estimate_lambda(base, refs, target, 0.0), InvalidArgument);
}

TEST_CASE("estimate_lambda concentrates on a reference equal to the target") {
  const Eigen::Index n = 2000;
  const auto base = sample_uniform_interval(0, 1, 2 * n, 20);
  const std::vector<DiscreteMeasure> refs{shifted_uniform(0, n, 21), sample_uniform_interval(1, 4, n, 22),
                                          shifted_uniform(3, n, 23)};
  const auto est = estimate_lambda(base, refs, refs[1], epsilon_schedule(n, 1, 3.0));
  CHECK(est.qp.lambda[1] >= 0.9);
}

TEST_CASE("synthesize with exact quantile maps reproduces the 1D barycenter") {
  const Eigen::Index n = 2000;
  PointMatrix grid(n, 1);
  for (Eigen::Index j = 0; j < n; ++j) grid(j, 0) = (static_cast<double>(j) + 0.5) / static_cast<double>(n);
  const auto base = DiscreteMeasure::uniform(grid);
  const auto id = MapOnSample::identity(base);
  PointMatrix g0 = grid, g1 = grid;
  g1.array() += 2.0;
  const auto r0 = DiscreteMeasure::uniform(g0);
  const auto r1 = DiscreteMeasure::uniform(g1);
  LbcmProblem p;
  p.reference_maps = {fit_quantile_map(base, r0, id), fit_quantile_map(base, r1, id)};
  const auto out = synthesize(SimplexWeights::barycenter(2), p);
  PointMatrix mid = grid;
  mid.array() += 1.0;
  CHECK(std::sqrt(quantile_w2_squared_1d(out, DiscreteMeasure::uniform(mid))) <= 2.0 / static_cast<double>(n));
  CHECK(out.support().minCoeff() >= 1.0);
  CHECK(out.support().maxCoeff() <= 2.0);

  const auto e0 = synthesize(SimplexWeights::vertex(2, 0), p);
  CHECK(e0.support() == p.reference_maps[0].images());
}

TEST_CASE("synthesize with entropic maps lands on U[1,2]") {
  const Eigen::Index n = 2000;
  const auto base = sample_uniform_interval(0, 1, 2 * n, 30);
  auto [fit, eval] = split_base_sample(base);
  EotConfig cfg;
  // the schedule's epsilon (~0.22 here) visibly shrinks maps toward the mean
  cfg.epsilon = 1e-2;
  const auto p = make_entropic_problem(fit, eval, {shifted_uniform(0, n, 31), shifted_uniform(2, n, 32)}, std::nullopt, cfg);
  const auto out = synthesize(SimplexWeights::barycenter(2), p);
  PointMatrix grid(n, 1);
  for (Eigen::Index j = 0; j < n; ++j) grid(j, 0) = 1.0 + (static_cast<double>(j) + 0.5) / static_cast<double>(n);
  CHECK(std::sqrt(quantile_w2_squared_1d(out, DiscreteMeasure::uniform(grid))) <= 0.05);
}

TEST_CASE("Gaussian affine maps synthesize the Bures barycenter") {
  const Eigen::Index d = 3, n = 10000;
  const auto covs = random_covariances(3, d, 40);
  std::vector<SpdMatrix> sig;
  for (const auto& c : covs) sig.emplace_back(c);
  const SpdMatrix s0(Matrix::Identity(d, d));
  const auto base = sample_gaussian(Vector::Zero(d), s0.matrix(), n, 41);
  const auto id = MapOnSample::identity(base);
  LbcmProblem p;
  for (const auto& s : sig) p.reference_maps.push_back(affine_map(gaussian_ot_map(s0, s), Vector::Zero(d), id));
  Vector l(3);
  l << 0.2, 0.5, 0.3;
  const auto out = synthesize(SimplexWeights(l), p);
  const Matrix bary = bures_barycenter(SimplexWeights(l), sig).matrix();
  Matrix emp = out.support().transpose() * out.support() / static_cast<double>(n);
  CHECK((emp - bary).norm() <= 0.1 * bary.norm());
}
