#include "doctest.h"

#include "lotkit/gaussian_bw.hpp"
#include "lotkit/sampling.hpp"

#include <cmath>

using namespace lotkit;

namespace {

Matrix random_spd(Eigen::Index d, Rng& rng) {
  Matrix a(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = rng.normal();
  return a * a.transpose() / static_cast<double>(d) + Matrix::Identity(d, d);
}

Matrix diag2(double a, double b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

}  // namespace

TEST_CASE("SpdMatrix validation") {
  CHECK_NOTHROW(SpdMatrix(Matrix::Identity(3, 3)));
  Matrix asym = Matrix::Identity(2, 2);
  asym(0, 1) = 0.1;
  CHECK_THROWS_AS(SpdMatrix{asym}, InvalidArgument);
  CHECK_THROWS_AS(SpdMatrix(diag2(1.0, -1.0)), InvalidArgument);
}

TEST_CASE("sqrtm closed forms and agreement") {
  CHECK((sqrtm(SpdMatrix(Matrix::Identity(3, 3))).matrix() - Matrix::Identity(3, 3)).norm() < 1e-14);
  CHECK((sqrtm(SpdMatrix(diag2(4, 9))).matrix() - diag2(2, 3)).norm() < 1e-14);
  Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    const SpdMatrix s(random_spd(5, rng));
    const Matrix e = sqrtm(s).matrix();
    const Matrix ns = sqrtm(s, {SqrtMethod::kNewtonSchulz, 10}).matrix();
    CHECK((e * e - s.matrix()).norm() <= 1e-8 * s.matrix().norm());
    CHECK((e - ns).norm() <= 1e-6);
  }
}

TEST_CASE("gaussian_ot_map") {
  const SpdMatrix i2(Matrix::Identity(2, 2));
  CHECK((gaussian_ot_map(i2, SpdMatrix(diag2(4, 9))) - diag2(2, 3)).cwiseAbs().maxCoeff() <= 1e-12);
  Rng rng(2);
  const SpdMatrix s(random_spd(4, rng));
  CHECK((gaussian_ot_map(s, s) - Matrix::Identity(4, 4)).norm() <= 1e-10);
  for (int t = 0; t < 10; ++t) {
    const SpdMatrix a(random_spd(6, rng)), b(random_spd(6, rng));
    const Matrix c = gaussian_ot_map(a, b);
    CHECK((c - c.transpose()).norm() == 0.0);
    CHECK((c * a.matrix() * c - b.matrix()).norm() <= 1e-8 * b.matrix().norm());
  }
  // commuting pair: shared eigenvectors, eigenvalues sqrt(d1/d0)
  Rng r2(3);
  const Matrix o = random_orthogonal(3, r2);
  Vector d0(3), d1(3);
  d0 << 1.0, 2.0, 0.5;
  d1 << 4.0, 0.5, 2.0;
  const SpdMatrix s0(o * d0.asDiagonal() * o.transpose()), s1(o * d1.asDiagonal() * o.transpose());
  const Matrix expected = o * d1.cwiseQuotient(d0).cwiseSqrt().asDiagonal() * o.transpose();
  CHECK((gaussian_ot_map(s0, s1) - expected).norm() <= 1e-12);
}

TEST_CASE("bures barycenter") {
  Rng rng(4);
  const SpdMatrix s(random_spd(3, rng));
  CHECK((bures_barycenter(SimplexWeights::barycenter(3), {s, s, s}).matrix() - s.matrix()).norm() <= 1e-10);
  const SpdMatrix a(diag2(1, 4)), b(diag2(9, 16));
  const Matrix bc = bures_barycenter(SimplexWeights::barycenter(2), {a, b}).matrix();
  CHECK(bc(0, 0) == doctest::Approx(4.0).epsilon(1e-10));
  CHECK(bc(1, 1) == doctest::Approx(9.0).epsilon(1e-10));
  // first-order optimality on a non-commuting family
  std::vector<SpdMatrix> fam;
  for (int i = 0; i < 4; ++i) fam.emplace_back(random_spd(4, rng));
  Vector l(4);
  l << 0.1, 0.2, 0.3, 0.4;
  const SpdMatrix bary = bures_barycenter(SimplexWeights(l), fam, 500);
  Matrix t = Matrix::Zero(4, 4);
  for (int i = 0; i < 4; ++i) t += l[i] * gaussian_ot_map(bary, fam[static_cast<std::size_t>(i)]);
  CHECK((t - Matrix::Identity(4, 4)).norm() <= 1e-6);
}

TEST_CASE("lbcm covariance") {
  Rng rng(5);
  const SpdMatrix s0(random_spd(3, rng));
  std::vector<SpdMatrix> fam;
  for (int i = 0; i < 3; ++i) fam.emplace_back(random_spd(3, rng));
  for (int i = 0; i < 3; ++i)
    CHECK((lbcm_covariance(SimplexWeights::vertex(3, i), s0, fam).matrix() - fam[static_cast<std::size_t>(i)].matrix()).norm() <=
          1e-8 * fam[static_cast<std::size_t>(i)].matrix().norm());
  CHECK((lbcm_covariance(SimplexWeights::barycenter(2), s0, {s0, s0}).matrix() - s0.matrix()).norm() <= 1e-10);

  std::vector<SpdMatrix> commuting;
  for (const auto& c : random_covariances(4, 5, 6)) commuting.emplace_back(c);
  const auto l = sample_simplex_uniform(4, 7);
  const Matrix bary = bures_barycenter(l, commuting).matrix();
  const Matrix lb = lbcm_covariance(l, SpdMatrix(Matrix::Identity(5, 5)), commuting).matrix();
  CHECK((bary - lb).norm() <= 1e-6 * bary.norm());
}

TEST_CASE("noiseless BCM and LBCM recover lambda") {
  std::vector<SpdMatrix> fam;
  for (const auto& c : random_covariances(4, 4, 8)) fam.emplace_back(c);
  const auto l = sample_simplex_uniform(4, 9);
  const SpdMatrix truth = bures_barycenter(l, fam, 1000);
  const auto bcm = estimate_covariance_bcm(truth, fam);
  const auto lbcm = estimate_covariance_lbcm(truth, fam, SpdMatrix(Matrix::Identity(4, 4)));
  CHECK((bcm.lambda.values() - l.values()).norm() <= 1e-6);
  CHECK((lbcm.lambda.values() - l.values()).norm() <= 1e-6);
  CHECK((bcm.sigma.matrix() - truth.matrix()).norm() <= 1e-6);
  CHECK((lbcm.sigma.matrix() - truth.matrix()).norm() <= 1e-6);
}

TEST_CASE("MLE loss against a direct evaluation and MLE recovery") {
  const SpdMatrix a(diag2(1.0, 0.2)), b(diag2(0.1, 3.0));
  MleConfig cfg;
  // the truncated fixed point with NS roots reproduces the diagonal closed form
  const Vector half = Vector::Constant(2, 0.5);
  const double got = mle_loss(half, a, {a, b}, cfg);
  const double s0 = std::pow((1.0 + std::sqrt(0.1)) / 2, 2), s1 = std::pow((std::sqrt(0.2) + std::sqrt(3.0)) / 2, 2);
  const double expected = 1.0 / s0 + 0.2 / s1 + std::log(s0 * s1);
  CHECK(got == doctest::Approx(expected).epsilon(1e-6));

  // well-separated pair: spectra spread over [1/30, 30] in opposite orders
  const SpdMatrix p(diag2(30.0, 1.0 / 30.0)), q(diag2(1.0 / 30.0, 30.0));
  const auto r = mle_lambda(p, {p, q}, cfg);
  CHECK(r.lambda[0] >= 0.95);
  CHECK(mle_lambda(q, {p, q}, cfg).lambda[1] >= 0.95);
  for (std::size_t i = 1; i < r.losses.size(); ++i) CHECK(r.losses[i] <= r.losses[i - 1]);
  CHECK(std::abs(r.lambda.values().sum() - 1.0) <= 1e-12);
  CHECK(mle_lambda(a, {a}, cfg).lambda[0] == 1.0);
}

TEST_CASE("covariance experiment plumbing and determinism") {
  CovExperimentConfig cfg;
  cfg.m = 3;
  cfg.d = 3;
  cfg.n_grid = {100};
  cfg.trials = 1;
  cfg.mle.max_iters = 20;
  const auto rows = run_covariance_experiment(cfg);
  CHECK(rows.size() == 4);
  CHECK(std::isnan(rows[0].lambda_error_l2));
  CHECK(covariance_results_csv(rows) == covariance_results_csv(run_covariance_experiment(cfg)));
  CHECK(covariance_results_csv(rows).rfind("method,trial,n,cov_error_fro,lambda_error_l2,wall_time_ms\n", 0) == 0);
  cfg.methods = {"bogus"};
  CHECK_THROWS_AS(run_covariance_experiment(cfg), InvalidArgument);
}
