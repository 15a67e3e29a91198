#include "doctest.h"

#include "lotkit/sampling.hpp"
#include "lotkit/simplex_opt.hpp"

#include <cmath>

using namespace lotkit;

namespace {

Matrix random_psd(Eigen::Index m, Eigen::Index rank, Rng& rng) {
  Matrix b(m, rank);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < rank; ++j) b(i, j) = rng.normal();
  return b * b.transpose();
}

double grid_min_3(const Matrix& a, double step) {
  const int n = static_cast<int>(std::lround(1.0 / step));
  double best = std::numeric_limits<double>::infinity();
  Vector l(3);
  for (int i = 0; i <= n; ++i)
    for (int j = 0; i + j <= n; ++j) {
      l << i * step, j * step, (n - i - j) * step;
      best = std::min(best, l.dot(a * l));
    }
  return best;
}

}  // namespace

TEST_CASE("projection onto the simplex") {
  Vector x(3);
  x << 0.5, 0.5, 0.5;
  CHECK((project_simplex(x).values() - Vector::Constant(3, 1.0 / 3)).norm() < 1e-15);
  x << 2.0, 0.0, 0.0;
  CHECK(project_simplex(x)[0] == 1.0);
  Rng rng(2);
  for (int t = 0; t < 50; ++t) {
    Vector y(5);
    for (Eigen::Index i = 0; i < 5; ++i) y[i] = 2 * rng.normal();
    const Vector p = project_simplex_raw(y);
    CHECK(std::abs(p.sum() - 1.0) < 1e-12);
    CHECK(p.minCoeff() >= 0.0);
    // variational inequality against random simplex points
    for (int k = 0; k < 20; ++k) {
      const Vector q = sample_simplex_uniform(5, rng).values();
      CHECK((y - p).dot(q - p) <= 1e-12);
    }
  }
}

TEST_CASE("min_quadratic_simplex agrees with a grid search for m = 3") {
  Rng rng(7);
  for (int t = 0; t < 20; ++t) {
    const Matrix a = random_psd(3, 1 + t % 3, rng);
    const auto r = min_quadratic_simplex(a);
    CHECK(r.converged);
    CHECK(r.objective <= grid_min_3(a, 1e-3) + 1e-12);
    CHECK(r.objective >= grid_min_3(a, 1e-3) - 1e-4 * (1 + a.norm()));
    CHECK(r.certificate_gap >= -1e-12);
  }
}

TEST_CASE("vertex and null-space cases are recovered exactly") {
  Matrix a = Matrix::Identity(3, 3);
  a(0, 0) = 0.0;
  auto r = min_quadratic_simplex(a);
  CHECK(r.lambda[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.objective <= 1e-12);

  // refs x, x+2 and target x+1: A = [[1,-1],[-1,1]], minimizer (1/2, 1/2)
  Matrix b(2, 2);
  b << 1, -1, -1, 1;
  r = min_quadratic_simplex(b);
  CHECK(r.lambda[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(r.null_space_dim == 1);

  CHECK(min_quadratic_simplex(Matrix::Constant(1, 1, 3.0)).lambda[0] == 1.0);
}

TEST_CASE("optimality is scale invariant") {
  Rng rng(9);
  const Matrix a = random_psd(4, 4, rng);
  const auto r1 = min_quadratic_simplex(a);
  const auto r2 = min_quadratic_simplex(1e-6 * a);
  CHECK((r1.lambda.values() - r2.lambda.values()).norm() < 1e-6);
}

TEST_CASE("input validation") {
  Matrix a(2, 2);
  a << 1, 0, 0, -1;
  CHECK_THROWS_WITH(min_quadratic_simplex(a), "matrix not PSD within tolerance");
  Matrix ns(2, 3);
  ns.setZero();
  CHECK_THROWS(min_quadratic_simplex(ns));
}

TEST_CASE("convex hull projection") {
  Matrix b(2, 3);
  b << 0, 1, 0, 0, 0, 1;
  Vector c(2);
  c << 0.2, 0.3;
  auto r = project_convex_hull(b, c);
  CHECK((b * r.lambda.values() - c).norm() < 1e-6);
  c << 1, 1;
  r = project_convex_hull(b, c);
  CHECK(r.lambda[1] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(r.objective == doctest::Approx(0.5).epsilon(1e-8));
}
