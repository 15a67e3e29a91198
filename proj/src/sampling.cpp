#include "lotkit/sampling.hpp"

#include <algorithm>
#include <cmath>

namespace lotkit {

DiscreteMeasure sample_gaussian(const Vector& mean, const Matrix& cov, Eigen::Index n,
                                std::uint64_t seed) {
  require(n >= 1, "sample count must be positive");
  require(cov.rows() == cov.cols() && cov.rows() == mean.size(), "mean and covariance dimensions differ");
  const Matrix sym = 0.5 * (cov + cov.transpose());
  Eigen::LLT<Matrix> llt(sym);
  if (llt.info() != Eigen::Success) throw InvalidArgument("covariance not positive definite");
  const Matrix L = llt.matrixL();
  Rng rng(seed);
  const auto d = mean.size();
  PointMatrix z(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index c = 0; c < d; ++c) z(i, c) = rng.normal();
  PointMatrix x = z * L.transpose();
  x.rowwise() += mean.transpose();
  return DiscreteMeasure::uniform(std::move(x));
}

SimplexWeights sample_simplex_uniform(Eigen::Index m, Rng& rng) {
  require(m >= 1, "simplex dimension must be positive");
  std::vector<double> cuts(static_cast<std::size_t>(m - 1));
  for (auto& c : cuts) c = rng.uniform();
  std::sort(cuts.begin(), cuts.end());
  Vector lambda(m);
  double prev = 0.0;
  for (Eigen::Index i = 0; i < m - 1; ++i) {
    lambda[i] = cuts[static_cast<std::size_t>(i)] - prev;
    prev = cuts[static_cast<std::size_t>(i)];
  }
  lambda[m - 1] = 1.0 - prev;
  return SimplexWeights(std::move(lambda));
}

SimplexWeights sample_simplex_uniform(Eigen::Index m, std::uint64_t seed) {
  Rng rng(seed);
  return sample_simplex_uniform(m, rng);
}

Matrix random_orthogonal(Eigen::Index d, Rng& rng) {
  require(d >= 1, "dimension must be positive");
  Matrix g(d, d);
  for (Eigen::Index c = 0; c < d; ++c)
    for (Eigen::Index r = 0; r < d; ++r) g(r, c) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index c = 0; c < d; ++c)
    if (r(c, c) < 0.0) q.col(c) *= -1.0;
  return q;
}

std::vector<Matrix> random_covariances(Eigen::Index m, Eigen::Index d, std::uint64_t seed) {
  require(m >= 1 && d >= 1, "random_covariances needs m >= 1 and d >= 1");
  Rng rng(seed);
  const Matrix o = random_orthogonal(d, rng);
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    Vector diag(d);
    for (Eigen::Index k = 0; k < d; ++k) diag[k] = std::max(std::abs(rng.normal()), kCovarianceFloor);
    Matrix s = o.transpose() * diag.asDiagonal() * o;
    out.push_back(0.5 * (s + s.transpose()));
  }
  return out;
}

DiscreteMeasure sample_uniform_triangle(Eigen::Index n, std::uint64_t seed) {
  require(n >= 1, "sample count must be positive");
  Rng rng(seed);
  PointMatrix x(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    double u = rng.uniform();
    double v = rng.uniform();
    if (u + v > 1.0) {
      u = 1.0 - u;
      v = 1.0 - v;
    }
    x(i, 0) = u;
    x(i, 1) = v;
  }
  return DiscreteMeasure::uniform(std::move(x));
}

DiscreteMeasure sample_uniform_interval(double lo, double hi, Eigen::Index n, std::uint64_t seed) {
  require(n >= 1, "sample count must be positive");
  require(lo < hi, "interval must be nondegenerate");
  Rng rng(seed);
  PointMatrix x(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) x(i, 0) = lo + (hi - lo) * rng.uniform();
  return DiscreteMeasure::uniform(std::move(x));
}

}  // namespace lotkit
