#include "lotkit/simplex_opt.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace lotkit {
namespace {

constexpr double kPsdSlack = 1e-8;
constexpr int kGapCheckEvery = 50;

struct Spectrum {
  double max_eig = 0.0;
  int null_dim = 0;
};

Spectrum check_psd(const Matrix& q) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(q, Eigen::EigenvaluesOnly);
  const Vector& ev = es.eigenvalues();
  const double scale = std::max(ev.cwiseAbs().maxCoeff(), 0.0);
  if (ev.minCoeff() < -kPsdSlack * scale) throw NumericalError("matrix not PSD within tolerance");
  Spectrum s;
  s.max_eig = std::max(ev.maxCoeff(), 0.0);
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev[i] <= kPsdSlack * scale) ++s.null_dim;
  return s;
}

// Minimizes lambda^T Q lambda + p^T lambda over the simplex by accelerated
// projected gradient with step 1/L and gradient-based restarts.
QpResult solve_qp(const Matrix& q, const Vector& p, double constant, const QpOptions& opts) {
  const auto m = q.rows();
  require(m >= 1, "QP needs at least one variable");
  require(q.cols() == m && p.size() == m, "QP dimensions disagree");
  require(opts.tol > 0.0 && opts.max_iter >= 1, "invalid QP options");
  const Spectrum spec = check_psd(q);
  const double lipschitz = 2.0 * spec.max_eig;
  const double scale = std::max({lipschitz, p.cwiseAbs().maxCoeff(), 1e-300});

  auto objective = [&](const Vector& x) { return x.dot(q * x) + p.dot(x) + constant; };
  auto gradient = [&](const Vector& x) { return Vector(2.0 * (q * x) + p); };
  auto fw_gap = [&](const Vector& x) {
    const Vector g = gradient(x);
    return std::max(0.0, g.dot(x) - g.minCoeff());
  };

  Vector x = Vector::Constant(m, 1.0 / static_cast<double>(m));
  QpResult out;
  out.null_space_dim = spec.null_dim;
  double gap = fw_gap(x);
  int it = 0;
  if (m > 1 && lipschitz > 0.0 && gap > opts.tol * scale) {
    Vector y = x;
    double t = 1.0;
    for (it = 1; it <= opts.max_iter; ++it) {
      const Vector x_next = project_simplex_raw(y - gradient(y) / lipschitz);
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      if ((y - x_next).dot(x_next - x) > 0.0) {
        y = x_next;
        t = 1.0;
      } else {
        y = x_next + ((t - 1.0) / t_next) * (x_next - x);
        t = t_next;
      }
      x = x_next;
      if (it % kGapCheckEvery == 0) {
        gap = fw_gap(x);
        if (gap <= opts.tol * scale) break;
      }
    }
    gap = fw_gap(x);
  }
  out.iterations = std::min(it, opts.max_iter);
  out.certificate_gap = gap;
  out.converged = gap <= opts.tol * scale || m == 1 || lipschitz == 0.0;
  out.objective = objective(x);
  out.lambda = SimplexWeights(x);
  return out;
}

}  // namespace

Vector project_simplex_raw(const Vector& x) {
  const auto m = x.size();
  require(m >= 1, "cannot project an empty vector");
  require(x.allFinite(), "cannot project a non-finite vector");
  std::vector<double> sorted(x.data(), x.data() + m);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (Eigen::Index k = 0; k < m; ++k) {
    cumulative += sorted[static_cast<std::size_t>(k)];
    const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (sorted[static_cast<std::size_t>(k)] - candidate > 0.0) theta = candidate;
  }
  Vector y = (x.array() - theta).cwiseMax(0.0).matrix();
  const double total = y.sum();
  if (total > 0.0) y /= total;
  return y;
}

SimplexWeights project_simplex(const Vector& x) { return SimplexWeights(project_simplex_raw(x)); }

QpResult min_quadratic_simplex(const Matrix& a, const QpOptions& opts) {
  require(a.rows() == a.cols(), "quadratic form must be square");
  const Matrix sym = 0.5 * (a + a.transpose());
  return solve_qp(sym, Vector::Zero(a.rows()), 0.0, opts);
}

QpResult project_convex_hull(const Matrix& b, const Vector& c, const QpOptions& opts) {
  require(b.rows() == c.size(), "hull generators and target differ in dimension");
  const Matrix gram = b.transpose() * b;
  const Vector lin = -2.0 * (b.transpose() * c);
  return solve_qp(0.5 * (gram + gram.transpose()), lin, c.squaredNorm(), opts);
}

}  // namespace lotkit
