#include "lotkit/eot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace lotkit {
namespace {

// Scalings leaving [exp(-50), exp(50)] are folded back into the potentials.
constexpr double kAbsorbLog = 50.0;
constexpr Eigen::Index kBlockRows = 512;

Vector safe_log(const Vector& w) {
  Vector out(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i)
    out[i] = w[i] > 0.0 ? std::log(w[i]) : -std::numeric_limits<double>::infinity();
  return out;
}

// Row-wise log-sum-exp of (offset_j + (pot_j - c_ij) / eps) against the rows of x.
Vector softmin_rows(const PointMatrix& x, const PointMatrix& y, const Vector& log_w_y,
                    const Vector& pot_y, double eps) {
  Vector out(x.rows());
  const Eigen::RowVectorXd shift = (log_w_y + pot_y / eps).transpose();
  for (Eigen::Index start = 0; start < x.rows(); start += kBlockRows) {
    const Eigen::Index rows = std::min(kBlockRows, x.rows() - start);
    Matrix z = -half_squared_cost(x.middleRows(start, rows), y) / eps;
    z.rowwise() += shift;
    for (Eigen::Index r = 0; r < rows; ++r) {
      const double mx = z.row(r).maxCoeff();
      if (!std::isfinite(mx)) {
        out[start + r] = mx;
        continue;
      }
      out[start + r] = mx + std::log((z.row(r).array() - mx).exp().sum());
    }
  }
  return out;
}

Matrix build_kernel(const PointMatrix& x, const PointMatrix& y, const Vector& fbar,
                    const Vector& gbar, double eps) {
  Matrix k = -half_squared_cost(x, y);
  k.colwise() += fbar;
  k.rowwise() += gbar.transpose();
  return (k / eps).array().exp().matrix();
}

bool in_range(const Vector& s) {
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (!(s[i] > 0.0) || !std::isfinite(s[i])) return false;
  }
  return true;
}

bool needs_absorb(const Vector& s) {
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (std::abs(std::log(s[i])) > kAbsorbLog) return true;
  return false;
}

}  // namespace

Matrix half_squared_cost(const PointMatrix& x, const PointMatrix& y) {
  require(x.cols() == y.cols(), "point sets have different dimensions");
  const Vector xn = x.rowwise().squaredNorm();
  const Vector yn = y.rowwise().squaredNorm();
  Matrix c = -(x * y.transpose());
  c.colwise() += 0.5 * xn;
  c.rowwise() += 0.5 * yn.transpose();
  return c.cwiseMax(0.0);
}

double epsilon_schedule(long n, long d, double alpha_bar, double constant) {
  require(n >= 1 && d >= 1, "epsilon_schedule needs n >= 1 and d >= 1");
  require(alpha_bar >= 1.0 && alpha_bar <= 3.0, "alpha_bar must lie in [1, 3]");
  require(constant > 0.0, "epsilon constant must be positive");
  return constant * std::pow(static_cast<double>(n), -1.0 / (static_cast<double>(d) + alpha_bar + 1.0));
}

namespace {

// Sinkhorn at one epsilon, warm-started from g0. With `strict` false a
// stage that runs out of iterations returns its current iterate.
DualPotentials sinkhorn_stage(const DiscreteMeasure& source, const DiscreteMeasure& target, double eps,
                              int max_iter, double tol, const Vector& g0, bool strict) {
  const PointMatrix& x = source.support();
  const PointMatrix& y = target.support();
  const Vector& a = source.weights();
  const Vector& b = target.weights();
  const Vector log_a = safe_log(a);
  const Vector log_b = safe_log(b);

  // One exact log-domain sweep sets the anchors; afterwards the updates run on
  // scalings u, v of the stabilized kernel, i.e. f = fbar + eps log u.
  Vector fbar = -eps * softmin_rows(x, y, log_b, g0, eps);
  Vector gbar = -eps * softmin_rows(y, x, log_a, fbar, eps);
  Matrix kernel = build_kernel(x, y, fbar, gbar, eps);
  Vector u = Vector::Ones(x.rows());
  Vector v = Vector::Ones(y.rows());

  DualPotentials out;
  out.epsilon = eps;
  auto potentials = [&](Vector& f, Vector& g) {
    f = fbar + eps * u.array().log().matrix();
    g = gbar + eps * v.array().log().matrix();
  };
  auto absorb_log_domain = [&] {
    Vector f, g;
    potentials(f, g);
    fbar = -eps * softmin_rows(x, y, log_b, g, eps);
    gbar = -eps * softmin_rows(y, x, log_a, fbar, eps);
    kernel = build_kernel(x, y, fbar, gbar, eps);
    u.setOnes();
    v.setOnes();
  };

  double violation = std::numeric_limits<double>::infinity();
  int it = 0;
  for (;; ++it) {
    Vector s = kernel * b.cwiseProduct(v);
    if (!in_range(s)) {
      absorb_log_domain();
      s = kernel * b;
    }
    violation = (a.array() * (1.0 - u.array() * s.array()).abs()).sum();
    {
      Vector f, g;
      potentials(f, g);
      out.objective_trace.push_back(a.dot(f) + b.dot(g));
    }
    if (violation <= tol || it >= max_iter) break;

    u = s.cwiseInverse();
    Vector t = kernel.transpose() * a.cwiseProduct(u);
    if (!in_range(t)) {
      absorb_log_domain();
      continue;
    }
    v = t.cwiseInverse();
    if (needs_absorb(u) || needs_absorb(v)) {
      fbar += eps * u.array().log().matrix();
      gbar += eps * v.array().log().matrix();
      kernel = build_kernel(x, y, fbar, gbar, eps);
      u.setOnes();
      v.setOnes();
    }
  }
  out.iterations = it;
  out.marginal_violation = violation;
  if (strict && !(violation <= tol)) {
    throw NumericalError("Sinkhorn did not converge: marginal violation " + format_double(violation) +
                         " after " + std::to_string(it) + " iterations");
  }
  potentials(out.f, out.g);
  const double shift = a.dot(out.f);
  out.f.array() -= shift;
  out.g.array() += shift;
  return out;
}

}  // namespace

DualPotentials solve_dual(const DiscreteMeasure& source, const DiscreteMeasure& target,
                          const EotConfig& cfg) {
  if (!(cfg.epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  require(cfg.tol > 0.0, "tolerance must be positive");
  require(cfg.max_iter >= 1, "max_iter must be positive");
  require(source.dim() == target.dim(), "source and target live in different dimensions");
  // Epsilon scaling: warm starts from a geometric sequence of larger epsilons
  // when the target epsilon is small against the cost range.
  const double range = half_squared_cost(source.support(), target.support()).maxCoeff();
  Vector g = Vector::Zero(target.size());
  int spent = 0;
  for (double e = range / 4.0; e > 4.0 * cfg.epsilon && spent < cfg.max_iter; e /= 4.0) {
    const DualPotentials stage =
        sinkhorn_stage(source, target, e, std::min(200, cfg.max_iter - spent), std::max(cfg.tol, 1e-3), g, false);
    spent += stage.iterations;
    g = stage.g;
  }
  DualPotentials out = sinkhorn_stage(source, target, cfg.epsilon, std::max(1, cfg.max_iter - spent), cfg.tol, g, true);
  out.iterations += spent;
  return out;
}

Matrix entropic_plan(const DualPotentials& pot, const DiscreteMeasure& source,
                     const DiscreteMeasure& target) {
  require(pot.f.size() == source.size() && pot.g.size() == target.size(),
          "potentials do not match the measures");
  Matrix plan = build_kernel(source.support(), target.support(), pot.f, pot.g, pot.epsilon);
  plan = source.weights().asDiagonal() * plan * target.weights().asDiagonal();
  return plan;
}

double dual_objective(const DualPotentials& pot, const DiscreteMeasure& source,
                      const DiscreteMeasure& target) {
  const Matrix plan = entropic_plan(pot, source, target);
  return source.weights().dot(pot.f) + target.weights().dot(pot.g) - pot.epsilon * plan.sum() +
         pot.epsilon;
}

PointMatrix entropic_map(const DualPotentials& pot, const DiscreteMeasure& target,
                         const PointMatrix& xs) {
  require(pot.g.size() == target.size(), "potentials do not match the target");
  require(xs.cols() == target.dim(), "query points have the wrong dimension");
  const double eps = pot.epsilon;
  const PointMatrix& y = target.support();
  const Eigen::RowVectorXd shift = (safe_log(target.weights()) + pot.g / eps).transpose();
  PointMatrix out(xs.rows(), xs.cols());
  for (Eigen::Index start = 0; start < xs.rows(); start += kBlockRows) {
    const Eigen::Index rows = std::min(kBlockRows, xs.rows() - start);
    Matrix z = -half_squared_cost(xs.middleRows(start, rows), y) / eps;
    z.rowwise() += shift;
    for (Eigen::Index r = 0; r < rows; ++r) {
      const double mx = z.row(r).maxCoeff();
      if (!std::isfinite(mx)) throw NumericalError("numerically degenerate map");
      z.row(r) = (z.row(r).array() - mx).exp().matrix();
      const double total = z.row(r).sum();
      if (!(total > 0.0) || !std::isfinite(total)) throw NumericalError("numerically degenerate map");
      z.row(r) /= total;
    }
    out.middleRows(start, rows) = z * y;
  }
  return out;
}

Vector entropic_map_at(const DualPotentials& pot, const DiscreteMeasure& target, const Vector& x) {
  PointMatrix row = x.transpose();
  return entropic_map(pot, target, row).row(0).transpose();
}

}  // namespace lotkit
