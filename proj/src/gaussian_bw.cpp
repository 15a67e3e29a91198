#include "lotkit/gaussian_bw.hpp"

#include "lotkit/parallel.hpp"
#include "lotkit/sampling.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace lotkit {
namespace {

constexpr double kSymmetryTol = 1e-10;

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

Matrix eig_power(const Matrix& s, double power) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  Vector ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) ev[i] = std::pow(std::max(ev[i], 0.0), power);
  return symmetrize(es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose());
}

Matrix sqrt_with(const Matrix& s, const SqrtOptions& opts) {
  return opts.method == SqrtMethod::kEigen ? eig_power(s, 0.5) : newton_schulz_sqrt(s, opts.iterations);
}

// One or more rounds of the barycenter fixed point on raw matrices. Weights
// need not lie on the simplex (finite differences step slightly off it).
Matrix fixed_point(const Vector& lambda, const std::vector<SpdMatrix>& sigmas, int iters,
                   const SqrtOptions& sq, bool early_stop, const Matrix* start = nullptr) {
  const auto d = sigmas.front().dim();
  Matrix sigma = Matrix::Zero(d, d);
  if (start) {
    sigma = *start;
  } else {
    for (std::size_t i = 0; i < sigmas.size(); ++i) sigma += lambda[static_cast<Eigen::Index>(i)] * sigmas[i].matrix();
  }
  for (int it = 0; it < iters; ++it) {
    const Matrix root = sqrt_with(sigma, sq);
    const Matrix root_inv = root.inverse();
    Matrix acc = Matrix::Zero(d, d);
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
      const double w = lambda[static_cast<Eigen::Index>(i)];
      if (w == 0.0) continue;
      acc += w * sqrt_with(symmetrize(root * sigmas[i].matrix() * root), sq);
    }
    const Matrix next = symmetrize(root_inv * acc * acc * root_inv);
    const double change = (next - sigma).norm();
    sigma = next;
    if (early_stop && change <= 1e-10 * std::max(1.0, sigma.norm())) break;
  }
  return sigma;
}

void check_family(const SimplexWeights& lambda, const std::vector<SpdMatrix>& sigmas) {
  require(!sigmas.empty(), "need at least one reference covariance");
  require(lambda.size() == static_cast<Eigen::Index>(sigmas.size()), "lambda length does not match references");
  for (const auto& s : sigmas) require(s.dim() == sigmas.front().dim(), "reference covariances differ in dimension");
}

QpOptions tight_qp() {
  QpOptions o;
  o.tol = 1e-15;
  o.max_iter = 500000;
  return o;
}

}  // namespace

SpdMatrix::SpdMatrix(const Matrix& s) {
  require(s.rows() == s.cols() && s.rows() >= 1, "SPD matrix must be square and nonempty");
  require(s.allFinite(), "SPD matrix must be finite");
  const double norm = s.norm();
  if ((s - s.transpose()).norm() > kSymmetryTol * std::max(norm, 1e-300))
    throw InvalidArgument("matrix not symmetric");
  s_ = symmetrize(s);
  Eigen::LLT<Matrix> llt(s_);
  if (llt.info() != Eigen::Success) throw InvalidArgument("matrix not positive definite");
}

Matrix newton_schulz_sqrt(const Matrix& s, int iterations) {
  require(iterations >= 1, "Newton-Schulz needs at least one iteration");
  const auto d = s.rows();
  const double scale = s.norm();
  // a degenerate truncated iterate propagates as NaN so callers can reject it
  if (!(scale > 0.0) || !std::isfinite(scale)) return Matrix::Constant(d, d, std::numeric_limits<double>::quiet_NaN());
  const Matrix identity = Matrix::Identity(d, d);
  Matrix y = s / scale;
  Matrix z = identity;
  for (int k = 0; k < iterations; ++k) {
    const Matrix t = 0.5 * (3.0 * identity - z * y);
    y = y * t;
    z = t * z;
  }
  return symmetrize(std::sqrt(scale) * y);
}

SpdMatrix sqrtm(const SpdMatrix& s, const SqrtOptions& opts) { return SpdMatrix(sqrt_with(s.matrix(), opts)); }

Matrix gaussian_ot_map(const SpdMatrix& sigma0, const SpdMatrix& sigma1) {
  require(sigma0.dim() == sigma1.dim(), "covariances differ in dimension");
  const Matrix root = eig_power(sigma0.matrix(), 0.5);
  const Matrix root_inv = eig_power(sigma0.matrix(), -0.5);
  const Matrix middle = eig_power(symmetrize(root * sigma1.matrix() * root), 0.5);
  return symmetrize(root_inv * middle * root_inv);
}

SpdMatrix bures_barycenter(const SimplexWeights& lambda, const std::vector<SpdMatrix>& sigmas, int fp_iters) {
  check_family(lambda, sigmas);
  require(fp_iters >= 1, "fp_iters must be positive");
  return SpdMatrix(fixed_point(lambda.values(), sigmas, fp_iters, SqrtOptions{}, true));
}

SpdMatrix lbcm_covariance(const SimplexWeights& lambda, const SpdMatrix& sigma0,
                          const std::vector<SpdMatrix>& sigmas) {
  check_family(lambda, sigmas);
  const auto d = sigma0.dim();
  Matrix combined = Matrix::Zero(d, d);
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    const double w = lambda[static_cast<Eigen::Index>(i)];
    if (w != 0.0) combined += w * gaussian_ot_map(sigma0, sigmas[i]);
  }
  return SpdMatrix(symmetrize(combined.transpose() * sigma0.matrix() * combined));
}

Matrix lbcm_gram_gaussian(const SpdMatrix& sigma0, const std::vector<SpdMatrix>& sigmas, const SpdMatrix& target) {
  require(!sigmas.empty(), "need at least one reference covariance");
  const Matrix c_target = gaussian_ot_map(sigma0, target);
  std::vector<Matrix> diffs;
  for (const auto& s : sigmas) diffs.push_back(gaussian_ot_map(sigma0, s) - c_target);
  const auto m = static_cast<Eigen::Index>(sigmas.size());
  Matrix a(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i; j < m; ++j) {
      const double v = (diffs[static_cast<std::size_t>(i)] * sigma0.matrix() * diffs[static_cast<std::size_t>(j)]).trace();
      a(i, j) = v;
      a(j, i) = v;
    }
  return a;
}

Matrix bcm_gram_gaussian(const SpdMatrix& target, const std::vector<SpdMatrix>& sigmas) {
  require(!sigmas.empty(), "need at least one reference covariance");
  const auto d = target.dim();
  std::vector<Matrix> disp;
  for (const auto& s : sigmas) disp.push_back(gaussian_ot_map(target, s) - Matrix::Identity(d, d));
  const auto m = static_cast<Eigen::Index>(sigmas.size());
  Matrix a(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i; j < m; ++j) {
      const double v = (disp[static_cast<std::size_t>(i)] * target.matrix() * disp[static_cast<std::size_t>(j)]).trace();
      a(i, j) = v;
      a(j, i) = v;
    }
  return a;
}

double mle_loss(const Vector& lambda, const SpdMatrix& sigma_emp, const std::vector<SpdMatrix>& sigmas,
                const MleConfig& cfg) {
  // started at the empirical covariance, as in the truncated loss of the MLE
  const Matrix bc = fixed_point(lambda, sigmas, cfg.fp_iters,
                                SqrtOptions{SqrtMethod::kNewtonSchulz, cfg.sq_iters}, false, &sigma_emp.matrix());
  Eigen::LLT<Matrix> llt(bc);
  if (llt.info() != Eigen::Success) return std::numeric_limits<double>::quiet_NaN();
  const Matrix l = llt.matrixL();
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) logdet += 2.0 * std::log(l(i, i));
  return llt.solve(sigma_emp.matrix()).trace() + logdet;
}

MleResult mle_lambda(const SpdMatrix& sigma_emp, const std::vector<SpdMatrix>& sigmas, const MleConfig& cfg) {
  require(!sigmas.empty(), "need at least one reference covariance");
  require(cfg.eta > 0.0 && cfg.max_iters >= 1 && cfg.fp_iters >= 1 && cfg.sq_iters >= 1 && cfg.fd_step > 0.0,
          "MLE parameters must be positive");
  const auto m = static_cast<Eigen::Index>(sigmas.size());
  MleResult out;
  Vector lambda = Vector::Constant(m, 1.0 / static_cast<double>(m));
  auto loss_at = [&](const Vector& l) {
    const double v = mle_loss(l, sigma_emp, sigmas, cfg);
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "MLE loss is not finite at lambda = [" << l.transpose() << "]";
      throw NumericalError(msg.str());
    }
    return v;
  };
  double current = loss_at(lambda);
  out.losses.push_back(current);
  if (m == 1) {
    out.lambda = SimplexWeights(lambda);
    return out;
  }
  for (int it = 0; it < cfg.max_iters; ++it) {
    out.iterations = it + 1;
    Vector grad(m);
    for (Eigen::Index k = 0; k < m; ++k) {
      Vector up = lambda, down = lambda;
      up[k] += cfg.fd_step;
      down[k] -= cfg.fd_step;
      grad[k] = (loss_at(up) - loss_at(down)) / (2.0 * cfg.fd_step);
    }
    // Steps that would raise the loss are retried with half the step size.
    double step = cfg.eta;
    bool accepted = false;
    Vector candidate;
    double candidate_loss = current;
    for (int halving = 0; halving < 30; ++halving, step *= 0.5) {
      candidate = project_simplex_raw(lambda - step * grad);
      if ((candidate - lambda).norm() <= 1e-8) break;
      candidate_loss = mle_loss(candidate, sigma_emp, sigmas, cfg);
      if (std::isfinite(candidate_loss) && candidate_loss <= current) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    const double moved = (candidate - lambda).norm();
    lambda = candidate;
    current = candidate_loss;
    out.losses.push_back(current);
    if (moved <= 1e-8) break;
  }
  out.lambda = SimplexWeights(lambda);
  return out;
}

CovarianceEstimate estimate_covariance_bcm(const SpdMatrix& sigma_emp, const std::vector<SpdMatrix>& sigmas) {
  const QpResult qp = min_quadratic_simplex(bcm_gram_gaussian(sigma_emp, sigmas), tight_qp());
  return {qp.lambda, bures_barycenter(qp.lambda, sigmas)};
}

CovarianceEstimate estimate_covariance_lbcm(const SpdMatrix& sigma_emp, const std::vector<SpdMatrix>& sigmas,
                                            const SpdMatrix& sigma0) {
  const QpResult qp = min_quadratic_simplex(lbcm_gram_gaussian(sigma0, sigmas, sigma_emp), tight_qp());
  return {qp.lambda, lbcm_covariance(qp.lambda, sigma0, sigmas)};
}

CovarianceEstimate estimate_covariance_mle(const SpdMatrix& sigma_emp, const std::vector<SpdMatrix>& sigmas,
                                           const MleConfig& cfg) {
  const MleResult r = mle_lambda(sigma_emp, sigmas, cfg);
  return {r.lambda, bures_barycenter(r.lambda, sigmas)};
}

std::vector<CovResultRow> run_covariance_experiment(const CovExperimentConfig& cfg) {
  require(cfg.m >= 1 && cfg.d >= 1, "experiment needs m >= 1 and d >= 1");
  require(cfg.trials >= 1, "experiment needs at least one trial");
  require(!cfg.n_grid.empty(), "experiment needs a nonempty n_grid");
  for (long n : cfg.n_grid) require(n > cfg.d, "each n must exceed d so the empirical covariance is invertible");
  for (const auto& method : cfg.methods)
    require(method == "empirical" || method == "bcm" || method == "lbcm" || method == "mle",
            "unknown method '" + method + "'");

  const std::size_t per_trial = cfg.n_grid.size() * cfg.methods.size();
  std::vector<CovResultRow> rows(static_cast<std::size_t>(cfg.trials) * per_trial);
  parallel_for(static_cast<std::size_t>(cfg.trials), [&](std::size_t trial) {
    const std::uint64_t trial_seed = derive_seed(cfg.seed, trial);
    std::vector<SpdMatrix> sigmas;
    for (const auto& s : random_covariances(cfg.m, cfg.d, mix_seed(trial_seed, 0))) sigmas.emplace_back(s);
    const SimplexWeights lambda = sample_simplex_uniform(cfg.m, mix_seed(trial_seed, 1));
    const SpdMatrix truth = bures_barycenter(lambda, sigmas, 1000);
    const SpdMatrix identity(Matrix::Identity(cfg.d, cfg.d));

    for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni) {
      const long n = cfg.n_grid[ni];
      const DiscreteMeasure sample =
          sample_gaussian(Vector::Zero(cfg.d), truth.matrix(), n, mix_seed(trial_seed, 2 + ni));
      const Matrix emp_raw = sample.support().transpose() * sample.support() / static_cast<double>(n);
      const SpdMatrix emp(0.5 * (emp_raw + emp_raw.transpose()));
      for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
        const auto& method = cfg.methods[mi];
        const auto start = std::chrono::steady_clock::now();
        CovResultRow row;
        row.method = method;
        row.trial = static_cast<int>(trial);
        row.n = n;
        if (method == "empirical") {
          row.cov_error_fro = (emp.matrix() - truth.matrix()).norm();
          row.lambda_error_l2 = std::numeric_limits<double>::quiet_NaN();
        } else {
          CovarianceEstimate est = method == "bcm"    ? estimate_covariance_bcm(emp, sigmas)
                                   : method == "lbcm" ? estimate_covariance_lbcm(emp, sigmas, identity)
                                                      : estimate_covariance_mle(emp, sigmas, cfg.mle);
          row.cov_error_fro = (est.sigma.matrix() - truth.matrix()).norm();
          row.lambda_error_l2 = (est.lambda.values() - lambda.values()).norm();
        }
        if (cfg.record_timing)
          row.wall_time_ms =
              std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        rows[trial * per_trial + ni * cfg.methods.size() + mi] = row;
      }
    }
  });
  return rows;
}

std::string covariance_results_csv(const std::vector<CovResultRow>& rows) {
  std::string out = "method,trial,n,cov_error_fro,lambda_error_l2,wall_time_ms\n";
  for (const auto& r : rows) {
    out += r.method + "," + std::to_string(r.trial) + "," + std::to_string(r.n) + "," +
           format_double(r.cov_error_fro) + "," + format_double(r.lambda_error_l2) + "," +
           format_double(r.wall_time_ms) + "\n";
  }
  return out;
}

}  // namespace lotkit
