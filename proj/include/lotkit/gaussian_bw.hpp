#pragma once

#include "lotkit/common.hpp"
#include "lotkit/measures.hpp"
#include "lotkit/simplex_opt.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lotkit {

/// Symmetric positive definite matrix. Construction symmetrizes inputs whose
/// asymmetry is below 1e-10 relative Frobenius and rejects everything else
/// that fails a Cholesky factorization.
class SpdMatrix {
 public:
  SpdMatrix() = default;
  explicit SpdMatrix(const Matrix& s);

  const Matrix& matrix() const { return s_; }
  Eigen::Index dim() const { return s_.rows(); }

 private:
  Matrix s_;
};

enum class SqrtMethod { kEigen, kNewtonSchulz };

struct SqrtOptions {
  SqrtMethod method = SqrtMethod::kEigen;
  int iterations = 10;
};

SpdMatrix sqrtm(const SpdMatrix& s, const SqrtOptions& opts = {});

/// Coupled Newton-Schulz iteration on S / |S|_F, rescaled afterwards.
/// Does not validate definiteness; used inside truncated computations.
Matrix newton_schulz_sqrt(const Matrix& s, int iterations);

/// The symmetric matrix C with C sigma0 C = sigma1 (the OT map between
/// centered Gaussians).
Matrix gaussian_ot_map(const SpdMatrix& sigma0, const SpdMatrix& sigma1);

/// Fixed point Sigma <- (sum l_i T_i) Sigma (sum l_i T_i), started at the
/// Euclidean mean, for at most fp_iters rounds.
SpdMatrix bures_barycenter(const SimplexWeights& lambda, const std::vector<SpdMatrix>& sigmas,
                           int fp_iters = 100);

/// (sum l_i C_i) sigma0 (sum l_i C_i) with C_i the map from sigma0 to sigmas[i].
SpdMatrix lbcm_covariance(const SimplexWeights& lambda, const SpdMatrix& sigma0,
                          const std::vector<SpdMatrix>& sigmas);

/// A_ij = tr((C_i - C_t) sigma0 (C_j - C_t)), maps taken from sigma0.
Matrix lbcm_gram_gaussian(const SpdMatrix& sigma0, const std::vector<SpdMatrix>& sigmas,
                          const SpdMatrix& target);

/// A_ij = tr((C_i - I) target (C_j - I)), maps taken from the target.
Matrix bcm_gram_gaussian(const SpdMatrix& target, const std::vector<SpdMatrix>& sigmas);

struct MleConfig {
  double eta = 0.0003;
  int max_iters = 500;
  int fp_iters = 10;
  int sq_iters = 10;
  double fd_step = 1e-5;
};

struct MleResult {
  SimplexWeights lambda;
  /// Loss at the start and after every accepted step.
  std::vector<double> losses;
  int iterations = 0;
};

/// Tr(BC^{-1} S) + log det BC with BC the truncated barycenter at lambda,
/// its fixed point started at S.
double mle_loss(const Vector& lambda, const SpdMatrix& sigma_emp, const std::vector<SpdMatrix>& sigmas,
                const MleConfig& cfg);

MleResult mle_lambda(const SpdMatrix& sigma_emp, const std::vector<SpdMatrix>& sigmas,
                     const MleConfig& cfg = {});

struct CovarianceEstimate {
  SimplexWeights lambda;
  SpdMatrix sigma;
};

CovarianceEstimate estimate_covariance_bcm(const SpdMatrix& sigma_emp, const std::vector<SpdMatrix>& sigmas);
CovarianceEstimate estimate_covariance_lbcm(const SpdMatrix& sigma_emp, const std::vector<SpdMatrix>& sigmas,
                                            const SpdMatrix& sigma0);
CovarianceEstimate estimate_covariance_mle(const SpdMatrix& sigma_emp, const std::vector<SpdMatrix>& sigmas,
                                           const MleConfig& cfg);

struct CovExperimentConfig {
  int m = 10;
  int d = 10;
  std::vector<long> n_grid{100, 1000, 10000};
  int trials = 10;
  std::uint64_t seed = 0;
  std::vector<std::string> methods{"empirical", "bcm", "lbcm", "mle"};
  MleConfig mle;
  bool record_timing = false;
};

struct CovResultRow {
  std::string method;
  int trial = 0;
  long n = 0;
  double cov_error_fro = 0.0;
  /// NaN for the empirical covariance, which has no coordinate.
  double lambda_error_l2 = 0.0;
  double wall_time_ms = 0.0;
};

std::vector<CovResultRow> run_covariance_experiment(const CovExperimentConfig& cfg);

std::string covariance_results_csv(const std::vector<CovResultRow>& rows);

}  // namespace lotkit
