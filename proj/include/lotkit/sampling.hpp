#pragma once

#include "lotkit/common.hpp"
#include "lotkit/measures.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace lotkit {

/// Seeded generator. Identical seeds give identical streams.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  std::uint64_t next_u64() { return engine_(); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// Seed for the i-th independent trial derived from a base seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) { return seed + index; }

/// Decorrelated sub-stream seed (splitmix64 finalizer).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// n draws from N(mean, cov), via the Cholesky factor of cov.
DiscreteMeasure sample_gaussian(const Vector& mean, const Matrix& cov, Eigen::Index n,
                                std::uint64_t seed);

/// Uniform point of the (m-1)-simplex from sorted-uniform spacings.
SimplexWeights sample_simplex_uniform(Eigen::Index m, std::uint64_t seed);
SimplexWeights sample_simplex_uniform(Eigen::Index m, Rng& rng);

/// Haar-distributed orthogonal matrix (Gaussian QR with sign correction).
Matrix random_orthogonal(Eigen::Index d, Rng& rng);

/// Floor applied to the half-normal diagonal entries of random_covariances.
inline constexpr double kCovarianceFloor = 1e-3;

/// m commuting SPD matrices O^T D_i O sharing one random orthogonal O.
std::vector<Matrix> random_covariances(Eigen::Index m, Eigen::Index d, std::uint64_t seed);

/// n uniform samples on conv{(0,0),(0,1),(1,0)}.
DiscreteMeasure sample_uniform_triangle(Eigen::Index n, std::uint64_t seed);

/// n uniform samples on [lo, hi] (one-dimensional).
DiscreteMeasure sample_uniform_interval(double lo, double hi, Eigen::Index n, std::uint64_t seed);

}  // namespace lotkit
