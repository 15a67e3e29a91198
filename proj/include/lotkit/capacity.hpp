#pragma once

#include "lotkit/common.hpp"
#include "lotkit/measures.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

namespace lotkit {

/// Default resolution of MonotoneMap1D grids.
inline constexpr Eigen::Index kMonotoneGrid = 10000;

/// 1/192, the lower bound on the L1(U(C0)) distance between any convex
/// combination of vertex maps and grad phi0.
inline constexpr double kGapBound = 1.0 / 192.0;

/// 1[x >= a] on [0, 1].
double extreme_map_1d(double a, double x);

/// Nondecreasing map [0,1] -> [0,1] stored by its values on the grid j/N, j = 0..N.
/// Between grid points it is extended as a right-continuous step function.
class MonotoneMap1D {
 public:
  MonotoneMap1D() = default;
  explicit MonotoneMap1D(Vector values);

  static MonotoneMap1D from_function(const std::function<double(double)>& f, Eigen::Index n = kMonotoneGrid);
  /// The right-continuous quantile function of a measure supported in [0, 1],
  /// i.e. the monotone map pushing U[0,1] onto it.
  static MonotoneMap1D quantile_of(const DiscreteMeasure& target, Eigen::Index n = kMonotoneGrid);

  const Vector& values() const { return values_; }
  Eigen::Index intervals() const { return values_.size() - 1; }
  double grid_point(Eigen::Index j) const { return static_cast<double>(j) / static_cast<double>(intervals()); }
  double operator()(double x) const;

 private:
  Vector values_;
};

/// Atom at each grid point with the jump of T there, plus the remaining mass at 1.
CoefficientMeasure coeff_measure_from_map(const MonotoneMap1D& t);

/// (sum_j mass_j 1[x >= a_j]) pushed forward from the midpoint grid (j + 1/2)/n.
DiscreteMeasure lbcm_1d_synthesize(const CoefficientMeasure& coeff, Eigen::Index n_base);

/// Offsets b of the piecewise-affine potential max_i <v_i, x> + b_i with
/// v1 = (0,0), v2 = (0,1), v3 = (1,0).
struct VertexMapParams {
  std::array<double, 3> b{0.0, 0.0, 0.0};
};

/// argmax_i <v_i, x> + b_i (lowest index on ties) for x in the triangle C0.
Eigen::Vector2d vertex_map_2d(const VertexMapParams& params, const Eigen::Vector2d& x);

/// Gradient of phi0(x, y) = x^2 / (4 (2 - y)).
Eigen::Vector2d grad_phi0(double x, double y);

struct VertexCombo {
  std::vector<double> weights;
  std::vector<VertexMapParams> maps;
};

struct GapEstimate {
  double gap = 0.0;
  double std_error = 0.0;
};

/// Monte-Carlo estimate of the integral over U(C0) of |sum w_i T_i - grad phi0|.
GapEstimate counterexample_gap(const VertexCombo& combo, Eigen::Index n_mc, std::uint64_t seed);
/// The same on a fixed sample of points (rows).
GapEstimate counterexample_gap(const VertexCombo& combo, const PointMatrix& points);

/// Random combo: b entries standard normal, weights uniform on the simplex.
VertexCombo random_vertex_combo(Eigen::Index atoms, std::uint64_t seed);

struct GapSearchConfig {
  int restarts = 100;
  int atoms = 30;
  int local_steps = 150;
  Eigen::Index n_fit = 4000;
  Eigen::Index n_mc = 200000;
  std::uint64_t seed = 0;
};

struct GapSearchResult {
  VertexCombo best;
  /// Gap of the best combo on a fresh Monte-Carlo sample.
  GapEstimate best_gap;
  /// Independent re-estimate of every restart's final combo.
  std::vector<GapEstimate> restart_gaps;
};

/// Least-squares search for a combo close to grad phi0: weights by projection
/// onto the convex hull of the sampled maps, offsets by random local search.
GapSearchResult search_min_gap(const GapSearchConfig& cfg);

}  // namespace lotkit
