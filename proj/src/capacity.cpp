#include "lotkit/capacity.hpp"

#include "lotkit/parallel.hpp"
#include "lotkit/sampling.hpp"
#include "lotkit/simplex_opt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lotkit {
namespace {

constexpr double kTriangleTol = 1e-12;
constexpr double kMonotoneTol = 1e-12;

// Columns 2i, 2i+1 of the result hold the images of map i, flattened as (x..., y...).
Vector vertex_images(const VertexMapParams& p, const PointMatrix& pts) {
  const Eigen::Index n = pts.rows();
  Vector out(2 * n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Vector2d v = vertex_map_2d(p, pts.row(k).transpose());
    out[k] = v[0];
    out[n + k] = v[1];
  }
  return out;
}

Vector flat_grad(const PointMatrix& pts) {
  const Eigen::Index n = pts.rows();
  Vector out(2 * n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Vector2d g = grad_phi0(pts(k, 0), pts(k, 1));
    out[k] = g[0];
    out[n + k] = g[1];
  }
  return out;
}

}  // namespace

double extreme_map_1d(double a, double x) {
  require(a >= 0.0 && a <= 1.0, "a must lie in [0, 1]");
  require(x >= 0.0 && x <= 1.0, "x must lie in [0, 1]");
  return x >= a ? 1.0 : 0.0;
}

MonotoneMap1D::MonotoneMap1D(Vector values) : values_(std::move(values)) {
  require(values_.size() >= 2, "monotone map needs at least two grid points");
  for (Eigen::Index j = 0; j < values_.size(); ++j) {
    require(std::isfinite(values_[j]), "monotone map values must be finite");
    require(values_[j] >= -kMonotoneTol && values_[j] <= 1.0 + kMonotoneTol, "monotone map values must lie in [0, 1]");
    if (j > 0 && values_[j] < values_[j - 1] - kMonotoneTol) throw InvalidArgument("map is not nondecreasing");
    values_[j] = std::clamp(values_[j], 0.0, 1.0);
    if (j > 0) values_[j] = std::max(values_[j], values_[j - 1]);
  }
}

MonotoneMap1D MonotoneMap1D::from_function(const std::function<double(double)>& f, Eigen::Index n) {
  require(n >= 1, "grid needs at least one interval");
  Vector v(n + 1);
  for (Eigen::Index j = 0; j <= n; ++j) v[j] = f(static_cast<double>(j) / static_cast<double>(n));
  return MonotoneMap1D(std::move(v));
}

MonotoneMap1D MonotoneMap1D::quantile_of(const DiscreteMeasure& target, Eigen::Index n) {
  require(target.dim() == 1, "quantile maps are one-dimensional");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(target.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return target.support()(i, 0) < target.support()(j, 0); });
  std::vector<double> xs, cdf;
  double acc = 0.0;
  for (auto i : order) {
    if (!(target.weights()[i] > 0.0)) continue;
    acc += target.weights()[i];
    xs.push_back(target.support()(i, 0));
    cdf.push_back(acc);
  }
  require(xs.front() >= 0.0 && xs.back() <= 1.0, "target must be supported in [0, 1]");
  Vector v(n + 1);
  // right-continuous inverse: smallest atom whose CDF exceeds u
  std::size_t k = 0;
  for (Eigen::Index j = 0; j <= n; ++j) {
    const double u = static_cast<double>(j) / static_cast<double>(n);
    while (k + 1 < xs.size() && cdf[k] <= u + 1e-12) ++k;
    v[j] = xs[k];
  }
  return MonotoneMap1D(std::move(v));
}

double MonotoneMap1D::operator()(double x) const {
  require(x >= 0.0 && x <= 1.0, "x must lie in [0, 1]");
  const auto n = intervals();
  const auto j = std::min<Eigen::Index>(n, static_cast<Eigen::Index>(std::floor(x * static_cast<double>(n))));
  return values_[j];
}

CoefficientMeasure coeff_measure_from_map(const MonotoneMap1D& t) {
  const Vector& v = t.values();
  const Eigen::Index n = t.intervals();
  std::vector<double> locs, masses;
  double prev = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double jump = v[j] - prev;
    prev = v[j];
    if (jump > 0.0) {
      locs.push_back(t.grid_point(j));
      masses.push_back(jump);
    }
  }
  // the jump at the last grid point and the mass above T(1) both sit at 1
  const double top = 1.0 - prev;
  if (top > 0.0) {
    locs.push_back(1.0);
    masses.push_back(top);
  }
  return CoefficientMeasure(std::move(locs), std::move(masses));
}

DiscreteMeasure lbcm_1d_synthesize(const CoefficientMeasure& coeff, Eigen::Index n_base) {
  require(n_base >= 1, "n_base must be positive");
  std::vector<std::size_t> order(coeff.locations.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return coeff.locations[i] < coeff.locations[j]; });
  PointMatrix pts(n_base, 1);
  std::size_t k = 0;
  double acc = 0.0;
  for (Eigen::Index j = 0; j < n_base; ++j) {
    const double x = (static_cast<double>(j) + 0.5) / static_cast<double>(n_base);
    while (k < order.size() && coeff.locations[order[k]] <= x) acc += coeff.masses[order[k++]];
    pts(j, 0) = std::min(acc, 1.0);
  }
  return DiscreteMeasure::uniform(std::move(pts));
}

Eigen::Vector2d vertex_map_2d(const VertexMapParams& params, const Eigen::Vector2d& x) {
  if (!(x[0] >= -kTriangleTol && x[1] >= -kTriangleTol && x[0] + x[1] <= 1.0 + kTriangleTol))
    throw InvalidArgument("point outside the triangle");
  for (double b : params.b) require(std::isfinite(b), "vertex offsets must be finite");
  const double s1 = params.b[0];
  const double s2 = x[1] + params.b[1];
  const double s3 = x[0] + params.b[2];
  if (s1 >= s2 && s1 >= s3) return {0.0, 0.0};
  if (s2 >= s3) return {0.0, 1.0};
  return {1.0, 0.0};
}

Eigen::Vector2d grad_phi0(double x, double y) {
  if (!(y < 2.0)) throw InvalidArgument("grad_phi0 needs y < 2");
  const double s = 2.0 - y;
  return {x / (2.0 * s), x * x / (4.0 * s * s)};
}

GapEstimate counterexample_gap(const VertexCombo& combo, const PointMatrix& points) {
  require(!combo.maps.empty(), "combo has no maps");
  require(combo.weights.size() == combo.maps.size(), "combo weights and maps differ in length");
  const SimplexWeights w(Eigen::Map<const Vector>(combo.weights.data(), static_cast<Eigen::Index>(combo.weights.size())));
  const Eigen::Index n = points.rows();
  require(n >= 2, "need at least two Monte-Carlo points");
  Vector norms(n);
  const Eigen::Index chunk = 4096;
  const auto chunks = static_cast<std::size_t>((n + chunk - 1) / chunk);
  parallel_for(chunks, [&](std::size_t c) {
    const Eigen::Index start = static_cast<Eigen::Index>(c) * chunk;
    const Eigen::Index end = std::min(n, start + chunk);
    for (Eigen::Index k = start; k < end; ++k) {
      const Eigen::Vector2d x = points.row(k).transpose();
      Eigen::Vector2d t = Eigen::Vector2d::Zero();
      for (std::size_t i = 0; i < combo.maps.size(); ++i)
        t += w[static_cast<Eigen::Index>(i)] * vertex_map_2d(combo.maps[i], x);
      norms[k] = (t - grad_phi0(x[0], x[1])).norm();
    }
  });
  GapEstimate out;
  out.gap = norms.mean();
  const double var = (norms.array() - out.gap).square().sum() / static_cast<double>(n - 1);
  out.std_error = std::sqrt(var / static_cast<double>(n));
  return out;
}

GapEstimate counterexample_gap(const VertexCombo& combo, Eigen::Index n_mc, std::uint64_t seed) {
  require(n_mc >= 1000, "n_mc must be at least 1000");
  return counterexample_gap(combo, sample_uniform_triangle(n_mc, seed).support());
}

VertexCombo random_vertex_combo(Eigen::Index atoms, std::uint64_t seed) {
  require(atoms >= 1, "combo needs at least one atom");
  Rng rng(seed);
  VertexCombo combo;
  for (Eigen::Index i = 0; i < atoms; ++i) {
    VertexMapParams p;
    for (double& b : p.b) b = rng.normal();
    combo.maps.push_back(p);
  }
  const SimplexWeights w = sample_simplex_uniform(atoms, rng);
  combo.weights.assign(w.values().data(), w.values().data() + atoms);
  return combo;
}

GapSearchResult search_min_gap(const GapSearchConfig& cfg) {
  require(cfg.restarts >= 1 && cfg.atoms >= 1 && cfg.local_steps >= 0, "invalid gap search configuration");
  const PointMatrix fit_pts = sample_uniform_triangle(cfg.n_fit, mix_seed(cfg.seed, 0)).support();
  const Vector target = flat_grad(fit_pts);
  QpOptions qp;
  qp.tol = 1e-8;
  qp.max_iter = 20000;

  GapSearchResult out;
  out.restart_gaps.resize(static_cast<std::size_t>(cfg.restarts));
  std::vector<VertexCombo> finals(static_cast<std::size_t>(cfg.restarts));
  parallel_for(static_cast<std::size_t>(cfg.restarts), [&](std::size_t r) {
    Rng rng(mix_seed(cfg.seed, 1 + r));
    std::vector<VertexMapParams> maps(static_cast<std::size_t>(cfg.atoms));
    Matrix cols(target.size(), cfg.atoms);
    for (Eigen::Index i = 0; i < cfg.atoms; ++i) {
      for (double& b : maps[static_cast<std::size_t>(i)].b) b = rng.normal();
      cols.col(i) = vertex_images(maps[static_cast<std::size_t>(i)], fit_pts);
    }
    QpResult best = project_convex_hull(cols, target, qp);
    double scale = 0.3;
    for (int step = 0; step < cfg.local_steps; ++step) {
      const auto i = static_cast<Eigen::Index>(rng.next_u64() % static_cast<std::uint64_t>(cfg.atoms));
      VertexMapParams trial = maps[static_cast<std::size_t>(i)];
      for (double& b : trial.b) b += scale * rng.normal();
      const Vector saved = cols.col(i);
      cols.col(i) = vertex_images(trial, fit_pts);
      QpResult res = project_convex_hull(cols, target, qp);
      if (res.objective < best.objective) {
        best = std::move(res);
        maps[static_cast<std::size_t>(i)] = trial;
      } else {
        cols.col(i) = saved;
        scale = std::max(0.02, scale * 0.98);
      }
    }
    VertexCombo combo;
    combo.maps = maps;
    combo.weights.assign(best.lambda.values().data(), best.lambda.values().data() + cfg.atoms);
    finals[r] = std::move(combo);
  });
  // Fresh points for the final estimates, so the search cannot overfit its own sample.
  const PointMatrix eval_pts = sample_uniform_triangle(cfg.n_mc, mix_seed(cfg.seed, 1u << 20)).support();
  std::size_t best_r = 0;
  for (std::size_t r = 0; r < finals.size(); ++r) {
    out.restart_gaps[r] = counterexample_gap(finals[r], eval_pts);
    if (out.restart_gaps[r].gap < out.restart_gaps[best_r].gap) best_r = r;
  }
  out.best = finals[best_r];
  out.best_gap = out.restart_gaps[best_r];
  return out;
}

}  // namespace lotkit
