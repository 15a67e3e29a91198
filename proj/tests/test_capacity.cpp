#include "doctest.h"

#include "lotkit/capacity.hpp"
#include "lotkit/exact_ot.hpp"
#include "lotkit/sampling.hpp"

#include <cmath>

using namespace lotkit;

namespace {

DiscreteMeasure atoms(std::vector<double> xs, std::vector<double> ws) {
  PointMatrix s(static_cast<Eigen::Index>(xs.size()), 1);
  Vector w(static_cast<Eigen::Index>(ws.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    s(static_cast<Eigen::Index>(i), 0) = xs[i];
    w[static_cast<Eigen::Index>(i)] = ws[i];
  }
  return DiscreteMeasure(s, w);
}

double mass_at(const DiscreteMeasure& m, double x) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < m.size(); ++i)
    if (std::abs(m.support()(i, 0) - x) < 1e-12) acc += m.weights()[i];
  return acc;
}

}  // namespace

TEST_CASE("extreme maps") {
  CHECK(extreme_map_1d(0.0, 0.0) == 1.0);
  CHECK(extreme_map_1d(1.0, 0.99) == 0.0);
  CHECK_THROWS(extreme_map_1d(1.5, 0.2));
  // a = 0.3 pushes the uniform grid to 0.3 delta_0 + 0.7 delta_1
  const auto m = lbcm_1d_synthesize(CoefficientMeasure({0.3}, {1.0}), 1000);
  CHECK(mass_at(m, 0.0) == doctest::Approx(0.3));
  CHECK(mass_at(m, 1.0) == doctest::Approx(0.7));
}

TEST_CASE("two extreme maps combine into a two-step map") {
  for (double w : {0.25, 0.5, 0.9}) {
    const auto m = lbcm_1d_synthesize(CoefficientMeasure({0.2, 0.6}, {w, 1 - w}), 1000);
    CHECK(mass_at(m, 0.0) == doctest::Approx(0.2));
    CHECK(mass_at(m, w) == doctest::Approx(0.4));
    CHECK(mass_at(m, 1.0) == doctest::Approx(0.4));
  }
}

TEST_CASE("coefficient measure from a map") {
  const auto step = MonotoneMap1D::from_function([](double x) { return x >= 0.3 ? 1.0 : 0.0; }, 1000);
  const auto c = coeff_measure_from_map(step);
  REQUIRE(c.locations.size() == 1);
  CHECK(c.locations[0] == 0.3);
  CHECK(c.masses[0] == 1.0);

  const auto zero = coeff_measure_from_map(MonotoneMap1D::from_function([](double) { return 0.0; }, 100));
  REQUIRE(zero.locations.size() == 1);
  CHECK(zero.locations[0] == 1.0);

  const Eigen::Index n = 200;
  const auto ident = coeff_measure_from_map(MonotoneMap1D::from_function([](double x) { return x; }, n));
  CHECK(ident.locations.size() == static_cast<std::size_t>(n));
  for (std::size_t j = 0; j < ident.locations.size(); ++j) {
    CHECK(ident.locations[j] == doctest::Approx(static_cast<double>(j + 1) / n));
    CHECK(ident.masses[j] == doctest::Approx(1.0 / n));
  }
  CHECK_THROWS_AS(MonotoneMap1D::from_function([](double x) { return 1 - x; }, 10), InvalidArgument);
}

TEST_CASE("lbcm_1d_synthesize examples") {
  const auto half = lbcm_1d_synthesize(CoefficientMeasure({0.5}, {1.0}), 100);
  CHECK(mass_at(half, 0.0) == doctest::Approx(0.5));
  const auto two = lbcm_1d_synthesize(CoefficientMeasure({0.25, 0.75}, {0.5, 0.5}), 100);
  CHECK(mass_at(two, 0.0) == doctest::Approx(0.25));
  CHECK(mass_at(two, 0.5) == doctest::Approx(0.5));
  CHECK(mass_at(two, 1.0) == doctest::Approx(0.25));
}

TEST_CASE("round trip through the coefficient measure") {
  std::vector<MonotoneMap1D> family{
      MonotoneMap1D::from_function([](double x) { return x; }),
      MonotoneMap1D::from_function([](double x) { return x < 0.4 ? 0.1 : (x < 0.7 ? 0.5 : 0.95); }),
      MonotoneMap1D::from_function([](double x) { return x < 0.5 ? 0.2 * x : 0.1 + 1.8 * (x - 0.5); }),
      MonotoneMap1D::from_function([](double x) { return x * x; })};
  for (const auto& t : family)
    for (Eigen::Index n : {50, 200, 1000}) {
      const auto synth = lbcm_1d_synthesize(coeff_measure_from_map(t), n);
      PointMatrix direct(n, 1);
      for (Eigen::Index j = 0; j < n; ++j) direct(j, 0) = t((static_cast<double>(j) + 0.5) / static_cast<double>(n));
      CHECK(std::sqrt(quantile_w2_squared_1d(synth, DiscreteMeasure::uniform(direct))) <= 2.0 / static_cast<double>(n));
    }
}

TEST_CASE("quantile maps of targets") {
  const auto target = atoms({0.2, 0.9}, {0.5, 0.5});
  const auto q = MonotoneMap1D::quantile_of(target, 100);
  CHECK(q(0.1) == 0.2);
  CHECK(q(0.7) == 0.9);
  const auto synth = lbcm_1d_synthesize(coeff_measure_from_map(q), 50);
  CHECK(quantile_w2_squared_1d(synth, target) <= 1e-12);
}

TEST_CASE("vertex maps") {
  VertexMapParams dom;
  dom.b = {10.0, 0.0, 0.0};
  CHECK(vertex_map_2d(dom, {0.3, 0.3}) == Eigen::Vector2d(0, 0));
  CHECK(vertex_map_2d(VertexMapParams{}, {0.9, 0.05}) == Eigen::Vector2d(1, 0));
  CHECK(vertex_map_2d(VertexMapParams{}, {0.0, 0.0}) == Eigen::Vector2d(0, 0));
  CHECK_THROWS_AS(vertex_map_2d(VertexMapParams{}, {0.8, 0.8}), InvalidArgument);
  // images of U(C0) are vertices
  const auto pts = sample_uniform_triangle(2000, 1).support();
  VertexMapParams p;
  p.b = {0.1, -0.2, 0.05};
  for (Eigen::Index k = 0; k < pts.rows(); ++k) {
    const Eigen::Vector2d v = vertex_map_2d(p, pts.row(k).transpose());
    CHECK((v == Eigen::Vector2d(0, 0) || v == Eigen::Vector2d(0, 1) || v == Eigen::Vector2d(1, 0)));
  }
}

TEST_CASE("first image coordinate is nonincreasing along vertical segments") {
  Rng rng(2);
  for (int t = 0; t < 100; ++t) {
    VertexMapParams p;
    for (double& b : p.b) b = rng.normal();
    int violations = 0;
    for (int i = 0; i <= 50; ++i) {
      const double x = i / 50.0;
      double prev = 2.0;
      bool bad = false;
      for (int j = 0; j <= 100; ++j) {
        const double y = (1.0 - x) * j / 100.0;
        const double v = vertex_map_2d(p, {x, y})[0];
        if (v > prev) bad = true;
        prev = v;
      }
      violations += bad ? 1 : 0;
    }
    CHECK(violations <= 1);
  }
}

TEST_CASE("grad phi0 against finite differences") {
  CHECK(grad_phi0(0.0, 0.4) == Eigen::Vector2d(0, 0));
  CHECK(grad_phi0(1.0, 0.0)[0] == doctest::Approx(0.25));
  CHECK(grad_phi0(1.0, 0.0)[1] == doctest::Approx(0.0625));
  auto phi = [](double x, double y) { return x * x / (4 * (2 - y)); };
  const double h = 1e-6;
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j) {
      const double x = i / 19.0 * 0.98, y = (1 - x) * j / 19.0;
      const Eigen::Vector2d g = grad_phi0(x, y);
      CHECK(std::abs(g[0] - (phi(x + h, y) - phi(x - h, y)) / (2 * h)) <= 1e-6);
      CHECK(std::abs(g[1] - (phi(x, y + h) - phi(x, y - h)) / (2 * h)) <= 1e-6);
    }
  CHECK_THROWS(grad_phi0(0.5, 2.0));
}

TEST_CASE("counterexample gap") {
  VertexCombo origin;
  origin.weights = {1.0};
  VertexMapParams p;
  p.b = {10.0, 0.0, 0.0};
  origin.maps = {p};
  const auto g = counterexample_gap(origin, 20000, 1);
  CHECK(g.gap > kGapBound);
  const auto g2 = counterexample_gap(origin, 80000, 1);
  CHECK(g2.std_error == doctest::Approx(g.std_error / 2).epsilon(0.15));
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto combo = random_vertex_combo(1 + static_cast<Eigen::Index>(s % 50), s);
    const auto est = counterexample_gap(combo, 20000, 100 + s);
    CHECK(est.gap >= kGapBound - 3 * est.std_error);
  }
  CHECK_THROWS(counterexample_gap(origin, 10, 1));
}

TEST_CASE("gap search stays above the bound") {
  GapSearchConfig cfg;
  cfg.restarts = 3;
  cfg.local_steps = 30;
  cfg.n_fit = 1000;
  cfg.n_mc = 20000;
  const auto r = search_min_gap(cfg);
  CHECK(r.restart_gaps.size() == 3);
  CHECK(r.best_gap.gap >= kGapBound - 3 * r.best_gap.std_error);
}
