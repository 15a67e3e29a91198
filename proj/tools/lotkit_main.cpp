#include "lotkit/capacity.hpp"
#include "lotkit/eot.hpp"
#include "lotkit/exact_ot.hpp"
#include "lotkit/gaussian_bw.hpp"
#include "lotkit/imaging.hpp"
#include "lotkit/lbcm.hpp"
#include "lotkit/measures.hpp"
#include "lotkit/sampling.hpp"
#include "lotkit/w2bcm.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using json = nlohmann::json;
using namespace lotkit;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

// A JSON object whose keys are checked against an allow-list up front.
class Section {
 public:
  Section(const json& j, std::string where, const std::set<std::string>& allowed) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw InvalidArgument(where_ + ": expected an object");
    for (const auto& item : j_.items())
      if (!allowed.count(item.key())) throw InvalidArgument(where_ + ": unknown key '" + item.key() + "'");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& at(const std::string& key) const {
    if (!has(key)) throw InvalidArgument(path(key) + ": required");
    return j_.at(key);
  }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) const {
    if (!has(key)) return fallback ? *fallback : at(key).get<double>();
    const json& v = j_.at(key);
    if (!v.is_number()) throw InvalidArgument(path(key) + ": expected a number");
    return v.get<double>();
  }

  long integer(const std::string& key, std::optional<long> fallback = std::nullopt) const {
    if (!has(key)) return fallback ? *fallback : at(key).get<long>();
    return as_integer(j_.at(key), path(key));
  }

  std::uint64_t seed(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_unsigned()) throw InvalidArgument(path(key) + ": expected a nonnegative integer");
    return v.get<std::uint64_t>();
  }

  std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt) const {
    if (!has(key)) {
      if (fallback) return *fallback;
      at(key);
    }
    const json& v = j_.at(key);
    if (!v.is_string()) throw InvalidArgument(path(key) + ": expected a string");
    return v.get<std::string>();
  }

  bool flag(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw InvalidArgument(path(key) + ": expected true or false");
    return v.get<bool>();
  }

  const json& array(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_array()) throw InvalidArgument(path(key) + ": expected an array");
    return v;
  }

  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    for (const auto& v : array(key)) {
      if (!v.is_number()) throw InvalidArgument(path(key) + ": expected an array of numbers");
      out.push_back(v.get<double>());
    }
    return out;
  }

  std::vector<long> integers(const std::string& key) const {
    std::vector<long> out;
    for (const auto& v : array(key)) out.push_back(as_integer(v, path(key)));
    return out;
  }

  std::vector<std::string> texts(const std::string& key) const {
    std::vector<std::string> out;
    for (const auto& v : array(key)) {
      if (!v.is_string()) throw InvalidArgument(path(key) + ": expected an array of strings");
      out.push_back(v.get<std::string>());
    }
    return out;
  }

  Section sub(const std::string& key, const std::set<std::string>& allowed) const {
    return Section(at(key), path(key), allowed);
  }

  std::string path(const std::string& key) const { return where_ + "." + key; }

 private:
  static long as_integer(const json& v, const std::string& where) {
    if (!v.is_number_integer()) throw InvalidArgument(where + ": expected an integer");
    return v.get<long>();
  }

  const json& j_;
  std::string where_;
};

struct RunContext {
  json config;
  std::optional<std::uint64_t> seed_override;
  std::filesystem::path out;

  std::uint64_t seed(const Section& s) const { return seed_override ? *seed_override : s.seed("seed", 0); }

  void write(const std::string& name, const std::string& contents) const {
    write_text_file((out / name).string(), contents);
  }
};

json load_config(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument("config '" + path + "' is not valid JSON: " + e.what());
  }
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

std::string matrix_csv(const Matrix& a) {
  std::ostringstream out;
  for (Eigen::Index j = 0; j < a.cols(); ++j) out << (j ? "," : "") << "col_" << j + 1;
  out << "\n";
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) out << (j ? "," : "") << format_double(a(i, j));
    out << "\n";
  }
  return out.str();
}

EotConfig solver_config(const Section& s, double eps) {
  EotConfig cfg;
  cfg.epsilon = eps;
  cfg.max_iter = static_cast<int>(s.integer("max_iter", cfg.max_iter));
  cfg.tol = s.number("tol", cfg.tol);
  require(cfg.epsilon > 0.0 && cfg.max_iter >= 1 && cfg.tol > 0.0, "epsilon, max_iter and tol must be positive");
  return cfg;
}

// ---------------------------------------------------------------- lbcm

DiscreteMeasure mixture(const std::vector<DiscreteMeasure>& refs, const SimplexWeights& lambda) {
  Eigen::Index rows = 0;
  for (std::size_t i = 0; i < refs.size(); ++i)
    if (lambda[static_cast<Eigen::Index>(i)] > 0.0) rows += refs[i].size();
  PointMatrix support(rows, refs.front().dim());
  Vector weights(rows);
  Eigen::Index at = 0;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const double l = lambda[static_cast<Eigen::Index>(i)];
    if (l <= 0.0) continue;
    support.middleRows(at, refs[i].size()) = refs[i].support();
    weights.segment(at, refs[i].size()) = l * refs[i].weights();
    at += refs[i].size();
  }
  return DiscreteMeasure(std::move(support), weights / weights.sum());
}

int cmd_lbcm(const RunContext& ctx) {
  const Section s(ctx.config, "config",
                  {"mode", "model", "references", "target", "base", "base_samples", "epsilon", "lambda", "max_iter",
                   "tol", "seed", "alpha", "k", "max_atoms"});
  const std::string mode = s.text("mode");
  const std::string model = s.text("model", "lbcm");
  require(mode == "analyze" || mode == "synthesize", s.path("mode") + ": expected 'analyze' or 'synthesize'");
  require(model == "lbcm" || model == "w2bcm", s.path("model") + ": expected 'lbcm' or 'w2bcm'");
  const std::uint64_t seed = ctx.seed(s);

  std::vector<DiscreteMeasure> refs;
  for (const auto& path : s.texts("references")) refs.push_back(read_measure_csv(path));
  require(!refs.empty(), s.path("references") + ": need at least one reference");
  const Eigen::Index d = refs.front().dim();
  for (const auto& r : refs) require(r.dim() == d, "references differ in dimension");

  auto base_sample = [&]() {
    if (s.has("base")) {
      auto base = read_measure_csv(s.text("base"));
      require(base.dim() == d, "base and references differ in dimension");
      require(base.size() >= 2, "base sample needs at least two points");
      return base;
    }
    const long n = s.integer("base_samples", 2000);
    require(n >= 1, s.path("base_samples") + ": must be positive");
    return sample_gaussian(Vector::Zero(d), Matrix::Identity(d, d), 2 * n, seed);
  };
  auto epsilon_for = [&](long n) { return s.has("epsilon") ? s.number("epsilon") : epsilon_schedule(n, d, 3.0); };

  if (mode == "analyze") {
    const DiscreteMeasure target = read_measure_csv(s.text("target"));
    require(target.dim() == d, "target and references differ in dimension");
    QpResult qp;
    Matrix gram;
    double eps = 0.0;
    if (model == "lbcm") {
      const auto base = base_sample();
      eps = epsilon_for(base.size() / 2);
      auto est = estimate_lambda(base, refs, target, eps, solver_config(s, eps));
      qp = est.qp;
      gram = est.gram;
    } else {
      eps = epsilon_for(target.size());
      auto est = estimate_lambda_bcm(target, refs, eps, solver_config(s, eps));
      qp = est.qp;
      gram = est.gram;
    }
    json out = {{"model", model},
                {"lambda", vector_json(qp.lambda.values())},
                {"objective", qp.objective},
                {"certificate_gap", qp.certificate_gap},
                {"converged", qp.converged},
                {"epsilon", eps}};
    ctx.write("lambda.json", out.dump(2) + "\n");
    ctx.write("gram.csv", matrix_csv(gram));
    return 0;
  }

  const auto raw = s.numbers("lambda");
  require(static_cast<std::size_t>(raw.size()) == refs.size(), s.path("lambda") + ": length must match references");
  const SimplexWeights lambda(Eigen::Map<const Vector>(raw.data(), static_cast<Eigen::Index>(raw.size())));
  DiscreteMeasure synth;
  if (model == "lbcm") {
    const auto [fit, eval] = split_base_sample(base_sample());
    const double eps = epsilon_for(fit.size());
    synth = synthesize(lambda, make_entropic_problem(fit, eval, refs, std::nullopt, solver_config(s, eps)));
  } else {
    BarycenterConfig bc;
    bc.alpha = s.number("alpha", bc.alpha);
    bc.k = static_cast<int>(s.integer("k", bc.k));
    if (s.has("epsilon")) bc.epsilon = s.number("epsilon");
    const long max_atoms = s.integer("max_atoms", 1500);
    const auto rho0 = subsample_measure(mixture(refs, lambda), max_atoms, seed);
    synth = iterative_barycenter(refs, lambda, rho0, bc).measure;
  }
  ctx.write("synthesis.csv", measure_to_csv(synth));
  return 0;
}

// ---------------------------------------------------------------- cov-experiment

int cmd_cov(const RunContext& ctx) {
  const Section s(ctx.config, "config", {"m", "d", "n_grid", "trials", "seed", "methods", "record_timing", "mle"});
  CovExperimentConfig cfg;
  cfg.m = static_cast<int>(s.integer("m", cfg.m));
  cfg.d = static_cast<int>(s.integer("d", cfg.d));
  if (s.has("n_grid")) cfg.n_grid = s.integers("n_grid");
  cfg.trials = static_cast<int>(s.integer("trials", cfg.trials));
  cfg.seed = ctx.seed(s);
  if (s.has("methods")) cfg.methods = s.texts("methods");
  cfg.record_timing = s.flag("record_timing", false);
  if (s.has("mle")) {
    const Section m = s.sub("mle", {"eta", "max_iters", "fp_iters", "sq_iters", "fd_step"});
    cfg.mle.eta = m.number("eta", cfg.mle.eta);
    cfg.mle.max_iters = static_cast<int>(m.integer("max_iters", cfg.mle.max_iters));
    cfg.mle.fp_iters = static_cast<int>(m.integer("fp_iters", cfg.mle.fp_iters));
    cfg.mle.sq_iters = static_cast<int>(m.integer("sq_iters", cfg.mle.sq_iters));
    cfg.mle.fd_step = m.number("fd_step", cfg.mle.fd_step);
  }
  ctx.write("covariance.csv", covariance_results_csv(run_covariance_experiment(cfg)));
  return 0;
}

// ---------------------------------------------------------------- digits

struct ImageSet {
  std::vector<GridImage> refs;
  std::vector<GridImage> targets;
};

ImageSet load_images(const Section& s) {
  const int sources = static_cast<int>(s.has("idx_file")) + static_cast<int>(s.has("reference_files")) +
                      static_cast<int>(s.has("blobs"));
  require(sources == 1, "config: give exactly one of idx_file, reference_files, blobs");
  ImageSet set;
  if (s.has("idx_file")) {
    const auto all = read_idx_images(s.text("idx_file"));
    auto pick = [&](const std::string& key) {
      std::vector<GridImage> out;
      for (long i : s.integers(key)) {
        require(i >= 0 && i < static_cast<long>(all.size()), s.path(key) + ": index out of range");
        out.push_back(all[static_cast<std::size_t>(i)]);
      }
      return out;
    };
    set.refs = pick("reference_indices");
    set.targets = pick("target_indices");
  } else if (s.has("reference_files")) {
    for (const auto& p : s.texts("reference_files")) set.refs.push_back(image_from_csv(read_text_file(p)));
    for (const auto& p : s.texts("target_files")) set.targets.push_back(image_from_csv(read_text_file(p)));
  } else {
    const Section b = s.sub("blobs", {"size", "sigma", "references", "targets"});
    const long size = b.integer("size", 28);
    const double sigma = b.number("sigma", 2.0);
    require(size >= 1 && sigma > 0.0, b.path("size") + " and sigma must be positive");
    auto centers = [&](const std::string& key) {
      std::vector<GridImage> out;
      for (const auto& c : b.array(key)) {
        if (!c.is_array() || c.size() != 2 || !c[0].is_number() || !c[1].is_number())
          throw InvalidArgument(b.path(key) + ": expected [row, col] pairs");
        out.push_back(blob_image(size, c[0].get<double>(), c[1].get<double>(), sigma));
      }
      return out;
    };
    set.refs = centers("references");
    set.targets = centers("targets");
  }
  require(!set.refs.empty(), "config: need at least one reference image");
  require(!set.targets.empty(), "config: need at least one target image");
  const Eigen::Index d = set.refs.front().size();
  for (const auto* group : {&set.refs, &set.targets})
    for (const auto& img : *group) require(img.size() == d, "all images must have the same size");
  return set;
}

int cmd_digits(const RunContext& ctx) {
  const Section s(ctx.config, "config",
                  {"idx_file", "reference_indices", "target_indices", "reference_files", "target_files", "blobs",
                   "methods", "base", "raster", "block", "epsilon", "max_atoms", "alpha", "k", "max_iter", "tol",
                   "seed", "record_timing"});
  const ImageSet images = load_images(s);
  const Eigen::Index d = images.refs.front().size();

  ReconParams params;
  params.raster.out_size = d;
  if (s.has("raster")) {
    const Section r = s.sub("raster", {"out_size", "resolution", "bandwidth", "lower_bound"});
    params.raster.out_size = r.integer("out_size", d);
    params.raster.resolution = r.integer("resolution", params.raster.resolution);
    params.raster.bandwidth = r.number("bandwidth", params.raster.bandwidth);
    params.raster.lower_bound = r.number("lower_bound", params.raster.lower_bound);
  }
  require(params.raster.out_size == d, "raster.out_size must equal the image size");
  params.block = central_block(d, std::max<Eigen::Index>(1, (d * 10 + 14) / 28));
  if (s.has("block")) {
    const Section b = s.sub("block", {"row0", "col0", "height", "width"});
    params.block = Block{b.integer("row0"), b.integer("col0"), b.integer("height"), b.integer("width")};
  }
  params.base = base_image(s.text("base", "uniform"), d);
  params.epsilon = s.number("epsilon", params.epsilon);
  params.solver = solver_config(s, params.epsilon);
  params.max_atoms = s.integer("max_atoms", params.max_atoms);
  params.alpha = s.number("alpha", params.alpha);
  params.k = static_cast<int>(s.integer("k", params.k));
  params.seed = ctx.seed(s);
  const bool timing = s.flag("record_timing", false);

  std::vector<ReconMethod> methods;
  for (const auto& name : s.has("methods") ? s.texts("methods") : std::vector<std::string>{"lbcm", "w2bcm", "linear"})
    methods.push_back(parse_recon_method(name));
  require(!methods.empty(), s.path("methods") + ": need at least one method");

  std::ostringstream metrics;
  metrics << "target,method,w2_squared,wall_time_ms\n";
  json lambdas = json::array();
  for (std::size_t t = 0; t < images.targets.size(); ++t) {
    const GridImage occluded = occlude(images.targets[t], params.block);
    for (const auto method : methods) {
      const auto start = std::chrono::steady_clock::now();
      const Reconstruction r = reconstruct(method, occluded, images.refs, params);
      const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      const std::string name = recon_method_name(method);
      const std::string stem = "recon_" + std::to_string(t) + "_" + name;
      ctx.write(stem + ".csv", image_to_csv(r.image));
      ctx.write(stem + ".pgm", image_to_pgm(r.image));
      metrics << t << "," << name << "," << format_double(image_w2_squared(r.image, images.targets[t]));
      // zero unless requested, so repeated runs stay byte-identical
      metrics << "," << format_double(timing ? ms : 0.0) << "\n";
      lambdas.push_back({{"target", t}, {"method", name}, {"lambda", vector_json(r.lambda.values())}});
    }
  }
  ctx.write("metrics.csv", metrics.str());
  ctx.write("lambdas.json", lambdas.dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------- capacity

int capacity_1d(const Section& s, const RunContext& ctx) {
  std::vector<long> grids{50, 200};
  if (s.has("grids")) grids = s.integers("grids");
  require(!grids.empty(), s.path("grids") + ": need at least one grid size");
  for (long g : grids) require(g >= 1, s.path("grids") + ": sizes must be positive");
  const long map_grid = s.integer("map_grid", kMonotoneGrid);
  const json& targets = s.array("targets");
  require(!targets.empty(), s.path("targets") + ": need at least one target");

  std::ostringstream csv;
  csv << "target,grid,w2_error\n";
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const Section t(targets[i], s.path("targets") + "[" + std::to_string(i) + "]", {"name", "locations", "masses"});
    const auto loc = t.numbers("locations");
    const auto mass = t.numbers("masses");
    require(!loc.empty() && loc.size() == mass.size(), t.path("masses") + ": must match locations");
    const DiscreteMeasure target(Eigen::Map<const Vector>(loc.data(), static_cast<Eigen::Index>(loc.size())),
                                 Eigen::Map<const Vector>(mass.data(), static_cast<Eigen::Index>(mass.size())));
    const auto coeff = coeff_measure_from_map(MonotoneMap1D::quantile_of(target, map_grid));
    const std::string name = t.text("name", std::to_string(i));
    for (long g : grids) {
      const double err = std::sqrt(std::max(0.0, quantile_w2_squared_1d(lbcm_1d_synthesize(coeff, g), target)));
      csv << name << "," << g << "," << format_double(err) << "\n";
    }
  }
  ctx.write("capacity_1d.csv", csv.str());
  return 0;
}

VertexCombo parse_combo(const json& j, const std::string& where) {
  const Section c(j, where, {"weights", "offsets"});
  VertexCombo combo;
  combo.weights = c.numbers("weights");
  for (const auto& b : c.array("offsets")) {
    if (!b.is_array() || b.size() != 3) throw InvalidArgument(c.path("offsets") + ": expected [b1, b2, b3] triples");
    VertexMapParams p;
    for (std::size_t k = 0; k < 3; ++k) {
      if (!b[k].is_number()) throw InvalidArgument(c.path("offsets") + ": expected numbers");
      p.b[k] = b[k].get<double>();
    }
    combo.maps.push_back(p);
  }
  require(!combo.weights.empty(), where + ": a combo needs at least one map");
  require(combo.weights.size() == combo.maps.size(), where + ": weights and offsets differ in length");
  SimplexWeights(Eigen::Map<const Vector>(combo.weights.data(), static_cast<Eigen::Index>(combo.weights.size())));
  return combo;
}

int capacity_2d(const Section& s, const RunContext& ctx) {
  const std::uint64_t seed = ctx.seed(s);
  const long n_mc = s.integer("n_mc", 200000);
  require(n_mc >= 1000, s.path("n_mc") + ": must be at least 1000");
  std::vector<VertexCombo> combos;
  if (s.has("combos")) {
    const json& list = s.array("combos");
    require(!list.empty(), s.path("combos") + ": empty combo list");
    for (std::size_t i = 0; i < list.size(); ++i)
      combos.push_back(parse_combo(list[i], s.path("combos") + "[" + std::to_string(i) + "]"));
  }
  if (s.has("random_combos")) {
    const Section r = s.sub("random_combos", {"count", "max_atoms"});
    const long count = r.integer("count", 200);
    const long max_atoms = r.integer("max_atoms", 50);
    require(count >= 1 && max_atoms >= 1, r.path("count") + " and max_atoms must be positive");
    for (long i = 0; i < count; ++i) {
      Rng rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
      const auto atoms = 1 + static_cast<Eigen::Index>(rng.next_u64() % static_cast<std::uint64_t>(max_atoms));
      combos.push_back(random_vertex_combo(atoms, rng.next_u64()));
    }
  }
  require(!combos.empty() || s.has("search"), "config: give combos, random_combos or search");

  std::ostringstream csv;
  csv << "combo,gap,stderr,bound\n";
  json summary;
  double min_gap = std::numeric_limits<double>::infinity();
  bool all_above = true;
  auto record = [&](const std::string& id, const GapEstimate& g) {
    csv << id << "," << format_double(g.gap) << "," << format_double(g.std_error) << "," << format_double(kGapBound)
        << "\n";
    min_gap = std::min(min_gap, g.gap);
    all_above = all_above && g.gap >= kGapBound - 3.0 * g.std_error;
  };
  for (std::size_t i = 0; i < combos.size(); ++i)
    record(std::to_string(i), counterexample_gap(combos[i], n_mc, mix_seed(seed, (1ULL << 32) + i)));
  if (s.has("search")) {
    const Section q = s.sub("search", {"restarts", "atoms", "local_steps", "n_fit", "n_mc"});
    GapSearchConfig cfg;
    cfg.restarts = static_cast<int>(q.integer("restarts", cfg.restarts));
    cfg.atoms = static_cast<int>(q.integer("atoms", cfg.atoms));
    cfg.local_steps = static_cast<int>(q.integer("local_steps", cfg.local_steps));
    cfg.n_fit = q.integer("n_fit", cfg.n_fit);
    cfg.n_mc = q.integer("n_mc", cfg.n_mc);
    cfg.seed = seed;
    const auto found = search_min_gap(cfg);
    for (std::size_t i = 0; i < found.restart_gaps.size(); ++i) record("search_" + std::to_string(i), found.restart_gaps[i]);
  }
  summary["bound"] = kGapBound;
  summary["min_gap"] = min_gap;
  summary["all_above_bound"] = all_above;
  ctx.write("capacity_2d.csv", csv.str());
  ctx.write("capacity_2d.json", summary.dump(2) + "\n");
  return 0;
}

int cmd_capacity(const RunContext& ctx) {
  const Section s(ctx.config, "config",
                  {"mode", "targets", "grids", "map_grid", "combos", "random_combos", "n_mc", "seed", "search"});
  const std::string mode = s.text("mode");
  if (mode == "1d") return capacity_1d(s, ctx);
  if (mode == "2d") return capacity_2d(s, ctx);
  throw InvalidArgument(s.path("mode") + ": expected '1d' or '2d'");
}

int report(int code, const std::string& kind, const std::string& message) {
  json err = {{"error", {{"code", code}, {"kind", kind}, {"message", message}}}};
  std::cerr << err.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lotkit: linear barycentric coding model toolkit"};
  app.require_subcommand(1);
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir = ".";

  struct Command {
    const char* name;
    const char* help;
    int (*run)(const RunContext&);
    CLI::App* sub = nullptr;
  };
  std::vector<Command> commands{
      {"lbcm", "estimate or synthesize coordinates (LBCM or W2BCM)", cmd_lbcm},
      {"cov-experiment", "Gaussian covariance estimation experiment", cmd_cov},
      {"digits", "occluded image reconstruction", cmd_digits},
      {"capacity", "1D density and 2D gap checks", cmd_capacity},
  };
  std::vector<CLI::Option*> seed_opts;
  for (auto& c : commands) {
    c.sub = app.add_subcommand(c.name, c.help);
    c.sub->add_option("--config", config_path, "JSON configuration file")->required();
    seed_opts.push_back(c.sub->add_option("--seed", seed, "overrides the configuration seed"));
    c.sub->add_option("--out", out_dir, "output directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return report(kExitConfig, "usage", e.what());
  }

  try {
    for (std::size_t i = 0; i < commands.size(); ++i) {
      if (!commands[i].sub->parsed()) continue;
      RunContext ctx;
      ctx.config = load_config(config_path);
      if (seed_opts[i]->count() > 0) ctx.seed_override = seed;
      ctx.out = out_dir;
      std::filesystem::create_directories(ctx.out);
      return commands[i].run(ctx);
    }
    return report(kExitConfig, "usage", "no subcommand");
  } catch (const InvalidArgument& e) {
    return report(kExitConfig, "config", e.what());
  } catch (const json::exception& e) {
    return report(kExitConfig, "config", e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return report(kExitConfig, "config", e.what());
  } catch (const NumericalError& e) {
    return report(kExitNumerical, "numerical", e.what());
  } catch (const std::exception& e) {
    return report(kExitNumerical, "numerical", e.what());
  }
}
