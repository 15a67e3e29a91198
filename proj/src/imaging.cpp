#include "lotkit/imaging.hpp"

#include "lotkit/exact_ot.hpp"
#include "lotkit/lbcm.hpp"
#include "lotkit/parallel.hpp"
#include "lotkit/sampling.hpp"
#include "lotkit/w2bcm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <numeric>
#include <sstream>

namespace lotkit {
namespace {

std::string read_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open file: " + path);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::uint32_t big_endian_u32(const std::string& bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < 4; ++i) v = (v << 8) | static_cast<unsigned char>(bytes[offset + i]);
  return v;
}

DiscreteMeasure measure_for_solver(const GridImage& img, const ReconParams& params, std::uint64_t stream) {
  return subsample_measure(image_to_measure(img), params.max_atoms, mix_seed(params.seed, stream));
}

Vector pixel_vector(const GridImage& img) {
  const GridImage n = img.normalized();
  return Eigen::Map<const Vector>(n.pixels().data(), n.pixels().size());
}

void check_refs(const std::vector<GridImage>& refs) {
  require(!refs.empty(), "need at least one reference image");
  for (const auto& r : refs) require(r.size() == refs.front().size(), "reference images differ in size");
}

}  // namespace

GridImage::GridImage(Matrix pixels) : pixels_(std::move(pixels)) {
  require(pixels_.rows() >= 1 && pixels_.rows() == pixels_.cols(), "image must be a nonempty square grid");
  require(pixels_.allFinite() && pixels_.minCoeff() >= 0.0, "pixel intensities must be finite and nonnegative");
}

GridImage GridImage::normalized() const {
  const double s = total();
  if (!(s > 0.0)) throw InvalidArgument("empty image");
  return GridImage(pixels_ / s);
}

Block central_block(Eigen::Index d, Eigen::Index size) {
  require(d >= 1 && size >= 0 && size <= d, "block does not fit the image");
  return {(d - size) / 2, (d - size) / 2, size, size};
}

DiscreteMeasure image_to_measure(const GridImage& img) {
  const Matrix& p = img.pixels();
  const double s = p.sum();
  if (!(s > 0.0)) throw InvalidArgument("empty image");
  const Eigen::Index d = img.size();
  const auto lit = static_cast<Eigen::Index>((p.array() > 0.0).count());
  PointMatrix support(lit, 2);
  Vector weights(lit);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      if (p(i, j) > 0.0) {
        support(k, 0) = static_cast<double>(i + 1) / static_cast<double>(d);
        support(k, 1) = static_cast<double>(j + 1) / static_cast<double>(d);
        weights[k++] = p(i, j) / s;
      }
  return DiscreteMeasure(std::move(support), std::move(weights));
}

GridImage measure_to_image(const PointMatrix& support, const Vector& masses, const RasterConfig& cfg) {
  require(cfg.out_size >= 1 && cfg.resolution >= 1, "raster size and resolution must be positive");
  require(cfg.bandwidth > 0.0 && cfg.lower_bound >= 0.0, "bandwidth must be positive and lower bound nonnegative");
  require(support.cols() == 2 && support.rows() == masses.size(), "support must be n x 2 with one mass per point");
  require(std::abs(masses.sum() - 1.0) <= 1e-9 && masses.minCoeff() >= 0.0, "masses must be a probability vector");
  const Eigen::Index d = cfg.out_size;
  const Eigen::Index r = cfg.resolution;
  const Eigen::Index fine = r * d;
  const double inv_b2 = 1.0 / (cfg.bandwidth * cfg.bandwidth);

  // The Gaussian kernel separates: K = Ex diag(b) Ey^T with Ex_ik = exp(-(x_i - s_k1)^2 / b^2).
  Matrix ex(fine, support.rows());
  Matrix ey(fine, support.rows());
  for (Eigen::Index i = 0; i < fine; ++i) {
    const double g = static_cast<double>(i + 1) / static_cast<double>(fine);
    for (Eigen::Index k = 0; k < support.rows(); ++k) {
      ex(i, k) = std::exp(-(g - support(k, 0)) * (g - support(k, 0)) * inv_b2);
      ey(i, k) = std::exp(-(g - support(k, 1)) * (g - support(k, 1)) * inv_b2);
    }
  }
  Matrix kern = ex * masses.asDiagonal() * ey.transpose();
  const double s = kern.sum();
  if (!(s > 0.0)) throw NumericalError("lower bound too aggressive");
  kern /= s;
  kern = (kern.array() > cfg.lower_bound).select(kern, 0.0);

  Matrix img = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) img(i, j) = kern.block(i * r, j * r, r, r).sum();
  const double total = img.sum();
  if (!(total > 0.0)) throw NumericalError("lower bound too aggressive");
  return GridImage(img / total);
}

GridImage measure_to_image(const DiscreteMeasure& measure, const RasterConfig& cfg) {
  return measure_to_image(measure.support(), measure.weights(), cfg);
}

GridImage occlude(const GridImage& img, const Block& block) {
  const Eigen::Index d = img.size();
  if (block.row0 < 0 || block.col0 < 0 || block.height < 0 || block.width < 0 || block.row0 + block.height > d ||
      block.col0 + block.width > d)
    throw InvalidArgument("occlusion block out of bounds");
  Matrix p = img.pixels();
  p.block(block.row0, block.col0, block.height, block.width).setZero();
  return GridImage(std::move(p));
}

DiscreteMeasure subsample_measure(const DiscreteMeasure& measure, Eigen::Index max_atoms, std::uint64_t seed) {
  require(max_atoms >= 1, "max_atoms must be positive");
  if (measure.size() <= max_atoms) return measure;
  Rng rng(seed);
  std::vector<std::pair<double, Eigen::Index>> keys;
  keys.reserve(static_cast<std::size_t>(measure.size()));
  for (Eigen::Index i = 0; i < measure.size(); ++i) {
    const double u = rng.uniform();
    const double w = measure.weights()[i];
    // log(u) / w orders like u^(1/w); zero-mass atoms never win
    keys.emplace_back(w > 0.0 ? std::log(u) / w : -std::numeric_limits<double>::infinity(), i);
  }
  std::partial_sort(keys.begin(), keys.begin() + max_atoms, keys.end(),
                    [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < max_atoms; ++i) keep.push_back(keys[static_cast<std::size_t>(i)].second);
  std::sort(keep.begin(), keep.end());
  PointMatrix support(max_atoms, measure.dim());
  Vector weights(max_atoms);
  for (Eigen::Index i = 0; i < max_atoms; ++i) {
    support.row(i) = measure.support().row(keep[static_cast<std::size_t>(i)]);
    weights[i] = measure.weights()[keep[static_cast<std::size_t>(i)]];
  }
  return DiscreteMeasure(std::move(support), weights / weights.sum());
}

ReconMethod parse_recon_method(const std::string& name) {
  if (name == "lbcm") return ReconMethod::kLbcm;
  if (name == "w2bcm") return ReconMethod::kW2bcm;
  if (name == "linear") return ReconMethod::kLinear;
  throw InvalidArgument("unknown reconstruction method: " + name);
}

std::string recon_method_name(ReconMethod method) {
  switch (method) {
    case ReconMethod::kLbcm: return "lbcm";
    case ReconMethod::kW2bcm: return "w2bcm";
    case ReconMethod::kLinear: return "linear";
  }
  return "unknown";
}

SimplexWeights estimate_image_coordinate(ReconMethod method, const GridImage& occluded_target,
                                         const std::vector<GridImage>& refs, const ReconParams& params) {
  check_refs(refs);
  std::vector<GridImage> occluded;
  for (const auto& r : refs) occluded.push_back(occlude(r, params.block));
  switch (method) {
    case ReconMethod::kLinear: {
      Matrix b(occluded_target.pixels().size(), static_cast<Eigen::Index>(refs.size()));
      for (std::size_t i = 0; i < occluded.size(); ++i) b.col(static_cast<Eigen::Index>(i)) = pixel_vector(occluded[i]);
      return project_convex_hull(b, pixel_vector(occluded_target), params.qp).lambda;
    }
    case ReconMethod::kLbcm: {
      require(params.base.size() == occluded_target.size(), "base image has the wrong size");
      const DiscreteMeasure base = measure_for_solver(occlude(params.base, params.block), params, 0);
      std::vector<DiscreteMeasure> ref_measures;
      for (std::size_t i = 0; i < occluded.size(); ++i) ref_measures.push_back(measure_for_solver(occluded[i], params, 2 + i));
      EotConfig cfg = params.solver;
      cfg.epsilon = params.epsilon;
      const DiscreteMeasure target = measure_for_solver(occluded_target, params, 1);
      return estimate_lambda_measures(base, base, ref_measures, target, cfg, params.qp).qp.lambda;
    }
    case ReconMethod::kW2bcm: {
      std::vector<DiscreteMeasure> ref_measures;
      for (std::size_t i = 0; i < occluded.size(); ++i) ref_measures.push_back(measure_for_solver(occluded[i], params, 2 + i));
      const DiscreteMeasure target = measure_for_solver(occluded_target, params, 1);
      return estimate_lambda_bcm(target, ref_measures, params.epsilon, params.solver, params.qp).qp.lambda;
    }
  }
  throw InvalidArgument("unknown reconstruction method");
}

GridImage synthesize_image(ReconMethod method, const SimplexWeights& lambda, const std::vector<GridImage>& refs,
                           const ReconParams& params) {
  check_refs(refs);
  require(lambda.size() == static_cast<Eigen::Index>(refs.size()), "lambda and references differ in length");
  auto linear_mixture = [&] {
    Matrix mix = Matrix::Zero(refs.front().size(), refs.front().size());
    for (std::size_t i = 0; i < refs.size(); ++i) mix += lambda[static_cast<Eigen::Index>(i)] * refs[i].normalized().pixels();
    return GridImage(mix);
  };
  switch (method) {
    case ReconMethod::kLinear:
      return linear_mixture();
    case ReconMethod::kLbcm: {
      require(params.base.size() == refs.front().size(), "base image has the wrong size");
      const DiscreteMeasure base = measure_for_solver(params.base, params, 100);
      std::vector<DiscreteMeasure> ref_measures;
      for (std::size_t i = 0; i < refs.size(); ++i) ref_measures.push_back(measure_for_solver(refs[i], params, 102 + i));
      EotConfig cfg = params.solver;
      cfg.epsilon = params.epsilon;
      const LbcmProblem problem = make_entropic_problem(base, base, ref_measures, std::nullopt, cfg);
      return measure_to_image(synthesize(lambda, problem), params.raster);
    }
    case ReconMethod::kW2bcm: {
      std::vector<DiscreteMeasure> ref_measures;
      for (std::size_t i = 0; i < refs.size(); ++i) ref_measures.push_back(measure_for_solver(refs[i], params, 102 + i));
      const DiscreteMeasure rho0 = measure_for_solver(linear_mixture(), params, 101);
      BarycenterConfig bc;
      bc.alpha = params.alpha;
      bc.k = params.k;
      bc.final_objective = false;
      return measure_to_image(iterative_barycenter(ref_measures, lambda, rho0, bc).measure, params.raster);
    }
  }
  throw InvalidArgument("unknown reconstruction method");
}

Reconstruction reconstruct(ReconMethod method, const GridImage& occluded_target, const std::vector<GridImage>& refs,
                           const ReconParams& params) {
  Reconstruction out;
  out.lambda = estimate_image_coordinate(method, occluded_target, refs, params);
  out.image = synthesize_image(method, out.lambda, refs, params);
  return out;
}

double image_w2_squared(const GridImage& a, const GridImage& b) {
  const double w2 = discrete_w2(image_to_measure(a), image_to_measure(b)).w2;
  return w2 * w2;
}

GridImage uniform_image(Eigen::Index d) { return GridImage(Matrix::Ones(d, d)); }

GridImage checkerboard_image(Eigen::Index d, Eigen::Index cell) {
  require(cell >= 1, "checkerboard cell must be positive");
  Matrix p(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) p(i, j) = ((i / cell + j / cell) % 2 == 0) ? 1.0 : 0.0;
  return GridImage(std::move(p));
}

GridImage circle_image(Eigen::Index d, double radius, double thickness) {
  Matrix p(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) {
      const double x = (static_cast<double>(i) + 0.5) / static_cast<double>(d) - 0.5;
      const double y = (static_cast<double>(j) + 0.5) / static_cast<double>(d) - 0.5;
      p(i, j) = std::abs(std::hypot(x, y) - radius) <= 0.5 * thickness ? 1.0 : 0.0;
    }
  return GridImage(std::move(p));
}

GridImage corner_squares_image(Eigen::Index d, Eigen::Index side) {
  require(side >= 1 && 2 * side <= d, "corner squares do not fit");
  Matrix p = Matrix::Zero(d, d);
  p.topLeftCorner(side, side).setOnes();
  p.topRightCorner(side, side).setOnes();
  p.bottomLeftCorner(side, side).setOnes();
  p.bottomRightCorner(side, side).setOnes();
  return GridImage(std::move(p));
}

GridImage base_image(const std::string& name, Eigen::Index d) {
  if (name == "uniform") return uniform_image(d);
  if (name == "checkerboard") return checkerboard_image(d, std::max<Eigen::Index>(1, d / 7));
  if (name == "circle") return circle_image(d);
  if (name == "corner_squares") return corner_squares_image(d, std::max<Eigen::Index>(1, (d * 3) / 14));
  throw InvalidArgument("unknown base image: " + name);
}

GridImage blob_image(Eigen::Index d, double row, double col, double sigma) {
  require(sigma > 0.0, "blob width must be positive");
  Matrix p(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) {
      const double r2 = (static_cast<double>(i) - row) * (static_cast<double>(i) - row) +
                        (static_cast<double>(j) - col) * (static_cast<double>(j) - col);
      p(i, j) = r2 <= 9.0 * sigma * sigma ? std::exp(-0.5 * r2 / (sigma * sigma)) : 0.0;
    }
  return GridImage(std::move(p));
}

std::vector<GridImage> read_idx_images(const std::string& path) {
  const std::string bytes = read_binary(path);
  if (bytes.size() < 16) throw InvalidArgument("IDX file too short: " + path);
  if (big_endian_u32(bytes, 0) != 0x00000803u) throw InvalidArgument("bad IDX image magic number: " + path);
  const std::uint64_t count = big_endian_u32(bytes, 4);
  const std::uint64_t rows = big_endian_u32(bytes, 8);
  const std::uint64_t cols = big_endian_u32(bytes, 12);
  if (rows == 0 || rows != cols) throw InvalidArgument("IDX images must be square and nonempty: " + path);
  if (bytes.size() != 16 + count * rows * cols) throw InvalidArgument("IDX size does not match its header: " + path);
  std::vector<GridImage> out;
  out.reserve(count);
  std::size_t offset = 16;
  for (std::uint64_t n = 0; n < count; ++n) {
    Matrix p(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < p.rows(); ++i)
      for (Eigen::Index j = 0; j < p.cols(); ++j) p(i, j) = static_cast<unsigned char>(bytes[offset++]);
    out.emplace_back(std::move(p));
  }
  return out;
}

std::vector<int> read_idx_labels(const std::string& path) {
  const std::string bytes = read_binary(path);
  if (bytes.size() < 8) throw InvalidArgument("IDX file too short: " + path);
  if (big_endian_u32(bytes, 0) != 0x00000801u) throw InvalidArgument("bad IDX label magic number: " + path);
  const std::uint64_t count = big_endian_u32(bytes, 4);
  if (bytes.size() != 8 + count) throw InvalidArgument("IDX size does not match its header: " + path);
  std::vector<int> out;
  for (std::uint64_t n = 0; n < count; ++n) out.push_back(static_cast<unsigned char>(bytes[8 + n]));
  return out;
}

GridImage image_from_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw InvalidArgument("bad pixel value in image CSV: " + cell);
      }
    }
    rows.push_back(std::move(row));
  }
  require(!rows.empty(), "image CSV is empty");
  const auto d = static_cast<Eigen::Index>(rows.size());
  Matrix p(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    require(static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) == d, "image CSV must be square");
    for (Eigen::Index j = 0; j < d; ++j) p(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return GridImage(std::move(p));
}

std::string image_to_csv(const GridImage& img) {
  std::string out;
  for (Eigen::Index i = 0; i < img.size(); ++i) {
    for (Eigen::Index j = 0; j < img.size(); ++j) {
      if (j > 0) out += ',';
      out += format_double(img.pixels()(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string image_to_pgm(const GridImage& img) {
  const double mx = img.pixels().maxCoeff();
  std::string out = "P5\n" + std::to_string(img.size()) + " " + std::to_string(img.size()) + "\n255\n";
  for (Eigen::Index i = 0; i < img.size(); ++i)
    for (Eigen::Index j = 0; j < img.size(); ++j) {
      const double v = mx > 0.0 ? img.pixels()(i, j) / mx : 0.0;
      out += static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * v)));
    }
  return out;
}

}  // namespace lotkit
