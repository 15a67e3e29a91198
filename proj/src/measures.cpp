#include "lotkit/measures.hpp"

#include "json.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace lotkit {
namespace {

Vector normalized_mass(Vector weights, const char* what) {
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (!std::isfinite(weights[i]) || weights[i] < 0.0)
      throw InvalidArgument(std::string(what) + ": entries must be finite and nonnegative");
  }
  const double total = weights.sum();
  const double deviation = std::abs(total - 1.0);
  if (deviation > kRenormalizeLimit)
    throw InvalidArgument(std::string(what) + ": entries sum to " + format_double(total) +
                          ", expected 1");
  if (deviation > 0.0) weights /= total;
  return weights;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
    while (!field.empty() && field.front() == ' ') field.erase(field.begin());
    fields.push_back(field);
  }
  return fields;
}

double parse_double(const std::string& s) {
  double value = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) throw InvalidArgument("malformed number '" + s + "'");
  return value;
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

DiscreteMeasure::DiscreteMeasure(PointMatrix support, Vector weights)
    : support_(std::move(support)) {
  require(support_.rows() == weights.size(), "support and weights must have equal length");
  require(support_.rows() >= 1, "measure must have at least one atom");
  require(support_.allFinite(), "support points must be finite");
  weights_ = normalized_mass(std::move(weights), "measure weights");
}

DiscreteMeasure DiscreteMeasure::uniform(PointMatrix support) {
  const auto n = support.rows();
  require(n >= 1, "measure must have at least one atom");
  return DiscreteMeasure(std::move(support), Vector::Constant(n, 1.0 / static_cast<double>(n)));
}

Vector DiscreteMeasure::mean() const { return support_.transpose() * weights_; }

Matrix DiscreteMeasure::covariance() const {
  const Vector mu = mean();
  const PointMatrix centered = support_.rowwise() - mu.transpose();
  return centered.transpose() * weights_.asDiagonal() * centered;
}

SimplexWeights::SimplexWeights(Vector lambda) {
  require(lambda.size() >= 1, "simplex weights need at least one entry");
  lambda_ = normalized_mass(std::move(lambda), "simplex weights");
}

SimplexWeights SimplexWeights::vertex(Eigen::Index m, Eigen::Index i) {
  require(m >= 1 && i >= 0 && i < m, "vertex index out of range");
  Vector e = Vector::Zero(m);
  e[i] = 1.0;
  return SimplexWeights(std::move(e));
}

SimplexWeights SimplexWeights::barycenter(Eigen::Index m) {
  require(m >= 1, "simplex dimension must be positive");
  return SimplexWeights(Vector::Constant(m, 1.0 / static_cast<double>(m)));
}

MapOnSample::MapOnSample(std::shared_ptr<const PointMatrix> base_points, PointMatrix images)
    : base_points_(std::move(base_points)), images_(std::move(images)) {
  require(base_points_ != nullptr, "map needs a base sample");
  const auto n = base_points_->rows();
  require(n >= 1, "map needs at least one base point");
  base_weights_ = std::make_shared<const Vector>(Vector::Constant(n, 1.0 / static_cast<double>(n)));
  require(images_.rows() == n, "images and base points must have equal length");
}

MapOnSample::MapOnSample(std::shared_ptr<const PointMatrix> base_points,
                         std::shared_ptr<const Vector> base_weights, PointMatrix images)
    : base_points_(std::move(base_points)),
      base_weights_(std::move(base_weights)),
      images_(std::move(images)) {
  require(base_points_ != nullptr && base_weights_ != nullptr, "map needs a base sample");
  require(base_points_->rows() >= 1, "map needs at least one base point");
  require(base_weights_->size() == base_points_->rows(), "base weights and points differ in length");
  require(images_.rows() == base_points_->rows(), "images and base points must have equal length");
}

MapOnSample MapOnSample::identity(const DiscreteMeasure& base) {
  auto points = std::make_shared<const PointMatrix>(base.support());
  auto weights = std::make_shared<const Vector>(base.weights());
  return MapOnSample(points, weights, base.support());
}

bool MapOnSample::shares_base_with(const MapOnSample& other) const {
  if (base_points_ == other.base_points_ && base_weights_ == other.base_weights_) return true;
  return base_points_->rows() == other.base_points_->rows() &&
         base_points_->cols() == other.base_points_->cols() &&
         *base_points_ == *other.base_points_ && *base_weights_ == *other.base_weights_;
}

CoefficientMeasure::CoefficientMeasure(std::vector<double> locs, std::vector<double> ms)
    : locations(std::move(locs)), masses(std::move(ms)) {
  require(locations.size() == masses.size(), "coefficient locations and masses differ in length");
  require(!masses.empty(), "coefficient measure needs at least one atom");
  Vector w = Eigen::Map<const Vector>(masses.data(), static_cast<Eigen::Index>(masses.size()));
  w = normalized_mass(std::move(w), "coefficient masses");
  for (std::size_t i = 0; i < masses.size(); ++i) masses[i] = w[static_cast<Eigen::Index>(i)];
}

MapOnSample combine_maps(const SimplexWeights& lambda, const std::vector<MapOnSample>& maps) {
  require(!maps.empty(), "combine_maps needs at least one map");
  require(lambda.size() == static_cast<Eigen::Index>(maps.size()),
          "lambda length does not match the number of maps");
  const auto& first = maps.front();
  for (const auto& map : maps) {
    if (!map.shares_base_with(first)) throw InvalidArgument("incompatible base sample");
    require(map.dim() == first.dim(), "maps have different image dimensions");
  }
  PointMatrix images = PointMatrix::Zero(first.size(), first.dim());
  for (std::size_t i = 0; i < maps.size(); ++i) {
    const double w = lambda[static_cast<Eigen::Index>(i)];
    if (w != 0.0) images += w * maps[i].images();
  }
  return MapOnSample(first.shared_base(), first.shared_weights(), std::move(images));
}

DiscreteMeasure pushforward(const MapOnSample& map) {
  require(map.size() >= 1, "cannot push forward through an empty map");
  return DiscreteMeasure(map.images(), map.base_weights());
}

std::string measure_to_csv(const DiscreteMeasure& measure) {
  std::string out;
  for (Eigen::Index c = 0; c < measure.dim(); ++c) out += "x_" + std::to_string(c + 1) + ",";
  out += "weight\n";
  for (Eigen::Index r = 0; r < measure.size(); ++r) {
    for (Eigen::Index c = 0; c < measure.dim(); ++c) out += format_double(measure.support()(r, c)) + ",";
    out += format_double(measure.weights()[r]) + "\n";
  }
  return out;
}

DiscreteMeasure measure_from_csv(const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  if (!std::getline(ss, line)) throw InvalidArgument("empty measure CSV");
  const auto header = split_line(line);
  require(header.size() >= 2 && header.back() == "weight",
          "measure CSV header must be x_1..x_d,weight");
  const auto d = static_cast<Eigen::Index>(header.size() - 1);
  for (Eigen::Index c = 0; c < d; ++c)
    require(header[static_cast<std::size_t>(c)] == "x_" + std::to_string(c + 1),
            "measure CSV header must be x_1..x_d,weight");
  std::vector<std::vector<double>> rows;
  while (std::getline(ss, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = split_line(line);
    require(static_cast<Eigen::Index>(fields.size()) == d + 1, "measure CSV row has wrong arity");
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_double(f));
    rows.push_back(std::move(row));
  }
  require(!rows.empty(), "measure CSV has no atoms");
  PointMatrix support(static_cast<Eigen::Index>(rows.size()), d);
  Vector weights(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto ri = static_cast<Eigen::Index>(r);
    for (Eigen::Index c = 0; c < d; ++c) support(ri, c) = rows[r][static_cast<std::size_t>(c)];
    weights[ri] = rows[r].back();
  }
  return DiscreteMeasure(std::move(support), std::move(weights));
}

std::string measure_to_json(const DiscreteMeasure& measure) {
  nlohmann::json j;
  j["support"] = nlohmann::json::array();
  for (Eigen::Index r = 0; r < measure.size(); ++r) {
    std::vector<double> p;
    for (Eigen::Index c = 0; c < measure.dim(); ++c) p.push_back(measure.support()(r, c));
    j["support"].push_back(p);
  }
  j["weights"] = std::vector<double>(measure.weights().data(),
                                     measure.weights().data() + measure.weights().size());
  return j.dump();
}

DiscreteMeasure measure_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed measure JSON: ") + e.what());
  }
  require(j.is_object() && j.contains("support") && j.contains("weights"),
          "measure JSON needs 'support' and 'weights'");
  const auto& sup = j["support"];
  const auto& w = j["weights"];
  require(sup.is_array() && w.is_array() && sup.size() == w.size() && !sup.empty(),
          "measure JSON arrays must be nonempty and of equal length");
  const auto n = static_cast<Eigen::Index>(sup.size());
  const auto d = static_cast<Eigen::Index>(sup[0].size());
  require(d >= 1, "measure JSON points must be nonempty");
  PointMatrix support(n, d);
  Vector weights(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& p = sup[static_cast<std::size_t>(r)];
    require(p.is_array() && static_cast<Eigen::Index>(p.size()) == d, "measure JSON points differ in dimension");
    for (Eigen::Index c = 0; c < d; ++c) support(r, c) = p[static_cast<std::size_t>(c)].get<double>();
    weights[r] = w[static_cast<std::size_t>(r)].get<double>();
  }
  return DiscreteMeasure(std::move(support), std::move(weights));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write '" + path + "'");
  out << contents;
}

DiscreteMeasure read_measure_csv(const std::string& path) {
  return measure_from_csv(read_text_file(path));
}

}  // namespace lotkit
