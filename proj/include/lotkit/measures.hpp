#pragma once

#include "lotkit/common.hpp"

#include <memory>
#include <string>
#include <vector>

namespace lotkit {

/// Tolerance on the total mass of a probability vector.
inline constexpr double kMassTolerance = 1e-12;
/// Deviations below this are renormalized silently; above it they are errors.
inline constexpr double kRenormalizeLimit = 1e-9;

/// Weighted point cloud in R^d. Weights are nonnegative and sum to one.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  DiscreteMeasure(PointMatrix support, Vector weights);

  /// Uniform weights 1/n on the rows of `support`.
  static DiscreteMeasure uniform(PointMatrix support);

  const PointMatrix& support() const { return support_; }
  const Vector& weights() const { return weights_; }
  Eigen::Index size() const { return support_.rows(); }
  Eigen::Index dim() const { return support_.cols(); }

  Vector mean() const;
  /// Weighted second-moment matrix about the mean.
  Matrix covariance() const;

 private:
  PointMatrix support_;
  Vector weights_;
};

/// A point of the probability simplex.
class SimplexWeights {
 public:
  SimplexWeights() = default;
  explicit SimplexWeights(Vector lambda);

  /// The vertex e_i of the m-simplex.
  static SimplexWeights vertex(Eigen::Index m, Eigen::Index i);
  static SimplexWeights barycenter(Eigen::Index m);

  const Vector& values() const { return lambda_; }
  Eigen::Index size() const { return lambda_.size(); }
  double operator[](Eigen::Index i) const { return lambda_[i]; }

 private:
  Vector lambda_;
};

/// A transport map evaluated on a shared base sample. Base points carry
/// weights, uniform unless the base measure itself is weighted (images).
class MapOnSample {
 public:
  MapOnSample() = default;
  /// Base with uniform weights 1/n.
  MapOnSample(std::shared_ptr<const PointMatrix> base_points, PointMatrix images);
  MapOnSample(std::shared_ptr<const PointMatrix> base_points,
              std::shared_ptr<const Vector> base_weights, PointMatrix images);

  /// The identity map on a base measure.
  static MapOnSample identity(const DiscreteMeasure& base);

  const PointMatrix& base_points() const { return *base_points_; }
  const Vector& base_weights() const { return *base_weights_; }
  const PointMatrix& images() const { return images_; }
  const std::shared_ptr<const PointMatrix>& shared_base() const { return base_points_; }
  const std::shared_ptr<const Vector>& shared_weights() const { return base_weights_; }
  Eigen::Index size() const { return images_.rows(); }
  Eigen::Index dim() const { return images_.cols(); }

  /// True when both maps live on the same base sample (exact coordinate equality).
  bool shares_base_with(const MapOnSample& other) const;

 private:
  std::shared_ptr<const PointMatrix> base_points_;
  std::shared_ptr<const Vector> base_weights_;
  PointMatrix images_;
};

/// A finitely supported mixing measure over an index set of reals.
struct CoefficientMeasure {
  std::vector<double> locations;
  std::vector<double> masses;

  CoefficientMeasure() = default;
  CoefficientMeasure(std::vector<double> locations, std::vector<double> masses);
};

/// images[k] = sum_i lambda_i * maps[i].images[k].
MapOnSample combine_maps(const SimplexWeights& lambda, const std::vector<MapOnSample>& maps);

/// The pushforward of the base measure through `map`.
DiscreteMeasure pushforward(const MapOnSample& map);

// Serialization. CSV has header x_1..x_d,weight.
std::string measure_to_csv(const DiscreteMeasure& measure);
DiscreteMeasure measure_from_csv(const std::string& text);
std::string measure_to_json(const DiscreteMeasure& measure);
DiscreteMeasure measure_from_json(const std::string& text);

DiscreteMeasure read_measure_csv(const std::string& path);
void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double value);

}  // namespace lotkit
