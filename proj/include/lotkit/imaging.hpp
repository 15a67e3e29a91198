#pragma once

#include "lotkit/common.hpp"
#include "lotkit/eot.hpp"
#include "lotkit/measures.hpp"
#include "lotkit/simplex_opt.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lotkit {

/// Nonnegative d x d pixel grid. Pixel (i, j) is row i, column j (0-indexed here).
class GridImage {
 public:
  GridImage() = default;
  explicit GridImage(Matrix pixels);

  const Matrix& pixels() const { return pixels_; }
  Eigen::Index size() const { return pixels_.rows(); }
  double total() const { return pixels_.sum(); }
  /// Copy scaled to unit total mass.
  GridImage normalized() const;

 private:
  Matrix pixels_;
};

struct RasterConfig {
  Eigen::Index out_size = 28;
  Eigen::Index resolution = 4;
  double bandwidth = 0.05;
  double lower_bound = 1e-6;
};

struct Block {
  Eigen::Index row0 = 0;
  Eigen::Index col0 = 0;
  Eigen::Index height = 0;
  Eigen::Index width = 0;
};

/// The centered size x size block of a d x d image.
Block central_block(Eigen::Index d, Eigen::Index size = 10);

/// (1/s) sum I_ij delta_{(i/d, j/d)} over lit pixels, 1-indexed coordinates.
DiscreteMeasure image_to_measure(const GridImage& img);

/// Gaussian kernel density on an (rd) x (rd) grid, normalized, thresholded at
/// the lower bound, summed over r x r blocks and renormalized.
GridImage measure_to_image(const PointMatrix& support, const Vector& masses, const RasterConfig& cfg);
GridImage measure_to_image(const DiscreteMeasure& measure, const RasterConfig& cfg);

GridImage occlude(const GridImage& img, const Block& block);

/// At most max_atoms atoms drawn without replacement with probability
/// proportional to mass (Efraimidis-Spirakis keys); kept masses renormalized.
DiscreteMeasure subsample_measure(const DiscreteMeasure& measure, Eigen::Index max_atoms, std::uint64_t seed);

enum class ReconMethod { kLbcm, kW2bcm, kLinear };

ReconMethod parse_recon_method(const std::string& name);
std::string recon_method_name(ReconMethod method);

struct ReconParams {
  RasterConfig raster;
  Block block = central_block(28);
  /// Base image for the LBCM (unoccluded; occluded internally).
  GridImage base;
  double epsilon = 2e-3;
  EotConfig solver;
  QpOptions qp;
  Eigen::Index max_atoms = 1500;
  std::uint64_t seed = 0;
  double alpha = 0.05;
  int k = 200;
};

struct Reconstruction {
  SimplexWeights lambda;
  GridImage image;
};

/// Coordinate of the occluded target against the occluded references.
SimplexWeights estimate_image_coordinate(ReconMethod method, const GridImage& occluded_target,
                                         const std::vector<GridImage>& refs, const ReconParams& params);

/// Image synthesized from the unoccluded references at the coordinate lambda.
GridImage synthesize_image(ReconMethod method, const SimplexWeights& lambda, const std::vector<GridImage>& refs,
                           const ReconParams& params);

Reconstruction reconstruct(ReconMethod method, const GridImage& occluded_target, const std::vector<GridImage>& refs,
                           const ReconParams& params);

/// Squared W2 between two images viewed as probability measures.
double image_w2_squared(const GridImage& a, const GridImage& b);

// Procedural base images.
GridImage uniform_image(Eigen::Index d);
GridImage checkerboard_image(Eigen::Index d, Eigen::Index cell = 4);
GridImage circle_image(Eigen::Index d, double radius = 0.35, double thickness = 0.08);
GridImage corner_squares_image(Eigen::Index d, Eigen::Index side = 6);
GridImage base_image(const std::string& name, Eigen::Index d);

/// Isotropic Gaussian blob centered at (row, col) in pixel units, truncated at 3 sigma.
GridImage blob_image(Eigen::Index d, double row, double col, double sigma);

// I/O.
std::vector<GridImage> read_idx_images(const std::string& path);
std::vector<int> read_idx_labels(const std::string& path);
GridImage image_from_csv(const std::string& text);
std::string image_to_csv(const GridImage& img);
std::string image_to_pgm(const GridImage& img);

}  // namespace lotkit
