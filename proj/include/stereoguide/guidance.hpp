#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stereoguide/grid.hpp"

namespace stereoguide {

/// One LiDAR projection point on the left rectified image: pixel position
/// and its trusted disparity.
struct SparsePoint {
  int x = 0;
  int y = 0;
  double d = 0.0;
};

/// Ordered set of projection points; no two points share a pixel.
class SparseDisparitySet {
 public:
  SparseDisparitySet() = default;
  explicit SparseDisparitySet(std::vector<SparsePoint> points);

  const std::vector<SparsePoint>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const SparsePoint& operator[](std::size_t i) const { return points_[i]; }

 private:
  std::vector<SparsePoint> points_;
};

inline constexpr int kAutoWindow = 0;

struct GuidanceParams {
  double sigma_xy = 8.0;  // spatial bandwidth, pixels
  double sigma_i = 8.0;   // intensity bandwidth
  double gamma = 0.3;     // dissimilarity threshold for homogeneity
  double k = 10.0;        // modulation height
  double c = 1.0;         // modulation standard deviation, disparity levels
  int window = kAutoWindow;  // kAutoWindow, or an explicit odd size >= 3

  void validate() const;
};

/// Per-pixel ownership record produced by homogeneous-pixel analysis.
/// A claimed pixel stores the owning point index, the dissimilarity W in
/// [0, gamma) and the Euclidean pixel distance w to the owner. A pixel is
/// claimed by at most one point; every point claims its own pixel with
/// W = 0 and w = 0.
class GuidanceField {
 public:
  GuidanceField() = default;
  GuidanceField(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }

  bool claimed(int x, int y) const { return owner_[flat(x, y)] >= 0; }
  int owner(int x, int y) const { return owner_[flat(x, y)]; }
  float dissimilarity(int x, int y) const { return weight_[flat(x, y)]; }
  float distance(int x, int y) const { return dist_[flat(x, y)]; }

  void claim(int x, int y, int owner, float dissimilarity, float distance);
  std::size_t claimed_count() const;

 private:
  std::size_t flat(int x, int y) const {
    assert(x >= 0 && x < width_ && y >= 0 && y < height_);
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<int> owner_;     // -1 = unclaimed
  std::vector<float> weight_;  // W
  std::vector<float> dist_;    // w
};

/// Joint spatial/intensity dissimilarity of a pixel to a projection point:
///   W = 1 - exp(-||p - center||^2 / (2 sigma_xy^2) - (I(p) - I(center))^2 / (2 sigma_i^2))
/// 0 exactly at the center pixel, growing towards 1 with distance and
/// contrast (saturating at exactly 1.0 when the exponential underflows).
double dissimilarity_weight(const SparsePoint& center, int px, int py,
                            const ImageGrid& image, const GuidanceParams& params);

/// Smallest odd window size s >= 3 with s^2 * density strictly greater
/// than 1, so that expected coverage exceeds one point per window.
int auto_window_size(double density);

enum class DensityRegion { kPointBoundingBox, kFullImage };

/// Point count divided by the pixel count of the region the points cover.
double lidar_density(const SparseDisparitySet& points, const ImageGrid& image,
                     DensityRegion region = DensityRegion::kPointBoundingBox);

/// Starting from the configured (or auto) window size, shrinks by steps of
/// two until the square window centered on `point` contains no other
/// projection point. May shrink all the way to 1.
int effective_window(const SparsePoint& point, const SparseDisparitySet& all_points,
                     const GuidanceParams& params, double density);

/// Assigns each pixel near a projection point to at most one owner.
/// Candidates are the pixels inside the point's effective window whose
/// dissimilarity W stays below gamma; conflicts go to the claimant with
/// the smallest W, ties to the earlier point in the input order.
GuidanceField build_guidance_field(const SparseDisparitySet& points,
                                   const ImageGrid& image,
                                   const GuidanceParams& params);

/// Multiplier applied at a projection point's own pixel:
///   k * (1 - exp(-(d - d_m)^2 / (2 c^2)))
/// Zero at d = d_m, saturating at height k away from it.
double gauss_multiplier(double d, double d_m, double k, double c);

/// Riverbed multiplier for a homogeneous pixel at distance w from its owner
/// with dissimilarity W: a flat bed of value W over (d_m - w, d_m + w) and
/// Gaussian banks of height k outside, continuous at the junctions.
double riverbed_multiplier(double d, double d_m, double w, double W, double k, double c);

/// Rescales the cost slices of the projection points' own pixels by the
/// Gaussian multiplier. All other pixels are untouched.
CostVolume gauss_modulate(const CostVolume& volume, const SparseDisparitySet& points,
                          const GuidanceParams& params);

/// Rescales the cost slice of every claimed pixel by the riverbed
/// multiplier of its owner. Unclaimed pixels are untouched.
CostVolume riverbed_modulate(const CostVolume& volume, const GuidanceField& field,
                             const SparseDisparitySet& points,
                             const GuidanceParams& params);

/// Guidance mode selector shared by the matchers.
enum class FusionMode { kNone, kGauss, kRiverbed };

struct GuidanceConfig {
  FusionMode mode = FusionMode::kNone;
  SparseDisparitySet points;
  GuidanceParams params;

  static GuidanceConfig none() { return {}; }
  static GuidanceConfig gauss(SparseDisparitySet pts, GuidanceParams p = {});
  static GuidanceConfig riverbed(SparseDisparitySet pts, GuidanceParams p = {});
};

/// Applies the configured modulation to a cost volume. kNone and an empty
/// point set both leave the volume untouched (returned by value, bit-equal).
CostVolume apply_guidance(const CostVolume& volume, const ImageGrid& left,
                          const GuidanceConfig& config);

// Plain-text CSV exchange format: one `x,y,d` record per line, LF endings,
// optional `x,y,d` header.
SparseDisparitySet read_sparse_csv(const std::string& path);
void write_sparse_csv(const SparseDisparitySet& points, const std::string& path);

}  // namespace stereoguide
