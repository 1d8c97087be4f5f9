#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace stereoguide {

// Disparity value meaning "no data". Serializes as +inf, the Middlebury
// PFM convention, so maps round-trip without a separate mask plane.
inline constexpr float kInvalidDisparity = std::numeric_limits<float>::infinity();

inline bool disparity_valid(float d) { return std::isfinite(d); }

/// Rectified grayscale raster, intensities in [0, 255].
class ImageGrid {
 public:
  ImageGrid() = default;
  ImageGrid(int width, int height, float fill = 0.0f);
  // Takes ownership of row-major data; rejects values outside [0, 255].
  ImageGrid(int width, int height, std::vector<float> data);

  int width() const { return width_; }
  int height() const { return height_; }
  bool contains(int x, int y) const {
    return x >= 0 && x < width_ && y >= 0 && y < height_;
  }

  float at(int x, int y) const {
    assert(contains(x, y));
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }
  float& at(int x, int y) {
    assert(contains(x, y));
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }
  // Coordinates clamped to the border.
  float at_clamped(int x, int y) const;

  const std::vector<float>& data() const { return data_; }
  std::vector<float>& data() { return data_; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<float> data_;
};

/// H x W x D matching costs over the disparity range [d_min, d_max].
/// Costs are finite and nonnegative; the per-pixel slice is contiguous.
class CostVolume {
 public:
  CostVolume() = default;
  CostVolume(int width, int height, int d_min, int d_max, float fill = 0.0f);

  int width() const { return width_; }
  int height() const { return height_; }
  int d_min() const { return d_min_; }
  int d_max() const { return d_max_; }
  int levels() const { return d_max_ - d_min_ + 1; }

  float at(int x, int y, int d) const { return data_[index(x, y, d)]; }
  float& at(int x, int y, int d) { return data_[index(x, y, d)]; }

  const float* slice(int x, int y) const { return data_.data() + index(x, y, d_min_); }
  float* slice(int x, int y) { return data_.data() + index(x, y, d_min_); }

  const std::vector<float>& data() const { return data_; }
  std::vector<float>& data() { return data_; }

 private:
  std::size_t index(int x, int y, int d) const {
    assert(x >= 0 && x < width_ && y >= 0 && y < height_);
    assert(d >= d_min_ && d <= d_max_);
    return (static_cast<std::size_t>(y) * width_ + x) * levels() + (d - d_min_);
  }

  int width_ = 0;
  int height_ = 0;
  int d_min_ = 0;
  int d_max_ = 0;
  std::vector<float> data_;
};

/// Per-pixel real disparity; kInvalidDisparity marks pixels without data.
class DisparityMap {
 public:
  DisparityMap() = default;
  DisparityMap(int width, int height, float fill = kInvalidDisparity);

  int width() const { return width_; }
  int height() const { return height_; }
  bool contains(int x, int y) const {
    return x >= 0 && x < width_ && y >= 0 && y < height_;
  }

  float at(int x, int y) const {
    assert(contains(x, y));
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }
  float& at(int x, int y) {
    assert(contains(x, y));
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }
  bool valid(int x, int y) const { return disparity_valid(at(x, y)); }

  const std::vector<float>& data() const { return data_; }
  std::vector<float>& data() { return data_; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<float> data_;
};

/// Per-pixel argmin over the disparity levels; ties go to the smaller level.
DisparityMap winner_take_all(const CostVolume& volume);

/// Parabola fit through the winner and its two neighbor costs. Applied only
/// where the winner is an interior level and a strict local minimum; the
/// offset magnitude is below 0.5. Everything else passes through unchanged.
DisparityMap subpixel_refine(const CostVolume& volume, const DisparityMap& winners);

/// 3x3 median over the valid neighbors (window clamped at borders); even
/// counts pick the lower middle. A pixel with no valid neighbor stays invalid.
DisparityMap median_filter_3x3(const DisparityMap& map);

}  // namespace stereoguide
