#include "stereoguide/grid.hpp"

#include <algorithm>
#include <stdexcept>

namespace stereoguide {

namespace {

void check_dims(int width, int height) {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("grid dimensions must be positive");
  }
}

}  // namespace

ImageGrid::ImageGrid(int width, int height, float fill)
    : width_(width), height_(height) {
  check_dims(width, height);
  if (!(fill >= 0.0f && fill <= 255.0f)) {
    throw std::invalid_argument("intensity outside [0, 255]");
  }
  data_.assign(static_cast<std::size_t>(width) * height, fill);
}

ImageGrid::ImageGrid(int width, int height, std::vector<float> data)
    : width_(width), height_(height), data_(std::move(data)) {
  check_dims(width, height);
  if (data_.size() != static_cast<std::size_t>(width) * height) {
    throw std::invalid_argument("intensity buffer size does not match dimensions");
  }
  for (float v : data_) {
    if (!(v >= 0.0f && v <= 255.0f)) {
      throw std::invalid_argument("intensity outside [0, 255]");
    }
  }
}

float ImageGrid::at_clamped(int x, int y) const {
  x = std::clamp(x, 0, width_ - 1);
  y = std::clamp(y, 0, height_ - 1);
  return at(x, y);
}

CostVolume::CostVolume(int width, int height, int d_min, int d_max, float fill)
    : width_(width), height_(height), d_min_(d_min), d_max_(d_max) {
  check_dims(width, height);
  if (d_max < d_min) {
    throw std::invalid_argument("disparity range is empty");
  }
  if (!(fill >= 0.0f) || !std::isfinite(fill)) {
    throw std::invalid_argument("cost must be finite and nonnegative");
  }
  data_.assign(static_cast<std::size_t>(width) * height * levels(), fill);
}

DisparityMap::DisparityMap(int width, int height, float fill)
    : width_(width), height_(height) {
  check_dims(width, height);
  data_.assign(static_cast<std::size_t>(width) * height, fill);
}

DisparityMap winner_take_all(const CostVolume& volume) {
  DisparityMap out(volume.width(), volume.height());
  const int levels = volume.levels();
  for (int y = 0; y < volume.height(); ++y) {
    for (int x = 0; x < volume.width(); ++x) {
      const float* costs = volume.slice(x, y);
      int best = 0;
      for (int i = 1; i < levels; ++i) {
        if (costs[i] < costs[best]) best = i;
      }
      out.at(x, y) = static_cast<float>(volume.d_min() + best);
    }
  }
  return out;
}

DisparityMap subpixel_refine(const CostVolume& volume, const DisparityMap& winners) {
  if (winners.width() != volume.width() || winners.height() != volume.height()) {
    throw std::invalid_argument("winner map does not match volume dimensions");
  }
  DisparityMap out = winners;
  for (int y = 0; y < volume.height(); ++y) {
    for (int x = 0; x < volume.width(); ++x) {
      const float v = winners.at(x, y);
      if (!disparity_valid(v)) continue;
      const int d = static_cast<int>(v);
      if (static_cast<float>(d) != v) continue;  // not an integer level
      if (d <= volume.d_min() || d >= volume.d_max()) continue;
      const double c0 = volume.at(x, y, d - 1);
      const double c1 = volume.at(x, y, d);
      const double c2 = volume.at(x, y, d + 1);
      if (!(c0 > c1 && c2 > c1)) continue;  // needs a strict local minimum
      const double offset = (c0 - c2) / (2.0 * (c0 - 2.0 * c1 + c2));
      out.at(x, y) = static_cast<float>(d + offset);
    }
  }
  return out;
}

DisparityMap median_filter_3x3(const DisparityMap& map) {
  DisparityMap out(map.width(), map.height());
  float window[9];
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      int n = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = x + dx;
          const int ny = y + dy;
          if (!map.contains(nx, ny)) continue;
          const float v = map.at(nx, ny);
          if (disparity_valid(v)) window[n++] = v;
        }
      }
      if (n == 0) {
        out.at(x, y) = kInvalidDisparity;
        continue;
      }
      std::sort(window, window + n);
      out.at(x, y) = window[(n - 1) / 2];
    }
  }
  return out;
}

}  // namespace stereoguide
