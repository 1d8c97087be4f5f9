#include "stereoguide/sgm.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <stdexcept>

namespace stereoguide {

namespace {

constexpr float kWorstHamming = 24.0f;

struct Direction {
  int dx;
  int dy;
};

// Horizontal and vertical first so the 4-path configuration is a prefix.
constexpr std::array<Direction, 8> kDirections = {{
    {1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, -1}, {1, -1}, {-1, 1},
}};

// One recurrence step: prev holds the predecessor's aggregated slice.
inline void aggregate_cell(const float* cost, const float* prev, float prev_min,
                           float p1, float p2, int levels, float* out) {
  for (int i = 0; i < levels; ++i) {
    float best = prev[i];
    if (i > 0) best = std::min(best, prev[i - 1] + p1);
    if (i + 1 < levels) best = std::min(best, prev[i + 1] + p1);
    best = std::min(best, prev_min + p2);
    out[i] = cost[i] + best - prev_min;
  }
}

inline float slice_min(const float* slice, int levels) {
  float m = slice[0];
  for (int i = 1; i < levels; ++i) m = std::min(m, slice[i]);
  return m;
}

// Aggregates one direction, adding L_r into `sum`. Rolling row buffers keep
// the memory footprint at two rows of slices.
void aggregate_direction(const CostVolume& volume, Direction dir, float p1, float p2,
                         CostVolume& sum) {
  const int width = volume.width();
  const int height = volume.height();
  const int levels = volume.levels();

  if (dir.dy == 0) {
    std::vector<float> prev(levels), cur(levels);
    const int x_begin = dir.dx > 0 ? 0 : width - 1;
    const int x_end = dir.dx > 0 ? width : -1;
    for (int y = 0; y < height; ++y) {
      bool has_prev = false;
      for (int x = x_begin; x != x_end; x += dir.dx) {
        const float* cost = volume.slice(x, y);
        if (!has_prev) {
          std::copy(cost, cost + levels, cur.begin());
          has_prev = true;
        } else {
          aggregate_cell(cost, prev.data(), slice_min(prev.data(), levels), p1, p2,
                         levels, cur.data());
        }
        float* out = sum.slice(x, y);
        for (int i = 0; i < levels; ++i) out[i] += cur[i];
        std::swap(prev, cur);
      }
    }
    return;
  }

  std::vector<float> prev_row(static_cast<std::size_t>(width) * levels);
  std::vector<float> cur_row(static_cast<std::size_t>(width) * levels);
  const int y_begin = dir.dy > 0 ? 0 : height - 1;
  const int y_end = dir.dy > 0 ? height : -1;
  for (int y = y_begin; y != y_end; y += dir.dy) {
    for (int x = 0; x < width; ++x) {
      const float* cost = volume.slice(x, y);
      float* cur = cur_row.data() + static_cast<std::size_t>(x) * levels;
      const int px = x - dir.dx;
      if (y == y_begin || px < 0 || px >= width) {
        std::copy(cost, cost + levels, cur);
      } else {
        const float* prev = prev_row.data() + static_cast<std::size_t>(px) * levels;
        aggregate_cell(cost, prev, slice_min(prev, levels), p1, p2, levels, cur);
      }
      float* out = sum.slice(x, y);
      for (int i = 0; i < levels; ++i) out[i] += cur[i];
    }
    std::swap(prev_row, cur_row);
  }
}

}  // namespace

void SgmParams::validate() const {
  if (d_min < 0 || d_max < d_min) {
    throw std::invalid_argument("require d_max >= d_min >= 0");
  }
  if (!(p1 >= 0.0) || !(p2 >= p1)) {
    throw std::invalid_argument("require p2 >= p1 >= 0");
  }
  if (paths != 4 && paths != 8) {
    throw std::invalid_argument("paths must be 4 or 8");
  }
}

CensusGrid::CensusGrid(int width, int height) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("census grid dimensions must be positive");
  }
  data_.assign(static_cast<std::size_t>(width) * height, 0u);
}

CensusGrid census_transform(const ImageGrid& image) {
  CensusGrid out(image.width(), image.height());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const float center = image.at(x, y);
      std::uint32_t bits = 0;
      for (int dy = -2; dy <= 2; ++dy) {
        for (int dx = -2; dx <= 2; ++dx) {
          if (dx == 0 && dy == 0) continue;
          bits = (bits << 1) | (image.at_clamped(x + dx, y + dy) < center ? 1u : 0u);
        }
      }
      out.at(x, y) = bits;
    }
  }
  return out;
}

CostVolume hamming_cost_volume(const CensusGrid& left, const CensusGrid& right,
                               int d_min, int d_max) {
  if (left.width() != right.width() || left.height() != right.height()) {
    throw std::invalid_argument("census grids must have equal dimensions");
  }
  CostVolume volume(left.width(), left.height(), d_min, d_max);
  for (int y = 0; y < left.height(); ++y) {
    for (int x = 0; x < left.width(); ++x) {
      float* slice = volume.slice(x, y);
      for (int d = d_min; d <= d_max; ++d) {
        const int xr = x - d;
        slice[d - d_min] = (xr < 0 || xr >= left.width())
                               ? kWorstHamming
                               : static_cast<float>(std::popcount(left.at(x, y) ^ right.at(xr, y)));
      }
    }
  }
  return volume;
}

CostVolume aggregate_paths(const CostVolume& volume, const SgmParams& params) {
  params.validate();
  CostVolume sum(volume.width(), volume.height(), volume.d_min(), volume.d_max(), 0.0f);
  for (int i = 0; i < params.paths; ++i) {
    aggregate_direction(volume, kDirections[static_cast<std::size_t>(i)],
                        static_cast<float>(params.p1), static_cast<float>(params.p2), sum);
  }
  return sum;
}

DisparityMap run_sgm(const ImageGrid& left, const ImageGrid& right,
                     const SgmParams& params, const GuidanceConfig& guidance) {
  params.validate();
  if (left.width() != right.width() || left.height() != right.height()) {
    throw std::invalid_argument("stereo pair dimensions differ");
  }
  const CensusGrid census_left = census_transform(left);
  const CensusGrid census_right = census_transform(right);
  CostVolume volume = hamming_cost_volume(census_left, census_right, params.d_min, params.d_max);
  volume = apply_guidance(volume, left, guidance);
  volume = aggregate_paths(volume, params);
  const DisparityMap winners = winner_take_all(volume);
  return median_filter_3x3(subpixel_refine(volume, winners));
}

}  // namespace stereoguide
