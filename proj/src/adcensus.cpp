#include "stereoguide/adcensus.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace stereoguide {

namespace {

constexpr double kWorstAd = 255.0;
constexpr double kWorstCensus = 62.0;

// 9 wide x 7 high census window, center excluded: 62 bits.
std::vector<std::uint64_t> census_9x7(const ImageGrid& image) {
  std::vector<std::uint64_t> out(static_cast<std::size_t>(image.width()) * image.height());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const float center = image.at(x, y);
      std::uint64_t bits = 0;
      for (int dy = -3; dy <= 3; ++dy) {
        for (int dx = -4; dx <= 4; ++dx) {
          if (dx == 0 && dy == 0) continue;
          bits = (bits << 1) | (image.at_clamped(x + dx, y + dy) < center ? 1u : 0u);
        }
      }
      out[static_cast<std::size_t>(y) * image.width() + x] = bits;
    }
  }
  return out;
}

inline double rho(double cost, double lambda) { return 1.0 - std::exp(-cost / lambda); }

std::uint8_t extend_arm(const ImageGrid& image, int x, int y, int dx, int dy,
                        const AdCensusParams& params) {
  const float anchor = image.at(x, y);
  float prev = anchor;
  int len = 0;
  for (int n = 1; n <= params.l1; ++n) {
    const int nx = x + n * dx;
    const int ny = y + n * dy;
    if (!image.contains(nx, ny)) break;
    const float v = image.at(nx, ny);
    const double d_anchor = std::abs(v - anchor);
    if (d_anchor > params.tau1 || std::abs(v - prev) > params.tau1) break;
    if (n > params.l2 && d_anchor > params.tau2) break;
    len = n;
    prev = v;
  }
  if (len == 0 && image.contains(x + dx, y + dy)) len = 1;  // minimum support
  return static_cast<std::uint8_t>(len);
}

// One aggregation pass. horizontal_first: sum each pixel's horizontal
// segment, then accumulate those sums over the vertical arm (and the
// transpose otherwise). Counts are tracked so the result is a mean.
CostVolume aggregate_once(const CostVolume& volume, const CrossArms& arms,
                          bool horizontal_first) {
  const int width = volume.width();
  const int height = volume.height();
  const int levels = volume.levels();
  const std::size_t pixels = static_cast<std::size_t>(width) * height;

  CostVolume stage1(width, height, volume.d_min(), volume.d_max(), 0.0f);
  std::vector<std::uint32_t> count1(pixels);

  if (horizontal_first) {
    std::vector<double> prefix(static_cast<std::size_t>(width + 1));
    for (int y = 0; y < height; ++y) {
      for (int d = 0; d < levels; ++d) {
        prefix[0] = 0.0;
        for (int x = 0; x < width; ++x) {
          prefix[static_cast<std::size_t>(x) + 1] =
              prefix[static_cast<std::size_t>(x)] + volume.slice(x, y)[d];
        }
        for (int x = 0; x < width; ++x) {
          const int x0 = x - arms.left(x, y);
          const int x1 = x + arms.right(x, y);
          stage1.slice(x, y)[d] = static_cast<float>(
              prefix[static_cast<std::size_t>(x1) + 1] - prefix[static_cast<std::size_t>(x0)]);
        }
      }
      for (int x = 0; x < width; ++x) {
        count1[static_cast<std::size_t>(y) * width + x] =
            static_cast<std::uint32_t>(arms.left(x, y)) + arms.right(x, y) + 1;
      }
    }
    CostVolume out(width, height, volume.d_min(), volume.d_max(), 0.0f);
    for (int x = 0; x < width; ++x) {
      for (int y = 0; y < height; ++y) {
        const int y0 = y - arms.up(x, y);
        const int y1 = y + arms.down(x, y);
        float* dst = out.slice(x, y);
        double total_count = 0.0;
        for (int q = y0; q <= y1; ++q) {
          total_count += count1[static_cast<std::size_t>(q) * width + x];
        }
        for (int d = 0; d < levels; ++d) {
          double total = 0.0;
          for (int q = y0; q <= y1; ++q) total += stage1.slice(x, q)[d];
          dst[d] = static_cast<float>(total / total_count);
        }
      }
    }
    return out;
  }

  // vertical segments first, then the horizontal arm
  for (int x = 0; x < width; ++x) {
    for (int d = 0; d < levels; ++d) {
      std::vector<double> prefix(static_cast<std::size_t>(height + 1));
      prefix[0] = 0.0;
      for (int y = 0; y < height; ++y) {
        prefix[static_cast<std::size_t>(y) + 1] =
            prefix[static_cast<std::size_t>(y)] + volume.slice(x, y)[d];
      }
      for (int y = 0; y < height; ++y) {
        const int y0 = y - arms.up(x, y);
        const int y1 = y + arms.down(x, y);
        stage1.slice(x, y)[d] = static_cast<float>(
            prefix[static_cast<std::size_t>(y1) + 1] - prefix[static_cast<std::size_t>(y0)]);
      }
    }
    for (int y = 0; y < height; ++y) {
      count1[static_cast<std::size_t>(y) * width + x] =
          static_cast<std::uint32_t>(arms.up(x, y)) + arms.down(x, y) + 1;
    }
  }
  CostVolume out(width, height, volume.d_min(), volume.d_max(), 0.0f);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int x0 = x - arms.left(x, y);
      const int x1 = x + arms.right(x, y);
      float* dst = out.slice(x, y);
      double total_count = 0.0;
      for (int q = x0; q <= x1; ++q) {
        total_count += count1[static_cast<std::size_t>(y) * width + q];
      }
      for (int d = 0; d < levels; ++d) {
        double total = 0.0;
        for (int q = x0; q <= x1; ++q) total += stage1.slice(q, y)[d];
        dst[d] = static_cast<float>(total / total_count);
      }
    }
  }
  return out;
}

struct Direction {
  int dx;
  int dy;
};

// Penalties shrink across intensity edges in either image.
inline void adapted_penalties(double d1, double d2, const AdCensusParams& params,
                              double& p1, double& p2) {
  if (d1 < params.tau_so && d2 < params.tau_so) {
    p1 = params.pi1;
    p2 = params.pi2;
  } else if (d1 >= params.tau_so && d2 >= params.tau_so) {
    p1 = params.pi1 / 10.0;
    p2 = params.pi2 / 10.0;
  } else {
    p1 = params.pi1 / 4.0;
    p2 = params.pi2 / 4.0;
  }
}

void scanline_direction(const CostVolume& volume, const ImageGrid& left,
                        const ImageGrid& right, const AdCensusParams& params,
                        Direction dir, CostVolume& sum) {
  const int width = volume.width();
  const int height = volume.height();
  const int levels = volume.levels();
  const int d_min = volume.d_min();

  auto process_pixel = [&](int x, int y, const float* prev, float* cur) {
    const float* cost = volume.slice(x, y);
    if (prev == nullptr) {
      std::copy(cost, cost + levels, cur);
      return;
    }
    float prev_min = prev[0];
    for (int i = 1; i < levels; ++i) prev_min = std::min(prev_min, prev[i]);
    const double d1 = std::abs(left.at(x, y) - left.at(x - dir.dx, y - dir.dy));
    for (int i = 0; i < levels; ++i) {
      const int d = d_min + i;
      const double d2 = std::abs(right.at_clamped(x - d, y) -
                                 right.at_clamped(x - dir.dx - d, y - dir.dy));
      double p1, p2;
      adapted_penalties(d1, d2, params, p1, p2);
      float best = prev[i];
      if (i > 0) best = std::min(best, prev[i - 1] + static_cast<float>(p1));
      if (i + 1 < levels) best = std::min(best, prev[i + 1] + static_cast<float>(p1));
      best = std::min(best, prev_min + static_cast<float>(p2));
      cur[i] = cost[i] + best - prev_min;
    }
  };

  if (dir.dy == 0) {
    std::vector<float> prev(levels), cur(levels);
    const int x_begin = dir.dx > 0 ? 0 : width - 1;
    const int x_end = dir.dx > 0 ? width : -1;
    for (int y = 0; y < height; ++y) {
      bool has_prev = false;
      for (int x = x_begin; x != x_end; x += dir.dx) {
        process_pixel(x, y, has_prev ? prev.data() : nullptr, cur.data());
        has_prev = true;
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
      float* cur = cur_row.data() + static_cast<std::size_t>(x) * levels;
      const float* prev = (y == y_begin)
                              ? nullptr
                              : prev_row.data() + static_cast<std::size_t>(x) * levels;
      process_pixel(x, y, prev, cur);
      float* out = sum.slice(x, y);
      for (int i = 0; i < levels; ++i) out[i] += cur[i];
    }
    std::swap(prev_row, cur_row);
  }
}

}  // namespace

void AdCensusParams::validate() const {
  if (d_min < 0 || d_max < d_min) {
    throw std::invalid_argument("require d_max >= d_min >= 0");
  }
  if (!(lambda_ad > 0.0) || !(lambda_census > 0.0)) {
    throw std::invalid_argument("lambdas must be positive");
  }
  if (l1 <= 0 || l2 <= 0 || l1 <= l2) {
    throw std::invalid_argument("require L1 > L2 > 0");
  }
  if (l1 > 255) {
    throw std::invalid_argument("arm length limit exceeds storage width");
  }
  if (!(tau1 > 0.0) || !(tau2 > 0.0) || !(tau1 > tau2)) {
    throw std::invalid_argument("require tau1 > tau2 > 0");
  }
  if (!(pi1 >= 0.0) || !(pi2 >= 0.0) || !(tau_so > 0.0)) {
    throw std::invalid_argument("scanline penalties must be nonnegative");
  }
  if (iterations < 0) {
    throw std::invalid_argument("iterations must be nonnegative");
  }
}

CrossArms::CrossArms(int width, int height) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("cross arm dimensions must be positive");
  }
  const std::size_t n = static_cast<std::size_t>(width) * height;
  left_.assign(n, 0);
  right_.assign(n, 0);
  up_.assign(n, 0);
  down_.assign(n, 0);
}

void CrossArms::set(int x, int y, std::uint8_t l, std::uint8_t r, std::uint8_t u,
                    std::uint8_t d) {
  const std::size_t i = flat(x, y);
  left_[i] = l;
  right_[i] = r;
  up_[i] = u;
  down_[i] = d;
}

CostVolume ad_census_cost(const ImageGrid& left, const ImageGrid& right,
                          const AdCensusParams& params) {
  params.validate();
  if (left.width() != right.width() || left.height() != right.height()) {
    throw std::invalid_argument("stereo pair dimensions differ");
  }
  const std::vector<std::uint64_t> census_left = census_9x7(left);
  const std::vector<std::uint64_t> census_right = census_9x7(right);
  const int width = left.width();

  CostVolume volume(width, left.height(), params.d_min, params.d_max);
  for (int y = 0; y < left.height(); ++y) {
    for (int x = 0; x < width; ++x) {
      float* slice = volume.slice(x, y);
      const std::size_t il = static_cast<std::size_t>(y) * width + x;
      for (int d = params.d_min; d <= params.d_max; ++d) {
        const int xr = x - d;
        double c_ad, c_census;
        if (xr < 0 || xr >= width) {
          c_ad = kWorstAd;
          c_census = kWorstCensus;
        } else {
          const std::size_t ir = static_cast<std::size_t>(y) * width + xr;
          c_ad = std::abs(left.at(x, y) - right.at(xr, y));
          c_census = static_cast<double>(std::popcount(census_left[il] ^ census_right[ir]));
        }
        slice[d - params.d_min] = static_cast<float>(rho(c_ad, params.lambda_ad) +
                                                     rho(c_census, params.lambda_census));
      }
    }
  }
  return volume;
}

CrossArms build_cross_arms(const ImageGrid& image, const AdCensusParams& params) {
  params.validate();
  CrossArms arms(image.width(), image.height());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      arms.set(x, y, extend_arm(image, x, y, -1, 0, params),
               extend_arm(image, x, y, 1, 0, params),
               extend_arm(image, x, y, 0, -1, params),
               extend_arm(image, x, y, 0, 1, params));
    }
  }
  return arms;
}

CostVolume cross_aggregate(const CostVolume& volume, const CrossArms& arms,
                           int iterations) {
  if (arms.width() != volume.width() || arms.height() != volume.height()) {
    throw std::invalid_argument("cross arms do not match volume dimensions");
  }
  CostVolume out = volume;
  for (int it = 1; it <= iterations; ++it) {
    out = aggregate_once(out, arms, it % 2 == 1);
  }
  return out;
}

CostVolume scanline_optimize(const CostVolume& volume, const ImageGrid& left,
                             const ImageGrid& right, const AdCensusParams& params) {
  params.validate();
  if (left.width() != volume.width() || left.height() != volume.height() ||
      right.width() != volume.width() || right.height() != volume.height()) {
    throw std::invalid_argument("images do not match volume dimensions");
  }
  CostVolume sum(volume.width(), volume.height(), volume.d_min(), volume.d_max(), 0.0f);
  constexpr std::array<Direction, 4> dirs = {{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
  for (const Direction& dir : dirs) {
    scanline_direction(volume, left, right, params, dir, sum);
  }
  for (float& v : sum.data()) v *= 0.25f;
  return sum;
}

DisparityMap run_adcensus(const ImageGrid& left, const ImageGrid& right,
                          const AdCensusParams& params, const GuidanceConfig& guidance) {
  params.validate();
  if (left.width() != right.width() || left.height() != right.height()) {
    throw std::invalid_argument("stereo pair dimensions differ");
  }
  CostVolume volume = ad_census_cost(left, right, params);
  const CrossArms arms = build_cross_arms(left, params);
  volume = cross_aggregate(volume, arms, params.iterations);
  volume = apply_guidance(volume, left, guidance);
  volume = scanline_optimize(volume, left, right, params);
  const DisparityMap winners = winner_take_all(volume);
  return median_filter_3x3(subpixel_refine(volume, winners));
}

}  // namespace stereoguide
