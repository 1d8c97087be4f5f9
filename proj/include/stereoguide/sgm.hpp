#pragma once

#include <cstdint>
#include <vector>

#include "stereoguide/grid.hpp"
#include "stereoguide/guidance.hpp"

namespace stereoguide {

/// Per-pixel 24-bit census descriptor over a 5x5 window, center excluded.
/// Bits are laid out row-major over the window (first neighbor in the most
/// significant of the 24 bits); a bit is set iff that neighbor is strictly
/// darker than the center. Border neighbors use clamped coordinates.
class CensusGrid {
 public:
  CensusGrid() = default;
  CensusGrid(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }

  std::uint32_t at(int x, int y) const {
    assert(x >= 0 && x < width_ && y >= 0 && y < height_);
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }
  std::uint32_t& at(int x, int y) {
    assert(x >= 0 && x < width_ && y >= 0 && y < height_);
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint32_t> data_;
};

struct SgmParams {
  int d_min = 0;
  int d_max = 63;
  double p1 = 10.0;   // penalty for one-level jumps
  double p2 = 150.0;  // penalty for larger jumps, p2 >= p1 >= 0
  int paths = 8;      // 4 or 8 aggregation directions

  void validate() const;
};

CensusGrid census_transform(const ImageGrid& image);

/// cost(x, y, d) = Hamming distance between the left descriptor at (x, y)
/// and the right descriptor at (x - d, y); 24 (worst case) when x - d
/// falls outside the image.
CostVolume hamming_cost_volume(const CensusGrid& left, const CensusGrid& right,
                               int d_min, int d_max);

/// Multi-path cost aggregation. Per path r:
///   L_r(p, d) = C(p, d) + min(L_r(p-r, d),
///                             L_r(p-r, d+-1) + p1,
///                             min_k L_r(p-r, k) + p2) - min_k L_r(p-r, k)
/// Pixels with no predecessor along r start at L_r = C. The output is the
/// sum over the configured 4 or 8 paths.
CostVolume aggregate_paths(const CostVolume& volume, const SgmParams& params);

/// Full pipeline: census -> Hamming cost volume -> guidance modulation ->
/// path aggregation -> winner-take-all -> subpixel refinement -> 3x3 median.
DisparityMap run_sgm(const ImageGrid& left, const ImageGrid& right,
                     const SgmParams& params,
                     const GuidanceConfig& guidance = GuidanceConfig::none());

}  // namespace stereoguide
