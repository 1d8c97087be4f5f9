#pragma once

#include <cstdint>
#include <vector>

#include "stereoguide/grid.hpp"
#include "stereoguide/guidance.hpp"

namespace stereoguide {

/// Parameter block following the published AD-Census defaults.
struct AdCensusParams {
  int d_min = 0;
  int d_max = 63;
  double lambda_ad = 10.0;
  double lambda_census = 30.0;
  int l1 = 34;          // outer arm limit, pixels
  int l2 = 17;          // inner arm limit before tau2 kicks in
  double tau1 = 20.0;   // loose intensity threshold
  double tau2 = 6.0;    // strict intensity threshold beyond l2
  double pi1 = 1.0;     // scanline penalty, small jumps
  double pi2 = 3.0;     // scanline penalty, large jumps
  double tau_so = 15.0; // intensity threshold for penalty adaptation
  int iterations = 2;   // cross aggregation passes

  void validate() const;
};

/// Per-pixel adaptive cross: arm lengths in the four axis directions.
/// Arms stop at intensity edges and at image borders; each is at most l1.
class CrossArms {
 public:
  CrossArms() = default;
  CrossArms(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }

  std::uint8_t left(int x, int y) const { return left_[flat(x, y)]; }
  std::uint8_t right(int x, int y) const { return right_[flat(x, y)]; }
  std::uint8_t up(int x, int y) const { return up_[flat(x, y)]; }
  std::uint8_t down(int x, int y) const { return down_[flat(x, y)]; }

  void set(int x, int y, std::uint8_t l, std::uint8_t r, std::uint8_t u, std::uint8_t d);

 private:
  std::size_t flat(int x, int y) const {
    assert(x >= 0 && x < width_ && y >= 0 && y < height_);
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> left_, right_, up_, down_;
};

/// Initial cost: rho(C_AD, lambda_ad) + rho(C_census, lambda_census) with
/// rho(c, lambda) = 1 - exp(-c / lambda). C_AD is the absolute intensity
/// difference and C_census the Hamming distance of 9x7 census descriptors
/// (62 bits, center excluded). Out-of-range correspondences take the worst
/// case (C_AD = 255, C_census = 62). Combined range [0, 2).
CostVolume ad_census_cost(const ImageGrid& left, const ImageGrid& right,
                          const AdCensusParams& params);

CrossArms build_cross_arms(const ImageGrid& image, const AdCensusParams& params);

/// Mean cost over each pixel's cross support region. Odd passes take the
/// union of horizontal segments across the vertical arm, even passes the
/// transpose.
CostVolume cross_aggregate(const CostVolume& volume, const CrossArms& arms,
                           int iterations);

/// Four-direction scanline optimization with penalties adapted from the
/// intensity differences of both images, averaged over the directions.
CostVolume scanline_optimize(const CostVolume& volume, const ImageGrid& left,
                             const ImageGrid& right, const AdCensusParams& params);

/// Full pipeline: AD-Census cost -> cross aggregation -> guidance
/// modulation -> scanline optimization -> winner-take-all -> subpixel
/// refinement -> 3x3 median.
DisparityMap run_adcensus(const ImageGrid& left, const ImageGrid& right,
                          const AdCensusParams& params,
                          const GuidanceConfig& guidance = GuidanceConfig::none());

}  // namespace stereoguide
