#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "stereoguide/grid.hpp"
#include "stereoguide/guidance.hpp"

namespace stereoguide {

/// Accuracy summary over a holdout set. `n` counts the scored points,
/// `skipped` the holdout points whose computed disparity was invalid;
/// n + skipped equals the holdout size. Rates are fractions in [0, 1],
/// parallel to `thresholds`.
struct EvalReport {
  std::size_t n = 0;
  std::size_t skipped = 0;
  double avg_error = 0.0;
  std::vector<double> thresholds;
  std::vector<double> outlier_rates;
};

/// Scores a disparity map against trusted holdout points. The average is
/// sum |d_i - d_m| / n over the points where the map is valid; the outlier
/// rate at threshold t counts errors strictly greater than t. Invalid map
/// values are skipped, never scored. Throws if a holdout point falls
/// outside the map, or if every point is skipped (empty report).
EvalReport evaluate(const DisparityMap& disp, const SparseDisparitySet& holdout,
                    const std::vector<double>& thresholds = {1.0, 2.0, 3.0});

/// Aligned plain-text rendering of the report.
std::string to_table(const EvalReport& report);

/// JSON object with keys n, skipped, avg_error and one outliers_gt_<t>px
/// entry per threshold.
std::string to_json(const EvalReport& report);

}  // namespace stereoguide
