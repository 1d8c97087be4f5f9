#pragma once

#include <cstdint>
#include <string>

#include "stereoguide/grid.hpp"
#include "stereoguide/guidance.hpp"

namespace stereoguide {

enum class SampleMode { kRatio, kPercentage };

/// Random pattern draws uniformly without replacement; grid pattern keeps
/// every n-th valid pixel on both axes (stride derived from the density in
/// percentage mode), intended for the density sweep.
enum class SamplePattern { kRandom, kGrid };

struct SampleSpec {
  SampleMode mode = SampleMode::kPercentage;
  int ratio_n = 3;            // density 1 : n*n when mode == kRatio
  double percentage = 0.05;   // density p in (0, 1] when mode == kPercentage
  std::uint64_t seed = 0;
  SamplePattern pattern = SamplePattern::kRandom;

  static SampleSpec ratio(int n, std::uint64_t seed = 0);
  static SampleSpec percent(double p, std::uint64_t seed = 0);

  double density() const;
  void validate() const;
};

/// Parses a density argument: "1:NxN" (ratio), "P%" (percent) or a plain
/// real in (0, 1]. Throws std::invalid_argument on anything else.
SampleSpec parse_density(const std::string& text);

struct SampleResult {
  SparseDisparitySet guidance;
  SparseDisparitySet holdout;
};

/// Splits the valid pixels of a ground-truth map into a guidance set and
/// its complement. Random pattern: the guidance count is the density times
/// the valid count, rounded half to even, drawn uniformly without
/// replacement; identical output for identical (gt, spec). Both sets come
/// back in row-major pixel order. Throws if gt has no valid pixel.
SampleResult sample_sparse(const DisparityMap& gt, const SampleSpec& spec);

}  // namespace stereoguide
