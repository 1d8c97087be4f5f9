#include "stereoguide/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace stereoguide {

namespace {

// Round to nearest, halves to even. Deterministic regardless of the
// floating-point environment.
std::size_t round_half_even(double v) {
  const double floor_v = std::floor(v);
  const double frac = v - floor_v;
  double out;
  if (frac > 0.5) {
    out = floor_v + 1.0;
  } else if (frac < 0.5) {
    out = floor_v;
  } else {
    out = (std::fmod(floor_v, 2.0) == 0.0) ? floor_v : floor_v + 1.0;
  }
  return static_cast<std::size_t>(out);
}

// Unbiased draw from [0, m) by rejection. std::uniform_int_distribution is
// implementation-defined, so it cannot back a cross-platform seed contract.
std::uint64_t bounded_uniform(std::mt19937_64& rng, std::uint64_t m) {
  if (m <= 1) return 0;
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - max % m;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % m;
}

SparsePoint point_at(const DisparityMap& gt, std::uint32_t flat) {
  const int width = gt.width();
  const int x = static_cast<int>(flat % static_cast<std::uint32_t>(width));
  const int y = static_cast<int>(flat / static_cast<std::uint32_t>(width));
  return SparsePoint{x, y, static_cast<double>(gt.at(x, y))};
}

}  // namespace

SampleSpec SampleSpec::ratio(int n, std::uint64_t seed) {
  SampleSpec spec;
  spec.mode = SampleMode::kRatio;
  spec.ratio_n = n;
  spec.seed = seed;
  spec.validate();
  return spec;
}

SampleSpec SampleSpec::percent(double p, std::uint64_t seed) {
  SampleSpec spec;
  spec.mode = SampleMode::kPercentage;
  spec.percentage = p;
  spec.seed = seed;
  spec.validate();
  return spec;
}

double SampleSpec::density() const {
  if (mode == SampleMode::kRatio) {
    return 1.0 / (static_cast<double>(ratio_n) * ratio_n);
  }
  return percentage;
}

void SampleSpec::validate() const {
  if (mode == SampleMode::kRatio && ratio_n < 1) {
    throw std::invalid_argument("ratio n must be >= 1");
  }
  if (mode == SampleMode::kPercentage &&
      !(percentage > 0.0 && percentage <= 1.0)) {
    throw std::invalid_argument("percentage must lie in (0, 1]");
  }
}

SampleSpec parse_density(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("empty density argument");
  SampleSpec spec;
  std::size_t pos = 0;
  if (text.rfind("1:", 0) == 0) {
    const std::string body = text.substr(2);
    const std::size_t x_at = body.find_first_of("xX");
    if (x_at == std::string::npos) {
      throw std::invalid_argument("ratio density must look like 1:NxN");
    }
    int a, b;
    try {
      a = std::stoi(body.substr(0, x_at), &pos);
      if (pos != x_at) throw std::invalid_argument("");
      b = std::stoi(body.substr(x_at + 1), &pos);
      if (pos != body.size() - x_at - 1) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw std::invalid_argument("ratio density must look like 1:NxN");
    }
    if (a != b) throw std::invalid_argument("ratio density must be square, 1:NxN");
    spec.mode = SampleMode::kRatio;
    spec.ratio_n = a;
    spec.validate();
    return spec;
  }
  double value;
  bool is_percent = false;
  std::string body = text;
  if (!body.empty() && body.back() == '%') {
    is_percent = true;
    body.pop_back();
  }
  try {
    value = std::stod(body, &pos);
    if (pos != body.size()) throw std::invalid_argument("");
  } catch (const std::exception&) {
    throw std::invalid_argument("density must be 1:NxN, P% or a real in (0, 1]");
  }
  spec.mode = SampleMode::kPercentage;
  spec.percentage = is_percent ? value / 100.0 : value;
  spec.validate();
  return spec;
}

SampleResult sample_sparse(const DisparityMap& gt, const SampleSpec& spec) {
  spec.validate();
  if (static_cast<std::size_t>(gt.width()) * gt.height() >
      std::numeric_limits<std::uint32_t>::max()) {
    throw std::invalid_argument("map too large for the sampler index space");
  }

  std::vector<std::uint32_t> valid;
  for (int y = 0; y < gt.height(); ++y) {
    for (int x = 0; x < gt.width(); ++x) {
      if (gt.valid(x, y)) {
        valid.push_back(static_cast<std::uint32_t>(y) * gt.width() + x);
      }
    }
  }
  if (valid.empty()) {
    throw std::invalid_argument("ground truth contains no valid pixel");
  }

  std::vector<std::uint32_t> picked;
  std::vector<std::uint32_t> rest;

  if (spec.pattern == SamplePattern::kGrid) {
    int stride;
    if (spec.mode == SampleMode::kRatio) {
      stride = spec.ratio_n;
    } else {
      stride = std::max(1, static_cast<int>(std::llround(std::sqrt(1.0 / spec.percentage))));
    }
    const int phase = stride / 2;
    for (std::uint32_t flat : valid) {
      const int x = static_cast<int>(flat % static_cast<std::uint32_t>(gt.width()));
      const int y = static_cast<int>(flat / static_cast<std::uint32_t>(gt.width()));
      if (x % stride == phase && y % stride == phase) {
        picked.push_back(flat);
      } else {
        rest.push_back(flat);
      }
    }
  } else {
    const std::size_t target = round_half_even(
        static_cast<double>(valid.size()) * spec.density());
    std::mt19937_64 rng(spec.seed);
    // Partial Fisher-Yates: after i steps the prefix holds the sample.
    for (std::size_t i = 0; i < target; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(
          bounded_uniform(rng, static_cast<std::uint64_t>(valid.size() - i)));
      std::swap(valid[i], valid[j]);
    }
    picked.assign(valid.begin(), valid.begin() + static_cast<std::ptrdiff_t>(target));
    rest.assign(valid.begin() + static_cast<std::ptrdiff_t>(target), valid.end());
    std::sort(picked.begin(), picked.end());
    std::sort(rest.begin(), rest.end());
  }

  std::vector<SparsePoint> guidance_points;
  guidance_points.reserve(picked.size());
  for (std::uint32_t flat : picked) guidance_points.push_back(point_at(gt, flat));
  std::vector<SparsePoint> holdout_points;
  holdout_points.reserve(rest.size());
  for (std::uint32_t flat : rest) holdout_points.push_back(point_at(gt, flat));

  return SampleResult{SparseDisparitySet(std::move(guidance_points)),
                      SparseDisparitySet(std::move(holdout_points))};
}

}  // namespace stereoguide
