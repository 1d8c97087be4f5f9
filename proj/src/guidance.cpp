#include "stereoguide/guidance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace stereoguide {

namespace {

std::uint64_t pixel_key(int x, int y) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(y)) << 32) |
         static_cast<std::uint32_t>(x);
}

void check_point_disparities(const SparseDisparitySet& points, const CostVolume& volume) {
  for (const SparsePoint& p : points.points()) {
    if (!(p.d >= volume.d_min() && p.d <= volume.d_max())) {
      throw std::invalid_argument("point disparity " + std::to_string(p.d) +
                                  " at (" + std::to_string(p.x) + "," + std::to_string(p.y) +
                                  ") outside volume range");
    }
  }
}

}  // namespace

SparseDisparitySet::SparseDisparitySet(std::vector<SparsePoint> points)
    : points_(std::move(points)) {
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(points_.size());
  for (const SparsePoint& p : points_) {
    if (!seen.insert(pixel_key(p.x, p.y)).second) {
      throw std::invalid_argument("duplicate sparse point at (" + std::to_string(p.x) +
                                  "," + std::to_string(p.y) + ")");
    }
  }
}

void GuidanceParams::validate() const {
  if (!(sigma_xy > 0.0) || !(sigma_i > 0.0)) {
    throw std::invalid_argument("sigma_xy and sigma_i must be positive");
  }
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("gamma must lie in (0, 1)");
  }
  if (!(k > 0.0) || !(c > 0.0)) {
    throw std::invalid_argument("k and c must be positive");
  }
  if (window != kAutoWindow && (window < 3 || window % 2 == 0)) {
    throw std::invalid_argument("explicit window must be odd and >= 3");
  }
}

GuidanceField::GuidanceField(int width, int height)
    : width_(width), height_(height) {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("field dimensions must be positive");
  }
  const std::size_t n = static_cast<std::size_t>(width) * height;
  owner_.assign(n, -1);
  weight_.assign(n, 0.0f);
  dist_.assign(n, 0.0f);
}

void GuidanceField::claim(int x, int y, int owner, float dissimilarity, float distance) {
  const std::size_t i = flat(x, y);
  owner_[i] = owner;
  weight_[i] = dissimilarity;
  dist_[i] = distance;
}

std::size_t GuidanceField::claimed_count() const {
  return static_cast<std::size_t>(std::count_if(owner_.begin(), owner_.end(),
                                                [](int o) { return o >= 0; }));
}

double dissimilarity_weight(const SparsePoint& center, int px, int py,
                            const ImageGrid& image, const GuidanceParams& params) {
  if (!image.contains(px, py) || !image.contains(center.x, center.y)) {
    throw std::invalid_argument("dissimilarity_weight: coordinates outside image");
  }
  const double dx = px - center.x;
  const double dy = py - center.y;
  const double di = image.at(px, py) - image.at(center.x, center.y);
  const double exponent = (dx * dx + dy * dy) / (2.0 * params.sigma_xy * params.sigma_xy) +
                          (di * di) / (2.0 * params.sigma_i * params.sigma_i);
  return 1.0 - std::exp(-exponent);
}

int auto_window_size(double density) {
  if (!(density > 0.0)) {
    throw std::invalid_argument("density must be positive");
  }
  int s = 3;
  while (!(static_cast<double>(s) * s * density > 1.0)) {
    s += 2;
  }
  return s;
}

double lidar_density(const SparseDisparitySet& points, const ImageGrid& image,
                     DensityRegion region) {
  if (points.empty()) {
    throw std::invalid_argument("density of an empty point set is undefined");
  }
  double pixels = 0.0;
  if (region == DensityRegion::kFullImage) {
    pixels = static_cast<double>(image.width()) * image.height();
  } else {
    int min_x = points[0].x, max_x = points[0].x;
    int min_y = points[0].y, max_y = points[0].y;
    for (const SparsePoint& p : points.points()) {
      min_x = std::min(min_x, p.x);
      max_x = std::max(max_x, p.x);
      min_y = std::min(min_y, p.y);
      max_y = std::max(max_y, p.y);
    }
    pixels = static_cast<double>(max_x - min_x + 1) * (max_y - min_y + 1);
  }
  return static_cast<double>(points.size()) / pixels;
}

int effective_window(const SparsePoint& point, const SparseDisparitySet& all_points,
                     const GuidanceParams& params, double density) {
  int s = params.window == kAutoWindow ? auto_window_size(density) : params.window;
  while (s > 1) {
    const int radius = (s - 1) / 2;
    bool conflict = false;
    for (const SparsePoint& other : all_points.points()) {
      if (other.x == point.x && other.y == point.y) continue;
      if (std::abs(other.x - point.x) <= radius && std::abs(other.y - point.y) <= radius) {
        conflict = true;
        break;
      }
    }
    if (!conflict) break;
    s -= 2;
  }
  return s;
}

GuidanceField build_guidance_field(const SparseDisparitySet& points,
                                   const ImageGrid& image,
                                   const GuidanceParams& params) {
  params.validate();
  GuidanceField field(image.width(), image.height());
  if (points.empty()) return field;

  for (const SparsePoint& p : points.points()) {
    if (!image.contains(p.x, p.y)) {
      throw std::invalid_argument("sparse point (" + std::to_string(p.x) + "," +
                                  std::to_string(p.y) + ") outside image");
    }
  }

  const double density = lidar_density(points, image);
  std::vector<float> best_w(static_cast<std::size_t>(image.width()) * image.height(),
                            std::numeric_limits<float>::infinity());

  for (std::size_t idx = 0; idx < points.size(); ++idx) {
    const SparsePoint& p = points[idx];
    const int radius = (effective_window(p, points, params, density) - 1) / 2;
    for (int y = std::max(0, p.y - radius); y <= std::min(image.height() - 1, p.y + radius); ++y) {
      for (int x = std::max(0, p.x - radius); x <= std::min(image.width() - 1, p.x + radius); ++x) {
        double w_diss;
        if (x == p.x && y == p.y) {
          w_diss = 0.0;
        } else {
          w_diss = dissimilarity_weight(p, x, y, image, params);
          if (!(w_diss < params.gamma)) continue;
        }
        const std::size_t flat = static_cast<std::size_t>(y) * image.width() + x;
        if (static_cast<float>(w_diss) < best_w[flat]) {
          best_w[flat] = static_cast<float>(w_diss);
          const double dx = x - p.x;
          const double dy = y - p.y;
          field.claim(x, y, static_cast<int>(idx), static_cast<float>(w_diss),
                      static_cast<float>(std::sqrt(dx * dx + dy * dy)));
        }
      }
    }
  }
  return field;
}

double gauss_multiplier(double d, double d_m, double k, double c) {
  const double t = d - d_m;
  return k * (1.0 - std::exp(-(t * t) / (2.0 * c * c)));
}

double riverbed_multiplier(double d, double d_m, double w, double W, double k, double c) {
  if (d <= d_m - w) {
    const double t = d - d_m + w;
    return k * (1.0 - std::exp(-(t * t) / (2.0 * c * c))) + W;
  }
  if (d >= d_m + w) {
    const double t = d - d_m - w;
    return k * (1.0 - std::exp(-(t * t) / (2.0 * c * c))) + W;
  }
  return W;
}

CostVolume gauss_modulate(const CostVolume& volume, const SparseDisparitySet& points,
                          const GuidanceParams& params) {
  params.validate();
  check_point_disparities(points, volume);
  CostVolume out = volume;
  for (const SparsePoint& p : points.points()) {
    if (p.x < 0 || p.x >= volume.width() || p.y < 0 || p.y >= volume.height()) {
      throw std::invalid_argument("sparse point outside cost volume");
    }
    float* slice = out.slice(p.x, p.y);
    for (int d = volume.d_min(); d <= volume.d_max(); ++d) {
      slice[d - volume.d_min()] = static_cast<float>(
          gauss_multiplier(d, p.d, params.k, params.c) * slice[d - volume.d_min()]);
    }
  }
  return out;
}

CostVolume riverbed_modulate(const CostVolume& volume, const GuidanceField& field,
                             const SparseDisparitySet& points,
                             const GuidanceParams& params) {
  params.validate();
  if (field.width() != volume.width() || field.height() != volume.height()) {
    throw std::invalid_argument("guidance field does not match volume dimensions");
  }
  CostVolume out = volume;
  for (int y = 0; y < volume.height(); ++y) {
    for (int x = 0; x < volume.width(); ++x) {
      if (!field.claimed(x, y)) continue;
      const int owner = field.owner(x, y);
      if (owner < 0 || static_cast<std::size_t>(owner) >= points.size()) {
        throw std::invalid_argument("guidance field owner index outside point set");
      }
      const double d_m = points[static_cast<std::size_t>(owner)].d;
      if (!(d_m >= volume.d_min() && d_m <= volume.d_max())) {
        throw std::invalid_argument("owner disparity outside volume range");
      }
      const double w = field.distance(x, y);
      const double W = field.dissimilarity(x, y);
      float* slice = out.slice(x, y);
      for (int d = volume.d_min(); d <= volume.d_max(); ++d) {
        slice[d - volume.d_min()] = static_cast<float>(
            riverbed_multiplier(d, d_m, w, W, params.k, params.c) *
            slice[d - volume.d_min()]);
      }
    }
  }
  return out;
}

GuidanceConfig GuidanceConfig::gauss(SparseDisparitySet pts, GuidanceParams p) {
  return {FusionMode::kGauss, std::move(pts), p};
}

GuidanceConfig GuidanceConfig::riverbed(SparseDisparitySet pts, GuidanceParams p) {
  return {FusionMode::kRiverbed, std::move(pts), p};
}

CostVolume apply_guidance(const CostVolume& volume, const ImageGrid& left,
                          const GuidanceConfig& config) {
  if (config.mode == FusionMode::kNone || config.points.empty()) {
    return volume;
  }
  if (config.mode == FusionMode::kGauss) {
    return gauss_modulate(volume, config.points, config.params);
  }
  const GuidanceField field = build_guidance_field(config.points, left, config.params);
  return riverbed_modulate(volume, field, config.points, config.params);
}

SparseDisparitySet read_sparse_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path);
  }
  std::vector<SparsePoint> points;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line == "x,y,d") continue;  // optional header
    SparsePoint p;
    char extra;
    std::istringstream ss(line);
    char c1 = 0, c2 = 0;
    if (!(ss >> p.x >> c1 >> p.y >> c2 >> p.d) || c1 != ',' || c2 != ',' || (ss >> extra)) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": malformed sparse point record");
    }
    points.push_back(p);
  }
  return SparseDisparitySet(std::move(points));
}

void write_sparse_csv(const SparseDisparitySet& points, const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary keeps LF endings everywhere
  if (!out) {
    throw std::runtime_error("cannot open " + path + " for writing");
  }
  out << "x,y,d\n";
  char buf[96];
  for (const SparsePoint& p : points.points()) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%.9g\n", p.x, p.y, p.d);
    out << buf;
  }
  if (!out) {
    throw std::runtime_error("write failed for " + path);
  }
}

}  // namespace stereoguide
