#include "stereoguide/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "json.hpp"

namespace stereoguide {

namespace {

// "1" for integral thresholds, shortest round-trip form otherwise.
std::string threshold_label(double t) {
  if (t == std::floor(t) && std::abs(t) < 1e9) {
    return std::to_string(static_cast<long long>(t));
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", t);
  return buf;
}

}  // namespace

EvalReport evaluate(const DisparityMap& disp, const SparseDisparitySet& holdout,
                    const std::vector<double>& thresholds) {
  for (const SparsePoint& p : holdout.points()) {
    if (!disp.contains(p.x, p.y)) {
      throw std::invalid_argument("holdout point outside the disparity map");
    }
  }

  EvalReport report;
  report.thresholds = thresholds;
  report.outlier_rates.assign(thresholds.size(), 0.0);

  double error_sum = 0.0;
  std::vector<std::size_t> outliers(thresholds.size(), 0);
  for (const SparsePoint& p : holdout.points()) {
    const float d = disp.at(p.x, p.y);
    if (!disparity_valid(d)) {
      ++report.skipped;
      continue;
    }
    const double err = std::abs(static_cast<double>(d) - p.d);
    error_sum += err;
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
      if (err > thresholds[t]) ++outliers[t];
    }
    ++report.n;
  }
  if (report.n == 0) {
    throw std::invalid_argument("no scoreable holdout points (empty report)");
  }
  report.avg_error = error_sum / static_cast<double>(report.n);
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    report.outlier_rates[t] =
        static_cast<double>(outliers[t]) / static_cast<double>(report.n);
  }
  return report;
}

std::string to_table(const EvalReport& report) {
  char line[128];
  std::string out;
  std::snprintf(line, sizeof(line), "%-16s %zu\n", "scored", report.n);
  out += line;
  std::snprintf(line, sizeof(line), "%-16s %zu\n", "skipped", report.skipped);
  out += line;
  std::snprintf(line, sizeof(line), "%-16s %.6f\n", "avg_error", report.avg_error);
  out += line;
  for (std::size_t t = 0; t < report.thresholds.size(); ++t) {
    const std::string label = "outliers>" + threshold_label(report.thresholds[t]) + "px";
    std::snprintf(line, sizeof(line), "%-16s %.6f\n", label.c_str(),
                  report.outlier_rates[t]);
    out += line;
  }
  return out;
}

std::string to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["n"] = report.n;
  j["skipped"] = report.skipped;
  j["avg_error"] = report.avg_error;
  for (std::size_t t = 0; t < report.thresholds.size(); ++t) {
    j["outliers_gt_" + threshold_label(report.thresholds[t]) + "px"] =
        report.outlier_rates[t];
  }
  return j.dump(2);
}

}  // namespace stereoguide
