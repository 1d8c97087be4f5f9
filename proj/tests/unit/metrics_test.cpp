#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "stereoguide/metrics.hpp"

namespace sg = stereoguide;

namespace {

sg::DisparityMap map_from(std::initializer_list<float> values, int width, int height) {
  sg::DisparityMap map(width, height);
  auto it = values.begin();
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) map.at(x, y) = *it++;
  }
  return map;
}

}  // namespace

TEST_CASE("a perfect map scores zero everywhere") {
  const sg::DisparityMap disp(6, 4, 7.5f);
  std::vector<sg::SparsePoint> points;
  for (int y = 0; y < 4; ++y) points.push_back({y, y, 7.5});
  const sg::EvalReport report = sg::evaluate(disp, sg::SparseDisparitySet(points));
  CHECK(report.n == 4);
  CHECK(report.skipped == 0);
  CHECK(report.avg_error == 0.0);
  REQUIRE(report.outlier_rates.size() == 3);
  for (double rate : report.outlier_rates) CHECK(rate == 0.0);
}

TEST_CASE("average and outlier rates over a known error ladder") {
  // errors 0.5, 1.5, 2.5, 3.5: average 2.0, rates 3/4, 2/4, 1/4
  const sg::DisparityMap disp = map_from({10.5f, 11.5f, 12.5f, 13.5f}, 4, 1);
  const sg::SparseDisparitySet holdout(
      {{0, 0, 10.0}, {1, 0, 10.0}, {2, 0, 10.0}, {3, 0, 10.0}});
  const sg::EvalReport report = sg::evaluate(disp, holdout);
  CHECK(report.n == 4);
  CHECK(report.avg_error == doctest::Approx(2.0));
  CHECK(report.outlier_rates[0] == doctest::Approx(0.75));
  CHECK(report.outlier_rates[1] == doctest::Approx(0.5));
  CHECK(report.outlier_rates[2] == doctest::Approx(0.25));
}

TEST_CASE("an error equal to the threshold is not an outlier") {
  const sg::DisparityMap disp = map_from({12.0f}, 1, 1);
  const sg::SparseDisparitySet holdout({{0, 0, 10.0}});
  const sg::EvalReport report = sg::evaluate(disp, holdout, {2.0, 1.999});
  CHECK(report.outlier_rates[0] == 0.0);  // 2.0 > 2.0 is false
  CHECK(report.outlier_rates[1] == 1.0);
}

TEST_CASE("invalid map values are skipped and excluded from n") {
  sg::DisparityMap disp(3, 1, 5.0f);
  disp.at(1, 0) = sg::kInvalidDisparity;
  const sg::SparseDisparitySet holdout({{0, 0, 5.0}, {1, 0, 5.0}, {2, 0, 6.0}});
  const sg::EvalReport report = sg::evaluate(disp, holdout);
  CHECK(report.n == 2);
  CHECK(report.skipped == 1);
  CHECK(report.avg_error == doctest::Approx(0.5));
}

TEST_CASE("evaluation matches the oracle on random fixtures") {
  std::mt19937_64 rng(97);
  for (int round = 0; round < 20; ++round) {
    sg::DisparityMap disp(12, 9);
    for (float& v : disp.data()) {
      v = (rng() % 10 == 0) ? sg::kInvalidDisparity
                            : static_cast<float>(rng() % 320) / 10.0f;
    }
    std::vector<sg::SparsePoint> points;
    for (int y = 0; y < 9; ++y) {
      for (int x = 0; x < 12; ++x) {
        if (rng() % 3 == 0) {
          points.push_back({x, y, static_cast<double>(rng() % 32)});
        }
      }
    }
    if (points.empty()) continue;
    const sg::SparseDisparitySet holdout(points);
    const std::vector<double> thresholds = {1.0, 2.0, 3.0};
    const oracle::MetricRef ref = oracle::metrics(disp, holdout, thresholds);
    if (ref.n == 0) {
      CHECK_THROWS_AS(sg::evaluate(disp, holdout, thresholds), std::invalid_argument);
      continue;
    }
    const sg::EvalReport report = sg::evaluate(disp, holdout, thresholds);
    CHECK(report.n == ref.n);
    CHECK(report.skipped == ref.skipped);
    CHECK(report.n + report.skipped == holdout.size());
    CHECK(report.avg_error == doctest::Approx(ref.avg).epsilon(1e-9));
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
      CHECK(report.outlier_rates[t] == doctest::Approx(ref.rates[t]).epsilon(1e-12));
    }
  }
}

TEST_CASE("degenerate holdouts are rejected") {
  const sg::DisparityMap disp(4, 4, 1.0f);
  SUBCASE("empty set") {
    CHECK_THROWS_AS(sg::evaluate(disp, sg::SparseDisparitySet()),
                    std::invalid_argument);
  }
  SUBCASE("point outside the map") {
    CHECK_THROWS_AS(sg::evaluate(disp, sg::SparseDisparitySet({{4, 0, 1.0}})),
                    std::invalid_argument);
    CHECK_THROWS_AS(sg::evaluate(disp, sg::SparseDisparitySet({{0, -1, 1.0}})),
                    std::invalid_argument);
  }
  SUBCASE("every point invalid in the map") {
    sg::DisparityMap holes(4, 4);  // all invalid
    CHECK_THROWS_AS(sg::evaluate(holes, sg::SparseDisparitySet({{1, 1, 2.0}})),
                    std::invalid_argument);
  }
}

TEST_CASE("json rendering carries the expected keys") {
  const sg::DisparityMap disp = map_from({10.5f, 11.5f, 12.5f, 13.5f}, 4, 1);
  const sg::SparseDisparitySet holdout(
      {{0, 0, 10.0}, {1, 0, 10.0}, {2, 0, 10.0}, {3, 0, 10.0}});
  const std::string json = sg::to_json(sg::evaluate(disp, holdout));
  CHECK(json.find("\"n\": 4") != std::string::npos);
  CHECK(json.find("\"skipped\": 0") != std::string::npos);
  CHECK(json.find("\"avg_error\": 2.0") != std::string::npos);
  CHECK(json.find("\"outliers_gt_1px\": 0.75") != std::string::npos);
  CHECK(json.find("\"outliers_gt_2px\": 0.5") != std::string::npos);
  CHECK(json.find("\"outliers_gt_3px\": 0.25") != std::string::npos);
  // key order is fixed
  CHECK(json.find("\"n\"") < json.find("\"skipped\""));
  CHECK(json.find("\"skipped\"") < json.find("\"avg_error\""));
  CHECK(json.find("\"avg_error\"") < json.find("\"outliers_gt_1px\""));
}

TEST_CASE("json labels non-integral thresholds without trailing zeros") {
  const sg::DisparityMap disp = map_from({10.0f}, 1, 1);
  const std::string json =
      sg::to_json(sg::evaluate(disp, sg::SparseDisparitySet({{0, 0, 10.0}}), {0.5}));
  CHECK(json.find("\"outliers_gt_0.5px\"") != std::string::npos);
}

TEST_CASE("table rendering lists every metric once") {
  const sg::DisparityMap disp = map_from({10.5f, 11.5f, 12.5f, 13.5f}, 4, 1);
  const sg::SparseDisparitySet holdout(
      {{0, 0, 10.0}, {1, 0, 10.0}, {2, 0, 10.0}, {3, 0, 10.0}});
  const std::string table = sg::to_table(sg::evaluate(disp, holdout));
  CHECK(table.find("scored") != std::string::npos);
  CHECK(table.find("skipped") != std::string::npos);
  CHECK(table.find("avg_error") != std::string::npos);
  CHECK(table.find("2.000000") != std::string::npos);
  CHECK(table.find("outliers>1px") != std::string::npos);
  CHECK(table.find("outliers>3px") != std::string::npos);
  CHECK(table.find("0.750000") != std::string::npos);
}