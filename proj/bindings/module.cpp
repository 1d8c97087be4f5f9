#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stereoguide/adcensus.hpp"
#include "stereoguide/grid.hpp"
#include "stereoguide/guidance.hpp"
#include "stereoguide/io.hpp"
#include "stereoguide/metrics.hpp"
#include "stereoguide/sampling.hpp"
#include "stereoguide/sgm.hpp"

namespace py = pybind11;
namespace sg = stereoguide;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;
using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

sg::ImageGrid grid_from_array(const FloatArray& array) {
  if (array.ndim() != 2) throw std::invalid_argument("expected a 2-D image array");
  const int height = static_cast<int>(array.shape(0));
  const int width = static_cast<int>(array.shape(1));
  std::vector<float> data(static_cast<std::size_t>(width) * height);
  std::memcpy(data.data(), array.data(), data.size() * sizeof(float));
  return sg::ImageGrid(width, height, std::move(data));
}

sg::DisparityMap map_from_array(const FloatArray& array) {
  if (array.ndim() != 2) throw std::invalid_argument("expected a 2-D disparity array");
  const int height = static_cast<int>(array.shape(0));
  const int width = static_cast<int>(array.shape(1));
  sg::DisparityMap map(width, height);
  const float* src = array.data();
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const float v = src[static_cast<std::size_t>(y) * width + x];
      map.at(x, y) = std::isfinite(v) ? v : sg::kInvalidDisparity;
    }
  }
  return map;
}

py::array_t<float> array_from_map(const sg::DisparityMap& map) {
  py::array_t<float> out({map.height(), map.width()});
  std::memcpy(out.mutable_data(), map.data().data(),
              map.data().size() * sizeof(float));
  return out;
}

py::array_t<float> array_from_grid(const sg::ImageGrid& grid) {
  py::array_t<float> out({grid.height(), grid.width()});
  std::memcpy(out.mutable_data(), grid.data().data(),
              grid.data().size() * sizeof(float));
  return out;
}

sg::SparseDisparitySet points_from_array(const DoubleArray& array) {
  if (array.size() == 0) return sg::SparseDisparitySet();
  if (array.ndim() != 2 || array.shape(1) != 3) {
    throw std::invalid_argument("expected an N x 3 array of (x, y, d) rows");
  }
  const auto n = static_cast<std::size_t>(array.shape(0));
  const double* src = array.data();
  std::vector<sg::SparsePoint> points(n);
  for (std::size_t i = 0; i < n; ++i) {
    points[i].x = static_cast<int>(src[i * 3]);
    points[i].y = static_cast<int>(src[i * 3 + 1]);
    points[i].d = src[i * 3 + 2];
  }
  return sg::SparseDisparitySet(std::move(points));
}

py::array_t<double> array_from_points(const sg::SparseDisparitySet& set) {
  py::array_t<double> out({static_cast<py::ssize_t>(set.size()), py::ssize_t{3}});
  double* dst = out.mutable_data();
  for (std::size_t i = 0; i < set.size(); ++i) {
    dst[i * 3] = set[i].x;
    dst[i * 3 + 1] = set[i].y;
    dst[i * 3 + 2] = set[i].d;
  }
  return out;
}

sg::GuidanceParams make_params(double sigma_xy, double sigma_i, double gamma,
                               double k, double c, int window) {
  sg::GuidanceParams params;
  params.sigma_xy = sigma_xy;
  params.sigma_i = sigma_i;
  params.gamma = gamma;
  params.k = k;
  params.c = c;
  params.window = window;
  return params;
}

sg::GuidanceConfig make_guidance(const std::string& fusion, const DoubleArray& points,
                                 const sg::GuidanceParams& params) {
  if (fusion == "none") return sg::GuidanceConfig::none();
  if (fusion == "gauss") {
    return sg::GuidanceConfig::gauss(points_from_array(points), params);
  }
  if (fusion == "riverbed") {
    return sg::GuidanceConfig::riverbed(points_from_array(points), params);
  }
  throw std::invalid_argument("fusion must be 'none', 'gauss' or 'riverbed'");
}

py::dict report_to_dict(const sg::EvalReport& report) {
  py::dict out;
  out["n"] = report.n;
  out["skipped"] = report.skipped;
  out["avg_error"] = report.avg_error;
  out["thresholds"] = report.thresholds;
  out["outlier_rates"] = report.outlier_rates;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "LiDAR-guided stereo matching core";

  m.def(
      "match",
      [](const FloatArray& left, const FloatArray& right, const std::string& method,
         const std::string& fusion, const DoubleArray& points, int d_min, int d_max,
         double p1, double p2, int paths, double sigma_xy, double sigma_i,
         double gamma, double k, double c, int window) {
        const sg::ImageGrid l = grid_from_array(left);
        const sg::ImageGrid r = grid_from_array(right);
        const sg::GuidanceConfig guidance = make_guidance(
            fusion, points, make_params(sigma_xy, sigma_i, gamma, k, c, window));
        sg::DisparityMap result;
        if (method == "sgm") {
          sg::SgmParams params;
          params.d_min = d_min;
          params.d_max = d_max;
          params.p1 = static_cast<float>(p1);
          params.p2 = static_cast<float>(p2);
          params.paths = paths;
          result = sg::run_sgm(l, r, params, guidance);
        } else if (method == "adcensus") {
          sg::AdCensusParams params;
          params.d_min = d_min;
          params.d_max = d_max;
          result = sg::run_adcensus(l, r, params, guidance);
        } else {
          throw std::invalid_argument("method must be 'sgm' or 'adcensus'");
        }
        return array_from_map(result);
      },
      py::arg("left"), py::arg("right"), py::arg("method") = "sgm",
      py::arg("fusion") = "none", py::arg("points") = DoubleArray(),
      py::arg("d_min") = 0, py::arg("d_max") = 63, py::arg("p1") = 10.0,
      py::arg("p2") = 150.0, py::arg("paths") = 8, py::arg("sigma_xy") = 8.0,
      py::arg("sigma_i") = 8.0, py::arg("gamma") = 0.3, py::arg("k") = 10.0,
      py::arg("c") = 1.0, py::arg("window") = sg::kAutoWindow,
      "Dense disparity map from a rectified pair; invalid pixels are +inf");

  m.def(
      "sample",
      [](const FloatArray& gt, const std::string& density, std::uint64_t seed,
         const std::string& pattern) {
        sg::SampleSpec spec = sg::parse_density(density);
        spec.seed = seed;
        if (pattern == "grid") {
          spec.pattern = sg::SamplePattern::kGrid;
        } else if (pattern != "random") {
          throw std::invalid_argument("pattern must be 'random' or 'grid'");
        }
        const sg::SampleResult result = sg::sample_sparse(map_from_array(gt), spec);
        return py::make_tuple(array_from_points(result.guidance),
                              array_from_points(result.holdout));
      },
      py::arg("gt"), py::arg("density") = "5%", py::arg("seed") = 0,
      py::arg("pattern") = "random",
      "Split valid ground-truth pixels into guidance and holdout (x, y, d) rows");

  m.def(
      "evaluate",
      [](const FloatArray& disp, const DoubleArray& holdout,
         const std::vector<double>& thresholds) {
        return report_to_dict(
            sg::evaluate(map_from_array(disp), points_from_array(holdout), thresholds));
      },
      py::arg("disp"), py::arg("holdout"),
      py::arg("thresholds") = std::vector<double>{1.0, 2.0, 3.0},
      "Average absolute error and outlier rates over holdout points");

  m.def("auto_window_size", &sg::auto_window_size, py::arg("density"),
        "Smallest odd window w >= 3 with w*w*density > 1");
  m.def(
      "lidar_density",
      [](const DoubleArray& points, int width, int height, bool full_image) {
        const sg::ImageGrid image(width, height);
        return sg::lidar_density(points_from_array(points), image,
                                 full_image ? sg::DensityRegion::kFullImage
                                            : sg::DensityRegion::kPointBoundingBox);
      },
      py::arg("points"), py::arg("width"), py::arg("height"),
      py::arg("full_image") = false,
      "Point count over the pixel count of the covered region");
  m.def("gauss_multiplier", &sg::gauss_multiplier, py::arg("d"), py::arg("d_m"),
        py::arg("k"), py::arg("c"), "Cost multiplier at a projection point's pixel");
  m.def("riverbed_multiplier", &sg::riverbed_multiplier, py::arg("d"), py::arg("d_m"),
        py::arg("w"), py::arg("W"), py::arg("k"), py::arg("c"),
        "Cost multiplier for a homogeneous pixel at distance w, dissimilarity W");

  m.def(
      "read_pfm", [](const std::string& path) { return array_from_map(sg::read_pfm(path)); },
      py::arg("path"), "Disparity map from a grayscale PFM file; invalid -> +inf");
  m.def(
      "write_pfm",
      [](const FloatArray& map, const std::string& path) {
        sg::write_pfm(map_from_array(map), path);
      },
      py::arg("map"), py::arg("path"), "Write a disparity map as little-endian PFM");
  m.def(
      "read_disparity_png16",
      [](const std::string& path) {
        return array_from_map(sg::read_disparity_png16(path));
      },
      py::arg("path"), "Disparity map from a 16-bit PNG (value / 256, 0 = invalid)");
  m.def(
      "load_gray",
      [](const std::string& path) { return array_from_grid(sg::load_gray(path)); },
      py::arg("path"), "8-bit grayscale or RGB image as a float array in [0, 255]");
  m.def(
      "render_falsecolor",
      [](const FloatArray& map, const std::string& path) {
        sg::render_falsecolor(map_from_array(map), path);
      },
      py::arg("map"), py::arg("path"), "Write a blue-to-red false-color PNG");
  m.def(
      "read_sparse_csv",
      [](const std::string& path) { return array_from_points(sg::read_sparse_csv(path)); },
      py::arg("path"), "Sparse points from an x,y,d CSV file");
  m.def(
      "write_sparse_csv",
      [](const DoubleArray& points, const std::string& path) {
        sg::write_sparse_csv(points_from_array(points), path);
      },
      py::arg("points"), py::arg("path"), "Write sparse points as an x,y,d CSV file");

  m.attr("INVALID") = std::numeric_limits<float>::infinity();
#ifdef VERSION_INFO
  m.attr("__version__") = VERSION_INFO;
#else
  m.attr("__version__") = "dev";
#endif
}
