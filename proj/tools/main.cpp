#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "stereoguide/adcensus.hpp"
#include "stereoguide/guidance.hpp"
#include "stereoguide/io.hpp"
#include "stereoguide/metrics.hpp"
#include "stereoguide/sampling.hpp"
#include "stereoguide/sgm.hpp"

namespace sg = stereoguide;

namespace {

// Exit classes: 0 success, 1 usage, 2 data/format, 3 internal.
struct CliError : std::runtime_error {
  int code;
  CliError(int code_, const std::string& message)
      : std::runtime_error(message), code(code_) {}
};

int classify(const std::exception& e) {
  if (dynamic_cast<const sg::FormatError*>(&e)) return 2;
  if (dynamic_cast<const std::invalid_argument*>(&e)) return 2;
  if (dynamic_cast<const std::runtime_error*>(&e)) return 2;
  return 3;
}

// Runs one pipeline stage and names it in any failure diagnostic.
template <typename F>
auto stage(const char* name, F&& fn) {
  try {
    return fn();
  } catch (const CliError&) {
    throw;
  } catch (const std::exception& e) {
    throw CliError(classify(e),
                   std::string("stage '") + name + "' failed: " + e.what());
  }
}

// Disparity container sniffing: PFM magic or PNG signature.
sg::DisparityMap read_disparity_auto(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError(2, "cannot open '" + path + "'");
  char head[2] = {0, 0};
  in.read(head, 2);
  in.close();
  if (head[0] == 'P' && (head[1] == 'f' || head[1] == 'F')) {
    return sg::read_pfm(path);
  }
  return sg::read_disparity_png16(path);
}

struct RunConfig {
  std::string left_path;
  std::string right_path;
  std::string method = "sgm";
  std::string fusion = "none";
  std::string guidance_path;
  std::string calib_path;
  std::string output_path;
  std::string render_path;
  int d_min = 0;
  int d_max = 63;
  bool range_given = false;
  int window = 0;  // 0 = auto
  double sigma_xy = 8.0;
  double sigma_i = 8.0;
  double gamma = 0.3;
  double k = 10.0;
  double c = 1.0;
  double p1 = 10.0;
  double p2 = 150.0;
  int paths = 8;
};

sg::GuidanceParams guidance_params(const RunConfig& cfg) {
  sg::GuidanceParams params;
  params.sigma_xy = cfg.sigma_xy;
  params.sigma_i = cfg.sigma_i;
  params.gamma = cfg.gamma;
  params.k = cfg.k;
  params.c = cfg.c;
  params.window = cfg.window;
  params.validate();
  return params;
}

sg::GuidanceConfig make_guidance(const RunConfig& cfg, sg::SparseDisparitySet points) {
  if (cfg.fusion == "gauss") {
    return sg::GuidanceConfig::gauss(std::move(points), guidance_params(cfg));
  }
  if (cfg.fusion == "riverbed") {
    return sg::GuidanceConfig::riverbed(std::move(points), guidance_params(cfg));
  }
  return sg::GuidanceConfig::none();
}

sg::DisparityMap run_matcher(const RunConfig& cfg, const sg::ImageGrid& left,
                             const sg::ImageGrid& right,
                             const sg::GuidanceConfig& guidance) {
  if (cfg.method == "sgm") {
    sg::SgmParams params;
    params.d_min = cfg.d_min;
    params.d_max = cfg.d_max;
    params.p1 = static_cast<float>(cfg.p1);
    params.p2 = static_cast<float>(cfg.p2);
    params.paths = cfg.paths;
    return sg::run_sgm(left, right, params, guidance);
  }
  sg::AdCensusParams params;
  params.d_min = cfg.d_min;
  params.d_max = cfg.d_max;
  return sg::run_adcensus(left, right, params, guidance);
}

void announce_guidance(const RunConfig& cfg, const sg::SparseDisparitySet& points,
                       const sg::ImageGrid& left) {
  const double density = sg::lidar_density(points, left);
  const int window = cfg.window == sg::kAutoWindow
                         ? sg::auto_window_size(density)
                         : cfg.window;
  std::fprintf(stderr, "guidance: %zu points, density %.6g, window %d\n",
               points.size(), density, window);
}

int cmd_match(RunConfig& cfg) {
  // flag surface validated before any file is touched
  if (cfg.fusion != "none" && cfg.guidance_path.empty()) {
    throw CliError(1, "--fusion " + cfg.fusion + " requires --guidance");
  }
  if (cfg.fusion == "none" && !cfg.guidance_path.empty()) {
    std::fprintf(stderr, "warning: --guidance ignored with --fusion none\n");
  }

  const sg::ImageGrid left =
      stage("load left image", [&] { return sg::load_gray(cfg.left_path); });
  const sg::ImageGrid right =
      stage("load right image", [&] { return sg::load_gray(cfg.right_path); });
  if (!cfg.calib_path.empty() && !cfg.range_given) {
    stage("read calibration", [&] {
      std::tie(cfg.d_min, cfg.d_max) = sg::read_calib(cfg.calib_path);
    });
  }

  sg::GuidanceConfig guidance = sg::GuidanceConfig::none();
  if (cfg.fusion != "none") {
    sg::SparseDisparitySet points = stage("read guidance", [&] {
      return sg::read_sparse_csv(cfg.guidance_path);
    });
    announce_guidance(cfg, points, left);
    guidance = make_guidance(cfg, std::move(points));
  }

  const sg::DisparityMap disparity =
      stage("match", [&] { return run_matcher(cfg, left, right, guidance); });
  stage("write disparity", [&] { sg::write_pfm(disparity, cfg.output_path); });
  if (!cfg.render_path.empty()) {
    stage("render", [&] { sg::render_falsecolor(disparity, cfg.render_path); });
  }
  return 0;
}

int cmd_sample(const std::string& gt_path, const std::string& density,
               std::uint64_t seed, const std::string& pattern,
               const std::string& guidance_out, const std::string& holdout_out) {
  sg::SampleSpec spec = stage("parse density", [&] { return sg::parse_density(density); });
  spec.seed = seed;
  spec.pattern =
      pattern == "grid" ? sg::SamplePattern::kGrid : sg::SamplePattern::kRandom;

  const sg::DisparityMap gt =
      stage("load ground truth", [&] { return read_disparity_auto(gt_path); });
  const sg::SampleResult result =
      stage("sample", [&] { return sg::sample_sparse(gt, spec); });
  stage("write guidance", [&] { sg::write_sparse_csv(result.guidance, guidance_out); });
  stage("write holdout", [&] { sg::write_sparse_csv(result.holdout, holdout_out); });
  std::fprintf(stderr, "sampled %zu guidance points, %zu holdout points\n",
               result.guidance.size(), result.holdout.size());
  return 0;
}

int cmd_eval(const std::string& disp_path, const std::string& holdout_path) {
  const sg::DisparityMap disp =
      stage("load disparity", [&] { return read_disparity_auto(disp_path); });
  const sg::SparseDisparitySet holdout =
      stage("read holdout", [&] { return sg::read_sparse_csv(holdout_path); });
  const sg::EvalReport report =
      stage("evaluate", [&] { return sg::evaluate(disp, holdout); });
  std::cout << sg::to_table(report) << sg::to_json(report) << "\n";
  return 0;
}

int cmd_render(const std::string& input, const std::string& output) {
  const sg::DisparityMap disp =
      stage("load disparity", [&] { return read_disparity_auto(input); });
  stage("render", [&] { sg::render_falsecolor(disp, output); });
  return 0;
}

struct SweepCell {
  std::string density_label;
  sg::SampleSpec spec;
  int window;  // resolved size, odd
  int auto_window;
};

std::string run_sweep_cell(const RunConfig& base, const sg::ImageGrid& left,
                           const sg::ImageGrid& right, const sg::DisparityMap& gt,
                           const SweepCell& cell) {
  std::ostringstream row;
  row << cell.density_label << "," << cell.window << ",";
  try {
    const sg::SampleResult split = sg::sample_sparse(gt, cell.spec);
    RunConfig cfg = base;
    cfg.window = cell.window;
    const sg::GuidanceConfig guidance = make_guidance(cfg, split.guidance);
    const sg::DisparityMap disparity = run_matcher(cfg, left, right, guidance);
    const sg::EvalReport report = sg::evaluate(disparity, split.holdout);
    char metrics[160];
    std::snprintf(metrics, sizeof(metrics), "%.6f,%.6f,%.6f,%.6f",
                  report.avg_error, report.outlier_rates[0],
                  report.outlier_rates[1], report.outlier_rates[2]);
    row << metrics << "," << cell.auto_window << ",ok";
  } catch (const std::exception& e) {
    std::string reason = e.what();
    for (char& ch : reason) {
      if (ch == ',' || ch == '\n') ch = ';';
    }
    row << ",,,," << cell.auto_window << ",error: " << reason;
  }
  return row.str();
}

int cmd_sweep(RunConfig& base, const std::string& gt_path,
              const std::vector<std::string>& densities,
              const std::vector<std::string>& windows, std::uint64_t seed,
              int jobs, const std::string& output_path) {
  if (densities.empty() || windows.empty()) {
    throw CliError(1, "sweep needs at least one density and one window");
  }
  if (jobs < 1) throw CliError(1, "--jobs must be >= 1");

  const sg::ImageGrid left =
      stage("load left image", [&] { return sg::load_gray(base.left_path); });
  const sg::ImageGrid right =
      stage("load right image", [&] { return sg::load_gray(base.right_path); });
  const sg::DisparityMap gt =
      stage("load ground truth", [&] { return read_disparity_auto(gt_path); });

  std::vector<SweepCell> cells;
  for (const std::string& density : densities) {
    sg::SampleSpec spec = stage("parse density", [&] { return sg::parse_density(density); });
    spec.seed = seed;
    const int auto_window = sg::auto_window_size(spec.density());
    for (const std::string& window : windows) {
      SweepCell cell;
      cell.density_label = density;
      cell.spec = spec;
      cell.auto_window = auto_window;
      if (window == "auto") {
        cell.window = auto_window;
      } else {
        try {
          std::size_t pos = 0;
          cell.window = std::stoi(window, &pos);
          if (pos != window.size()) throw std::invalid_argument("");
        } catch (const std::exception&) {
          throw CliError(1, "bad window '" + window + "'");
        }
        if (cell.window < 3 || cell.window % 2 == 0) {
          throw CliError(1, "window must be odd and >= 3, got '" + window + "'");
        }
      }
      cells.push_back(cell);
    }
  }

  // Cells run concurrently; rows land in ladder order regardless.
  std::vector<std::string> rows(cells.size());
  std::atomic<std::size_t> next{0};
  const int workers = std::min<int>(jobs, static_cast<int>(cells.size()));
  std::vector<std::thread> pool;
  for (int i = 0; i < workers; ++i) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t idx = next.fetch_add(1);
        if (idx >= cells.size()) return;
        rows[idx] = run_sweep_cell(base, left, right, gt, cells[idx]);
      }
    });
  }
  for (std::thread& t : pool) t.join();

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!output_path.empty()) {
    file.open(output_path, std::ios::binary);
    if (!file) throw CliError(2, "cannot open '" + output_path + "'");
    out = &file;
  }
  *out << "density,window,avg_error,outliers_gt_1px,outliers_gt_2px,"
          "outliers_gt_3px,auto_window,status\n";
  for (const std::string& row : rows) *out << row << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LiDAR-guided stereo matching toolkit"};
  app.require_subcommand(1);

  RunConfig cfg;
  int exit_code = 0;

  auto add_matcher_flags = [&](CLI::App* cmd, bool with_fusion) {
    cmd->add_option("--left", cfg.left_path, "left image (PNG or PGM)")->required();
    cmd->add_option("--right", cfg.right_path, "right image (PNG or PGM)")->required();
    cmd->add_option("--method", cfg.method, "matcher")
        ->check(CLI::IsMember({"sgm", "adcensus"}));
    auto* dmin = cmd->add_option("--dmin", cfg.d_min, "minimum disparity");
    auto* dmax = cmd->add_option("--dmax", cfg.d_max, "maximum disparity");
    cmd->add_option("--calib", cfg.calib_path,
                    "calibration file supplying the range via ndisp");
    cmd->add_option("--window", cfg.window,
                    "homogeneous-pixel window size, odd >= 3; 0 = auto");
    cmd->add_option("--sigma-xy", cfg.sigma_xy, "spatial bandwidth");
    cmd->add_option("--sigma-i", cfg.sigma_i, "intensity bandwidth");
    cmd->add_option("--gamma", cfg.gamma, "dissimilarity threshold");
    cmd->add_option("--k", cfg.k, "modulation height");
    cmd->add_option("--c", cfg.c, "modulation bandwidth, disparity levels");
    cmd->add_option("--p1", cfg.p1, "small-jump penalty (sgm)");
    cmd->add_option("--p2", cfg.p2, "large-jump penalty (sgm)");
    cmd->add_option("--paths", cfg.paths, "aggregation paths (sgm)")
        ->check(CLI::IsMember({4, 8}));
    if (with_fusion) {
      cmd->add_option("--fusion", cfg.fusion, "guidance mode")
          ->check(CLI::IsMember({"none", "gauss", "riverbed"}));
      cmd->add_option("--guidance", cfg.guidance_path, "guidance CSV (x,y,d)");
    }
    cmd->callback([&cfg, dmin, dmax] {
      cfg.range_given = dmin->count() > 0 || dmax->count() > 0;
    });
  };

  auto* match = app.add_subcommand("match", "compute a disparity map");
  add_matcher_flags(match, true);
  match->add_option("--output", cfg.output_path, "output disparity PFM")->required();
  match->add_option("--render", cfg.render_path, "optional false-color PNG");
  match->final_callback([&] { exit_code = cmd_match(cfg); });

  std::string gt_path, density = "5%", pattern = "random";
  std::string guidance_out = "guidance.csv", holdout_out = "holdout.csv";
  std::uint64_t seed = 0;
  auto* sample = app.add_subcommand("sample", "split ground truth into guidance and holdout");
  sample->add_option("--gt", gt_path, "ground-truth disparity (PFM or 16-bit PNG)")
      ->required();
  sample->add_option("--density", density, "1:NxN, P% or a real in (0, 1]");
  sample->add_option("--seed", seed, "sampling seed");
  sample->add_option("--pattern", pattern, "sampling pattern")
      ->check(CLI::IsMember({"random", "grid"}));
  sample->add_option("--guidance-out", guidance_out, "guidance CSV path");
  sample->add_option("--holdout-out", holdout_out, "holdout CSV path");
  sample->final_callback([&] {
    exit_code = cmd_sample(gt_path, density, seed, pattern, guidance_out, holdout_out);
  });

  std::string disp_path, holdout_path;
  auto* eval = app.add_subcommand("eval", "score a disparity map against holdout points");
  eval->add_option("--disp", disp_path, "computed disparity (PFM or 16-bit PNG)")
      ->required();
  eval->add_option("--holdout", holdout_path, "holdout CSV")->required();
  eval->final_callback([&] { exit_code = cmd_eval(disp_path, holdout_path); });

  std::string render_in, render_out;
  auto* render = app.add_subcommand("render", "false-color a disparity map");
  render->add_option("--input", render_in, "disparity (PFM or 16-bit PNG)")->required();
  render->add_option("--output", render_out, "output PNG")->required();
  render->final_callback([&] { exit_code = cmd_render(render_in, render_out); });

  std::vector<std::string> densities, windows;
  int jobs = 1;
  std::string sweep_out;
  auto* sweep = app.add_subcommand("sweep", "density x window grid, one CSV row per cell");
  add_matcher_flags(sweep, false);
  sweep->add_option("--gt", gt_path, "ground-truth disparity")->required();
  sweep->add_option("--densities", densities, "density ladder")->delimiter(',');
  sweep->add_option("--windows", windows, "window ladder, sizes or 'auto'")
      ->delimiter(',');
  sweep->add_option("--seed", seed, "sampling seed");
  sweep->add_option("--jobs", jobs, "concurrent cells");
  sweep->add_option("--output", sweep_out, "output CSV path (default stdout)");
  sweep->final_callback([&] {
    cfg.fusion = "riverbed";
    exit_code = cmd_sweep(cfg, gt_path, densities, windows, seed, jobs, sweep_out);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const CliError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.code;
  } catch (const sg::FormatError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::runtime_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return exit_code;
}
