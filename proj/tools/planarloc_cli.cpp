// planarloc: simulate scenes, solve problem files, run the simulation
// benchmarks and render charts.
//
// Exit codes: 0 success, 1 estimation failure, 2 usage or I/O error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "planarloc/experiments.hpp"
#include "planarloc/problem_io.hpp"

namespace fs = std::filesystem;
using namespace planarloc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitEstimation = 1;
constexpr int kExitUsage = 2;

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
  std::vector<Method> out;
  for (const auto& n : names) {
    const auto m = parse_method(n);
    if (!m) throw CLI::ValidationError("--methods", "unknown method '" + n + "'");
    out.push_back(*m);
  }
  return out;
}

void print_pose(const char* label, const RigidPose& p) {
  const Eigen::Vector3d c = p.center();
  std::printf("  %s_rotation: [%.12g, %.12g, %.12g, %.12g, %.12g, %.12g, %.12g, %.12g, %.12g]\n",
              label, p.rotation(0, 0), p.rotation(0, 1), p.rotation(0, 2),
              p.rotation(1, 0), p.rotation(1, 1), p.rotation(1, 2),
              p.rotation(2, 0), p.rotation(2, 1), p.rotation(2, 2));
  std::printf("  %s_translation: [%.12g, %.12g, %.12g]\n", label,
              p.translation.x(), p.translation.y(), p.translation.z());
  std::printf("  %s_center: [%.12g, %.12g, %.12g]\n", label, c.x(), c.y(), c.z());
}

struct SimulateArgs {
  std::string out;
  int count = 1;
  std::uint64_t seed = 1;
  int matches = 100;
  int refs = 5;
  double noise = 0.0;
  double outliers = 0.0;
  int iterations = 100;
};

int run_simulate(const SimulateArgs& a) {
  WorldConfig cfg;
  cfg.n_matches = a.matches;
  cfg.n_references = a.refs;
  cfg.noise_sigma_px = a.noise;
  cfg.outlier_rate = a.outliers;
  cfg.iterations = a.iterations;
  if (!cfg.is_valid()) {
    std::cerr << "error: invalid scene parameters\n";
    return kExitUsage;
  }
  for (int i = 0; i < a.count; ++i) {
    cfg.seed = a.count == 1 ? a.seed : derive_seed(a.seed, std::uint64_t(i));
    SyntheticScene scene;
    try {
      scene = generate(cfg);
    } catch (const InfeasibleScene& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitEstimation;
    }
    ProblemFile file{scene.problem, scene.ground_truth, scene.outlier_mask};
    fs::path path(a.out);
    if (a.count > 1) {
      fs::create_directories(path);
      char name[32];
      std::snprintf(name, sizeof(name), "scene_%04d.json", i);
      path /= name;
    } else if (path.has_parent_path()) {
      fs::create_directories(path.parent_path());
    }
    try {
      write_problem(path.string(), file);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitUsage;
    }
    std::cout << path.string() << '\n';
  }
  return kExitOk;
}

struct SolveArgs {
  std::string path;
  std::vector<std::string> methods{"2p1p"};
  std::optional<std::uint64_t> seed;
  std::optional<int> iterations;
};

int run_solve(const SolveArgs& a) {
  ProblemFile file;
  try {
    file = read_problem(a.path);
  } catch (const SchemaVersionMismatch& e) {
    std::cerr << "SchemaVersionMismatch: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidProblem& e) {
    std::cerr << "InvalidProblem: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "ParseError: " << e.what() << '\n';
    return kExitUsage;
  }
  if (a.seed) file.problem.rng_seed = *a.seed;
  if (a.iterations) file.problem.iterations = *a.iterations;

  int code = kExitOk;
  for (Method m : parse_methods(a.methods)) {
    const LocalizationResult r = run_method(m, file.problem);
    std::printf("%s:\n", ToString(m));
    std::printf("  status: %s\n", ToString(r.status));
    if (!r.has_pose()) {
      code = kExitEstimation;
      continue;
    }
    std::printf("  inliers: %zu / %zu\n", r.inlier_count,
                file.problem.total_correspondences());
    std::printf("  refined: %s\n", r.refined ? "true" : "false");
    print_pose("pose", r.pose);
    if (file.ground_truth) {
      const PoseError e = pose_error(r.pose, *file.ground_truth);
      std::printf("  rotation_err_deg: %.6g\n", e.rotation_deg);
      std::printf("  translation_err_m: %.6g\n", e.translation_m);
      std::printf("  direction_err_deg: %.6g\n", e.direction_deg);
    }
  }
  return code;
}

struct BenchArgs {
  std::string kind;
  std::vector<std::string> methods{"2p2p", "2p1p", "8p8p"};
  std::vector<double> sweep;
  std::vector<int> matches;
  int trials = 100;
  std::uint64_t seed = 1;
  int refs = 5;
  std::optional<double> noise;
  std::string out = "results";
};

void print_summary(const std::vector<CellSummary>& cells) {
  std::printf("%-6s %8s %8s %8s %7s %10s %10s %10s %8s %12s\n", "method",
              "sigma", "outliers", "matches", "failed", "rot_deg", "trans_m",
              "dir_deg", "success", "time_us");
  for (const auto& c : cells) {
    std::printf("%-6s %8.3g %8.3g %8d %7d %10.4g %10.4g %10.4g %8.3f %12.1f\n",
                c.method.c_str(), c.noise_sigma_px, c.outlier_rate, c.n_matches,
                c.excluded, c.mean_rotation_deg, c.mean_translation_m,
                c.mean_direction_deg, c.success_rate, c.mean_time_us);
  }
}

int run_bench(const BenchArgs& a) {
  ExperimentKind kind;
  if (a.kind == "accuracy") {
    kind = ExperimentKind::kAccuracy;
  } else if (a.kind == "robustness") {
    kind = ExperimentKind::kRobustness;
  } else if (a.kind == "timing") {
    kind = ExperimentKind::kTiming;
  } else {
    std::cerr << "error: unknown experiment '" << a.kind << "'\n";
    return kExitUsage;
  }
  ExperimentPlan plan = ExperimentPlan::defaults(kind);
  plan.methods = parse_methods(a.methods);
  if (!a.sweep.empty()) plan.sweep = a.sweep;
  if (!a.matches.empty()) plan.match_counts = a.matches;
  plan.trials_per_cell = a.trials;
  plan.seed = a.seed;
  plan.n_references = a.refs;
  if (a.noise) plan.noise_sigma_px = *a.noise;
  plan.output_dir = a.out;
  try {
    plan.validate();
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  std::vector<TrialRecord> rows;
  try {
    rows = run_experiment(plan);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  print_summary(summarize(rows));
  std::cout << "wrote " << (fs::path(a.out) / (std::string(ToString(kind)) + "_trials.csv")).string()
            << '\n';
  return kExitOk;
}

int run_plot(const std::string& in, const std::string& out) {
  std::ifstream is(in);
  if (!is) {
    std::cerr << "error: cannot open " << in << '\n';
    return kExitUsage;
  }
  try {
    const auto rows = read_results_csv(is);
    write_charts(rows, out);
    for (const auto& [name, chart] : charts_from_records(rows)) {
      std::cout << (fs::path(out) / (name + ".svg")).string() << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Planar-motion localization from 2D-2D matches"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Write synthetic problem files");
  simulate->add_option("--out", sim.out, "Output file, or directory when --count > 1")
      ->required();
  simulate->add_option("--count", sim.count, "Number of scenes")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim.seed, "Scene seed");
  simulate->add_option("--matches", sim.matches, "Matches per reference")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--refs", sim.refs, "Reference views")->check(CLI::Range(2, 1000));
  simulate->add_option("--noise", sim.noise, "Pixel noise sigma")->check(CLI::NonNegativeNumber);
  simulate->add_option("--outliers", sim.outliers, "Outlier rate")->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--iterations", sim.iterations, "RANSAC iterations stored in the file")
      ->check(CLI::PositiveNumber);

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "Estimate the query pose of a problem file");
  solve_cmd->add_option("problem", solve.path, "Problem file")->required();
  solve_cmd->add_option("--methods", solve.methods, "2p2p, 2p1p and/or 8p8p")
      ->delimiter(',');
  solve_cmd->add_option("--seed", solve.seed, "Override the RANSAC seed");
  solve_cmd->add_option("--iterations", solve.iterations, "Override the RANSAC iterations")
      ->check(CLI::PositiveNumber);

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Run a simulation experiment");
  bench_cmd->add_option("experiment", bench.kind, "accuracy, robustness or timing")
      ->required()
      ->check(CLI::IsMember({"accuracy", "robustness", "timing"}));
  bench_cmd->add_option("--methods", bench.methods, "2p2p, 2p1p and/or 8p8p")
      ->delimiter(',');
  bench_cmd->add_option("--sweep", bench.sweep,
                        "Noise sigmas, outlier rates or point counts")
      ->delimiter(',');
  bench_cmd->add_option("--matches", bench.matches, "Match-count groups (per reference)")
      ->delimiter(',');
  bench_cmd->add_option("--trials", bench.trials, "Trials per cell")
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--seed", bench.seed, "Experiment seed");
  bench_cmd->add_option("--refs", bench.refs, "Reference views per scene")
      ->check(CLI::Range(2, 1000));
  bench_cmd->add_option("--noise", bench.noise, "Pixel noise for the robustness sweep")
      ->check(CLI::NonNegativeNumber);
  bench_cmd->add_option("--out", bench.out, "Output directory");

  std::string plot_in, plot_out = "plots";
  auto* plot = app.add_subcommand("plot", "Render SVG charts from a trials CSV");
  plot->add_option("trials", plot_in, "Trials CSV written by bench")->required();
  plot->add_option("--out", plot_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*simulate) return run_simulate(sim);
    if (*solve_cmd) return run_solve(solve);
    if (*bench_cmd) return run_bench(bench);
    if (*plot) return run_plot(plot_in, plot_out);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
