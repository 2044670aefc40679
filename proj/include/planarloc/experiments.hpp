#pragma once

// Simulation study drivers: accuracy vs. pixel noise, robustness vs. outlier
// rate, and pipeline timing vs. point count.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "planarloc/baseline_8p8p.hpp"
#include "planarloc/metrics.hpp"
#include "planarloc/results_csv.hpp"
#include "planarloc/robust_estimator.hpp"
#include "planarloc/svg_plot.hpp"
#include "planarloc/synthetic_world.hpp"

namespace planarloc {

enum class Method { k2p2p, k2p1p, k8p8p };

inline const char* ToString(Method m) {
  switch (m) {
    case Method::k2p2p: return "2p2p";
    case Method::k2p1p: return "2p1p";
    case Method::k8p8p: return "8p8p";
  }
  return "?";
}

inline std::optional<Method> parse_method(const std::string& s) {
  if (s == "2p2p") return Method::k2p2p;
  if (s == "2p1p") return Method::k2p1p;
  if (s == "8p8p") return Method::k8p8p;
  return std::nullopt;
}

inline LocalizationResult run_method(Method m, const LocalizationProblem& p,
                                     const EstimatorOptions& options = {}) {
  switch (m) {
    case Method::k2p2p: return estimate_2p2p(p, options);
    case Method::k2p1p: return estimate_2p1p(p, options);
    case Method::k8p8p: return estimate_8p8p(p, options);
  }
  throw std::invalid_argument("unknown method");
}

enum class ExperimentKind { kAccuracy, kRobustness, kTiming };

inline const char* ToString(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::kAccuracy: return "accuracy";
    case ExperimentKind::kRobustness: return "robustness";
    case ExperimentKind::kTiming: return "timing";
  }
  return "?";
}

// Pixel noise used by the robustness sweep; the outlier sweep is run at a
// single, moderate noise level.
inline constexpr double kRobustnessNoisePx = 2.0;
inline constexpr double kTimingNoisePx = 5.0;
inline constexpr double kTimingOutlierRate = 0.1;

struct ExperimentPlan {
  ExperimentKind kind = ExperimentKind::kAccuracy;
  std::vector<Method> methods{Method::k2p2p, Method::k2p1p, Method::k8p8p};
  // Noise sigmas (accuracy), outlier rates (robustness) or point counts
  // (timing).
  std::vector<double> sweep;
  // Matches per reference for accuracy/robustness groups.
  std::vector<int> match_counts;
  int trials_per_cell = 100;
  std::uint64_t seed = 1;
  int n_references = 5;
  double noise_sigma_px = kRobustnessNoisePx;
  std::string output_dir;

  static ExperimentPlan defaults(ExperimentKind kind) {
    ExperimentPlan p;
    p.kind = kind;
    switch (kind) {
      case ExperimentKind::kAccuracy:
        p.sweep = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
        p.match_counts = {100, 50, 10};
        break;
      case ExperimentKind::kRobustness:
        p.sweep = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
        p.match_counts = {100, 50, 20};
        break;
      case ExperimentKind::kTiming:
        p.sweep = {10, 50, 100, 200, 500};
        break;
    }
    return p;
  }

  void validate() const {
    if (sweep.empty()) throw std::invalid_argument("sweep must be nonempty");
    if (trials_per_cell < 1) throw std::invalid_argument("trials must be >= 1");
    if (methods.empty()) throw std::invalid_argument("no methods selected");
    if (kind != ExperimentKind::kTiming && match_counts.empty()) {
      throw std::invalid_argument("match counts must be nonempty");
    }
  }
};

// Runs every method on one scene and appends a row per method.
inline void run_trial(const SyntheticScene& scene,
                      const std::vector<Method>& methods,
                      std::uint64_t& next_id, std::vector<TrialRecord>& out) {
  for (Method m : methods) {
    const auto t0 = std::chrono::steady_clock::now();
    const LocalizationResult res = run_method(m, scene.problem);
    const auto t1 = std::chrono::steady_clock::now();
    TrialRecord r;
    r.trial_id = next_id++;
    r.method = ToString(m);
    r.noise_sigma_px = scene.config.noise_sigma_px;
    r.outlier_rate = scene.config.outlier_rate;
    r.n_matches = scene.config.n_matches;
    r.status = ToString(res.status);
    r.wall_time_us =
        std::chrono::duration<double, std::micro>(t1 - t0).count();
    if (res.has_pose()) {
      const PoseError e = pose_error(res.pose, scene.ground_truth);
      r.rotation_err_deg = e.rotation_deg;
      r.translation_err_m = e.translation_m;
      r.direction_err_deg = e.direction_deg;
      r.inlier_count = res.inlier_count;
    } else {
      r.rotation_err_deg = r.translation_err_m = r.direction_err_deg = NAN;
    }
    out.push_back(std::move(r));
  }
}

inline std::vector<TrialRecord> infeasible_rows(
    const WorldConfig& cfg, const std::vector<Method>& methods,
    std::uint64_t& next_id) {
  std::vector<TrialRecord> rows;
  for (Method m : methods) {
    TrialRecord r;
    r.trial_id = next_id++;
    r.method = ToString(m);
    r.noise_sigma_px = cfg.noise_sigma_px;
    r.outlier_rate = cfg.outlier_rate;
    r.n_matches = cfg.n_matches;
    r.rotation_err_deg = r.translation_err_m = r.direction_err_deg = NAN;
    r.status = "InfeasibleScene";
    rows.push_back(std::move(r));
  }
  return rows;
}

// Runs `trials` scenes of `base` config, seeding each from (plan seed, cell,
// trial) so that cells do not depend on one another.
inline void run_cell(const ExperimentPlan& plan, WorldConfig base,
                     std::uint64_t cell, std::uint64_t& next_id,
                     std::vector<TrialRecord>& out) {
  for (int t = 0; t < plan.trials_per_cell; ++t) {
    base.seed = derive_seed(plan.seed, cell, std::uint64_t(t));
    try {
      const SyntheticScene scene = generate(base);
      run_trial(scene, plan.methods, next_id, out);
    } catch (const InfeasibleScene&) {
      auto rows = infeasible_rows(base, plan.methods, next_id);
      out.insert(out.end(), rows.begin(), rows.end());
    }
  }
}

inline std::vector<TrialRecord> run_accuracy_trials(const ExperimentPlan& plan) {
  plan.validate();
  std::vector<TrialRecord> rows;
  std::uint64_t id = 0;
  std::uint64_t cell = 0;
  for (double sigma : plan.sweep) {
    for (int n : plan.match_counts) {
      WorldConfig cfg;
      cfg.noise_sigma_px = sigma;
      cfg.n_matches = n;
      cfg.n_references = plan.n_references;
      run_cell(plan, cfg, cell++, id, rows);
    }
  }
  return rows;
}

inline std::vector<TrialRecord> run_robustness_trials(
    const ExperimentPlan& plan) {
  plan.validate();
  std::vector<TrialRecord> rows;
  std::uint64_t id = 0;
  std::uint64_t cell = 0;
  for (double rate : plan.sweep) {
    for (int n : plan.match_counts) {
      WorldConfig cfg;
      cfg.noise_sigma_px = plan.noise_sigma_px;
      cfg.outlier_rate = rate;
      cfg.n_matches = n;
      cfg.n_references = plan.n_references;
      run_cell(plan, cfg, cell++, id, rows);
    }
  }
  return rows;
}

inline std::vector<TrialRecord> run_timing_trials(const ExperimentPlan& plan) {
  plan.validate();
  std::vector<TrialRecord> rows;
  std::uint64_t id = 0;
  std::uint64_t cell = 0;
  for (double points : plan.sweep) {
    WorldConfig cfg;
    cfg.noise_sigma_px = kTimingNoisePx;
    cfg.outlier_rate = kTimingOutlierRate;
    cfg.n_matches = int(points);
    cfg.n_references = plan.n_references;
    run_cell(plan, cfg, cell++, id, rows);
  }
  return rows;
}

// Per-(method, sigma, outlier rate, matches) aggregate. Failed trials are
// excluded from the error means and counted in `excluded`.
struct CellSummary {
  std::string method;
  double noise_sigma_px = 0.0;
  double outlier_rate = 0.0;
  int n_matches = 0;
  int trials = 0;
  int excluded = 0;
  double mean_rotation_deg = 0.0;
  double mean_translation_m = 0.0;
  double mean_direction_deg = 0.0;
  double success_rate = 0.0;
  double mean_time_us = 0.0;
};

inline std::vector<CellSummary> summarize(const std::vector<TrialRecord>& rows,
                                          const SuccessCriterion& criterion = {}) {
  using Key = std::tuple<std::string, double, double, int>;
  std::map<Key, std::size_t> index;
  std::vector<CellSummary> cells;
  std::vector<int> successes;
  for (const TrialRecord& r : rows) {
    const Key key{r.method, r.noise_sigma_px, r.outlier_rate, r.n_matches};
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, cells.size()).first;
      CellSummary c;
      c.method = r.method;
      c.noise_sigma_px = r.noise_sigma_px;
      c.outlier_rate = r.outlier_rate;
      c.n_matches = r.n_matches;
      cells.push_back(c);
      successes.push_back(0);
    }
    CellSummary& c = cells[it->second];
    ++c.trials;
    c.mean_time_us += r.wall_time_us;
    if (!r.has_pose()) {
      ++c.excluded;
      continue;
    }
    c.mean_rotation_deg += r.rotation_err_deg;
    c.mean_translation_m += r.translation_err_m;
    c.mean_direction_deg += r.direction_err_deg;
    const PoseError e{r.rotation_err_deg, r.translation_err_m,
                      r.direction_err_deg};
    successes[it->second] += criterion.accepts(e);
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    CellSummary& c = cells[i];
    const int used = c.trials - c.excluded;
    const double denom = used > 0 ? double(used) : NAN;
    c.mean_rotation_deg /= denom;
    c.mean_translation_m /= denom;
    c.mean_direction_deg /= denom;
    c.success_rate = double(successes[i]) / double(c.trials);
    c.mean_time_us /= double(c.trials);
  }
  return cells;
}

inline const CellSummary* find_cell(const std::vector<CellSummary>& cells,
                                    const std::string& method, double sigma,
                                    double rate, int n) {
  for (const auto& c : cells) {
    if (c.method == method && c.noise_sigma_px == sigma &&
        c.outlier_rate == rate && c.n_matches == n) {
      return &c;
    }
  }
  return nullptr;
}

inline void write_summary_csv(std::ostream& os,
                              const std::vector<CellSummary>& cells) {
  os << "# failed trials are excluded from error means; see excluded\n";
  os << "method,noise_sigma_px,outlier_rate,n_matches,trials,excluded,"
        "mean_rotation_err_deg,mean_translation_err_m,mean_direction_err_deg,"
        "success_rate,mean_wall_time_us\n";
  for (const auto& c : cells) {
    os << c.method << ',' << format_double(c.noise_sigma_px) << ','
       << format_double(c.outlier_rate) << ',' << c.n_matches << ',' << c.trials
       << ',' << c.excluded << ',' << format_double(c.mean_rotation_deg) << ','
       << format_double(c.mean_translation_m) << ','
       << format_double(c.mean_direction_deg) << ','
       << format_double(c.success_rate) << ','
       << format_double(c.mean_time_us) << '\n';
  }
}

// Charts built from trial rows alone. The x axis is whichever of noise,
// outlier rate or match count varies; one chart per metric and group.
inline std::vector<std::pair<std::string, LineChart>> charts_from_records(
    const std::vector<TrialRecord>& rows) {
  const auto cells = summarize(rows);
  std::vector<double> sigmas, rates;
  std::vector<int> counts;
  std::vector<std::string> methods;
  auto add_unique = [](auto& v, const auto& x) {
    if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
  };
  for (const auto& c : cells) {
    add_unique(sigmas, c.noise_sigma_px);
    add_unique(rates, c.outlier_rate);
    add_unique(counts, c.n_matches);
    add_unique(methods, c.method);
  }

  struct Metric {
    const char* key;
    const char* label;
    double CellSummary::*field;
  };
  std::vector<std::pair<std::string, LineChart>> out;

  auto series_over = [&](auto x_of, auto pick, double CellSummary::*field) {
    std::vector<Series> series;
    for (const auto& m : methods) {
      Series s;
      s.name = m;
      for (const auto& c : cells) {
        if (c.method != m || !pick(c)) continue;
        s.xs.push_back(x_of(c));
        s.ys.push_back(c.*field);
      }
      series.push_back(std::move(s));
    }
    return series;
  };

  if (rates.size() > 1) {
    for (int n : counts) {
      LineChart chart{"Success rate, " + std::to_string(n) + " matches",
                      "outlier rate", "success rate", {}};
      chart.series = series_over(
          [](const CellSummary& c) { return c.outlier_rate; },
          [&](const CellSummary& c) { return c.n_matches == n; },
          &CellSummary::success_rate);
      out.emplace_back("robustness_" + std::to_string(n), std::move(chart));
    }
  } else if (sigmas.size() > 1) {
    const Metric metrics[] = {
        {"rotation", "mean rotation error (deg)", &CellSummary::mean_rotation_deg},
        {"direction", "mean direction error (deg)",
         &CellSummary::mean_direction_deg},
        {"translation", "mean translation error (m)",
         &CellSummary::mean_translation_m}};
    for (const Metric& m : metrics) {
      for (int n : counts) {
        LineChart chart{std::string(m.label) + ", " + std::to_string(n) +
                            " matches",
                        "noise sigma (px)", m.label, {}};
        chart.series = series_over(
            [](const CellSummary& c) { return c.noise_sigma_px; },
            [&](const CellSummary& c) { return c.n_matches == n; }, m.field);
        out.emplace_back(std::string("accuracy_") + m.key + "_" +
                             std::to_string(n),
                         std::move(chart));
      }
    }
  } else {
    LineChart chart{"Mean pipeline time", "points per reference",
                    "mean wall time (us)", {}};
    chart.series = series_over(
        [](const CellSummary& c) { return double(c.n_matches); },
        [](const CellSummary&) { return true; }, &CellSummary::mean_time_us);
    out.emplace_back("timing", std::move(chart));
  }
  return out;
}

inline void write_charts(const std::vector<TrialRecord>& rows,
                         const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, chart] : charts_from_records(rows)) {
    std::ofstream os(dir / (name + ".svg"));
    os << render_svg(chart);
  }
}

// Runs the plan and writes <kind>_trials.csv, <kind>_summary.csv and charts
// into plan.output_dir. Returns the trial rows.
inline std::vector<TrialRecord> run_experiment(const ExperimentPlan& plan) {
  std::vector<TrialRecord> rows;
  switch (plan.kind) {
    case ExperimentKind::kAccuracy: rows = run_accuracy_trials(plan); break;
    case ExperimentKind::kRobustness: rows = run_robustness_trials(plan); break;
    case ExperimentKind::kTiming: rows = run_timing_trials(plan); break;
  }
  if (plan.output_dir.empty()) return rows;

  const std::filesystem::path dir(plan.output_dir);
  std::filesystem::create_directories(dir);
  const std::string kind = ToString(plan.kind);
  const auto trials_path = dir / (kind + "_trials.csv");
  {
    std::ofstream os(trials_path);
    std::vector<std::string> comments = {
        "experiment: " + kind, "seed: " + std::to_string(plan.seed),
        "references: " + std::to_string(plan.n_references),
        "wall_time_us is nondeterministic",
        "failed trials carry nan errors and are excluded from means"};
    if (plan.kind == ExperimentKind::kRobustness) {
      comments.push_back("noise_sigma_px fixed at " +
                         format_double(plan.noise_sigma_px));
    }
    write_results_csv(os, rows, comments);
  }
  {
    std::ofstream os(dir / (kind + "_summary.csv"));
    write_summary_csv(os, summarize(rows));
  }
  std::ifstream is(trials_path);
  write_charts(read_results_csv(is), dir);
  return rows;
}

}  // namespace planarloc
