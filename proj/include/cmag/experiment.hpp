#pragma once
// Experiment orchestration: single runs, three-mode comparisons, multi-seed
// replication grids, sensitivity sweeps, and audit reports, together with the
// CSV/JSON emission they share. All outputs use fixed 6-decimal formatting
// and LF line endings so reruns with the mock compiler are byte-identical.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmag/config_io.hpp"
#include "cmag/dynamics.hpp"
#include "cmag/stats.hpp"

namespace cmag {

struct ExperimentPlan {
  std::string scenario;  // run, compare, multiseed, sensitivity, audit-report
  std::vector<GovernanceMode> modes;
  ThreatMode threat = ThreatMode::adversarial;
  std::vector<std::uint64_t> seeds;
  std::string out_dir;
  CompilerKind compiler_kind = CompilerKind::mock;
};

inline void validate_plan(const ExperimentPlan& plan) {
  if (plan.seeds.empty())
    throw std::invalid_argument("plan: at least one seed is required");
  std::set<std::uint64_t> distinct(plan.seeds.begin(), plan.seeds.end());
  if (distinct.size() != plan.seeds.size())
    throw std::invalid_argument("plan: seeds must be distinct");
  if (plan.out_dir.empty())
    throw std::invalid_argument("plan: out_dir is required");
}

// Tallied across runs so the CLI can distinguish a working external endpoint
// from one that never produced a usable policy.
struct CompileStats {
  int calls = 0;
  int fallbacks = 0;
};

namespace detail {

inline std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return std::string(buf);
}

inline std::string run_stem(GovernanceMode mode, ThreatMode threat,
                            std::uint64_t seed) {
  std::ostringstream out;
  out << to_string(mode) << "_" << to_string(threat) << "_seed" << seed;
  return out.str();
}

inline void accumulate_compile_stats(const RunResult& run,
                                     CompileStats* stats) {
  if (!stats) return;
  for (const AuditEntry& entry : run.audit) {
    ++stats->calls;
    if (entry.compiler_fallback) ++stats->fallbacks;
  }
}

}  // namespace detail

inline constexpr const char* kTimeseriesHeader =
    "t,mode,threat,seed,coop,autonomy,integrity,fairness,ecs,avg_exposure,"
    "max_exposure,exposure_gini,gap_exposure,gap_coop";

inline void write_timeseries_csv(std::ostream& out, const RunResult& run) {
  out << kTimeseriesHeader << "\n";
  for (const MetricRecord& r : run.timeseries) {
    out << r.t << "," << to_string(run.mode) << "," << to_string(run.threat)
        << "," << run.seed << "," << detail::fixed6(r.cooperation) << ","
        << detail::fixed6(r.autonomy) << "," << detail::fixed6(r.integrity)
        << "," << detail::fixed6(r.fairness) << "," << detail::fixed6(r.ecs)
        << "," << detail::fixed6(r.avg_exposure) << ","
        << detail::fixed6(r.max_exposure) << ","
        << detail::fixed6(r.exposure_gini) << ","
        << detail::fixed6(r.gap_exposure) << ","
        << detail::fixed6(r.gap_cooperation) << "\n";
  }
}

// Long format (t, mode, metric, value) for plotting tools that expect tidy
// input; covers the same columns as the wide file.
inline void write_merged_csv(std::ostream& out,
                             const std::vector<RunResult>& runs) {
  static const std::pair<const char*, double MetricRecord::*> kColumns[] = {
      {"coop", &MetricRecord::cooperation},
      {"autonomy", &MetricRecord::autonomy},
      {"integrity", &MetricRecord::integrity},
      {"fairness", &MetricRecord::fairness},
      {"ecs", &MetricRecord::ecs},
      {"avg_exposure", &MetricRecord::avg_exposure},
      {"max_exposure", &MetricRecord::max_exposure},
      {"exposure_gini", &MetricRecord::exposure_gini},
      {"gap_exposure", &MetricRecord::gap_exposure},
      {"gap_coop", &MetricRecord::gap_cooperation}};
  out << "t,mode,metric,value\n";
  for (const RunResult& run : runs) {
    for (const MetricRecord& r : run.timeseries) {
      for (const auto& [name, member] : kColumns) {
        out << r.t << "," << to_string(run.mode) << "," << name << ","
            << detail::fixed6(r.*member) << "\n";
      }
    }
  }
}

inline nlohmann::ordered_json summary_to_json(const RunResult& run) {
  const SteadySummary s =
      steady_summary(run.timeseries, run.config_echo.steady_window);
  nlohmann::ordered_json j;
  j["mode"] = to_string(run.mode);
  j["threat"] = to_string(run.threat);
  j["seed"] = run.seed;
  j["steady_window"] = run.config_echo.steady_window;
  nlohmann::ordered_json steady;
  steady["cooperation_mean"] = s.cooperation_mean;
  steady["cooperation_std"] = s.cooperation_std;
  steady["autonomy_mean"] = s.autonomy_mean;
  steady["autonomy_std"] = s.autonomy_std;
  steady["integrity_mean"] = s.integrity_mean;
  steady["integrity_std"] = s.integrity_std;
  steady["fairness_mean"] = s.fairness_mean;
  steady["fairness_std"] = s.fairness_std;
  steady["ecs_mean"] = s.ecs_mean;
  steady["ecs_std"] = s.ecs_std;
  steady["avg_exposure_mean"] = s.avg_exposure_mean;
  steady["avg_exposure_std"] = s.avg_exposure_std;
  steady["exposure_gini_mean"] = s.exposure_gini_mean;
  steady["exposure_gini_std"] = s.exposure_gini_std;
  steady["gap_exposure_mean"] = s.gap_exposure_mean;
  steady["gap_exposure_std"] = s.gap_exposure_std;
  steady["peak_cooperation"] = s.peak_cooperation;
  steady["min_autonomy"] = s.min_autonomy;
  j["steady"] = steady;
  j["config"] = config_to_json(run.config_echo);
  return j;
}

namespace detail {

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot open output file: " + path.string());
  out << text;
  if (!out)
    throw std::runtime_error("write failed: " + path.string());
}

inline void emit_run_files(const std::filesystem::path& dir,
                           const RunResult& run, bool with_audit) {
  const std::string stem = run_stem(run.mode, run.threat, run.seed);
  {
    std::ostringstream buf;
    write_timeseries_csv(buf, run);
    write_text_file(dir / ("timeseries_" + stem + ".csv"), buf.str());
  }
  write_text_file(dir / ("summary_" + stem + ".json"),
                  summary_to_json(run).dump(2) + "\n");
  if (with_audit) {
    std::ostringstream buf;
    write_audit_jsonl(run.audit, buf);
    write_text_file(dir / ("audit_" + stem + ".jsonl"), buf.str());
  }
}

}  // namespace detail

// One (mode, threat, seed) run: timeseries CSV, summary JSON, audit JSONL.
inline std::vector<std::string> cmd_run(const ExperimentPlan& plan,
                                        const SimConfig& cfg,
                                        const CompileFn& compile,
                                        CompileStats* stats = nullptr) {
  validate_plan(plan);
  if (plan.modes.size() != 1)
    throw std::invalid_argument("run: exactly one mode is required");
  if (plan.seeds.size() != 1)
    throw std::invalid_argument("run: exactly one seed is required");
  const std::filesystem::path dir(plan.out_dir);
  std::filesystem::create_directories(dir);

  const RunResult run = run_simulation(cfg, plan.modes[0], plan.threat,
                                       compile, plan.seeds[0]);
  detail::accumulate_compile_stats(run, stats);
  detail::emit_run_files(dir, run, true);
  const std::string stem = detail::run_stem(run.mode, run.threat, run.seed);
  return {"timeseries_" + stem + ".csv", "summary_" + stem + ".json",
          "audit_" + stem + ".jsonl"};
}

inline nlohmann::ordered_json comparison_to_json(
    const std::vector<RunResult>& runs) {
  static const std::pair<const char*, double SteadySummary::*> kRows[] = {
      {"cooperation", &SteadySummary::cooperation_mean},
      {"autonomy", &SteadySummary::autonomy_mean},
      {"integrity", &SteadySummary::integrity_mean},
      {"fairness", &SteadySummary::fairness_mean},
      {"ecs", &SteadySummary::ecs_mean},
      {"avg_exposure", &SteadySummary::avg_exposure_mean}};
  static const std::pair<const char*, double SteadySummary::*> kStdRows[] = {
      {"cooperation", &SteadySummary::cooperation_std},
      {"autonomy", &SteadySummary::autonomy_std},
      {"integrity", &SteadySummary::integrity_std},
      {"fairness", &SteadySummary::fairness_std},
      {"ecs", &SteadySummary::ecs_std},
      {"avg_exposure", &SteadySummary::avg_exposure_std}};

  nlohmann::ordered_json j;
  j["threat"] = to_string(runs.front().threat);
  j["seed"] = runs.front().seed;
  nlohmann::ordered_json metrics;
  std::map<GovernanceMode, SteadySummary> summaries;
  for (const RunResult& run : runs)
    summaries[run.mode] =
        steady_summary(run.timeseries, run.config_echo.steady_window);
  for (std::size_t i = 0; i < std::size(kRows); ++i) {
    nlohmann::ordered_json row;
    for (const RunResult& run : runs) {
      nlohmann::ordered_json cell;
      cell["mean"] = summaries[run.mode].*(kRows[i].second);
      cell["std"] = summaries[run.mode].*(kStdRows[i].second);
      row[std::string(to_string(run.mode))] = cell;
    }
    metrics[kRows[i].first] = row;
  }
  j["metrics"] = metrics;
  return j;
}

// All three modes on one seed: per-mode timeseries and summaries, one merged
// long-format CSV, and the cross-mode comparison table.
inline std::vector<std::string> cmd_compare(const ExperimentPlan& plan,
                                            const SimConfig& cfg,
                                            const CompileFn& compile,
                                            CompileStats* stats = nullptr) {
  validate_plan(plan);
  if (plan.modes.size() != 3)
    throw std::invalid_argument("compare: all three modes are required");
  if (plan.seeds.size() != 1)
    throw std::invalid_argument("compare: exactly one seed is required");
  const std::filesystem::path dir(plan.out_dir);
  std::filesystem::create_directories(dir);

  std::vector<RunResult> runs;
  for (GovernanceMode mode : plan.modes) {
    runs.push_back(
        run_simulation(cfg, mode, plan.threat, compile, plan.seeds[0]));
    detail::accumulate_compile_stats(runs.back(), stats);
  }

  std::vector<std::string> files;
  for (const RunResult& run : runs) {
    detail::emit_run_files(dir, run, false);
    const std::string stem = detail::run_stem(run.mode, run.threat, run.seed);
    files.push_back("timeseries_" + stem + ".csv");
    files.push_back("summary_" + stem + ".json");
  }
  {
    std::ostringstream buf;
    write_merged_csv(buf, runs);
    std::ostringstream name;
    name << "merged_" << to_string(plan.threat) << "_seed" << plan.seeds[0]
         << ".csv";
    detail::write_text_file(dir / name.str(), buf.str());
    files.push_back(name.str());
  }
  {
    std::ostringstream name;
    name << "comparison_" << to_string(plan.threat) << "_seed"
         << plan.seeds[0] << ".json";
    detail::write_text_file(dir / name.str(),
                            comparison_to_json(runs).dump(2) + "\n");
    files.push_back(name.str());
  }
  return files;
}

struct MetricColumn {
  const char* name;
  double SteadySummary::*member;
};

inline constexpr MetricColumn kStatMetrics[] = {
    {"cooperation", &SteadySummary::cooperation_mean},
    {"autonomy", &SteadySummary::autonomy_mean},
    {"integrity", &SteadySummary::integrity_mean},
    {"fairness", &SteadySummary::fairness_mean},
    {"ecs", &SteadySummary::ecs_mean}};

// Full grid (every mode on every seed) and the statistics layer on the
// per-seed steady means: bootstrap CIs per metric and mode, all pairwise
// rank tests with raw and corrected p-values, and effect sizes.
inline nlohmann::ordered_json multiseed_statistics(
    const std::vector<RunResult>& runs, int n_resamples,
    std::uint64_t bootstrap_seed) {
  std::map<GovernanceMode, std::map<std::string, std::vector<double>>> values;
  std::vector<std::uint64_t> seeds;
  for (const RunResult& run : runs) {
    const SteadySummary s =
        steady_summary(run.timeseries, run.config_echo.steady_window);
    for (const MetricColumn& col : kStatMetrics)
      values[run.mode][col.name].push_back(s.*(col.member));
    if (run.mode == GovernanceMode::governed) seeds.push_back(run.seed);
  }

  static const std::pair<GovernanceMode, GovernanceMode> kPairs[] = {
      {GovernanceMode::governed, GovernanceMode::naive},
      {GovernanceMode::governed, GovernanceMode::unconstrained},
      {GovernanceMode::naive, GovernanceMode::unconstrained}};
  const int n_comparisons =
      static_cast<int>(std::size(kPairs) * std::size(kStatMetrics));

  nlohmann::ordered_json j;
  j["threat"] = to_string(runs.front().threat);
  j["seeds"] = seeds;
  j["n_runs"] = runs.size();
  j["n_comparisons"] = n_comparisons;
  j["bootstrap_resamples"] = n_resamples;

  Rng rng = derive_stream(bootstrap_seed, "bootstrap");
  nlohmann::ordered_json metrics;
  for (const MetricColumn& col : kStatMetrics) {
    nlohmann::ordered_json entry;
    nlohmann::ordered_json per_mode;
    for (GovernanceMode mode : kAllModes) {
      const std::vector<double>& xs = values[mode][col.name];
      const BootstrapCI ci = bootstrap_ci(xs, 0.95, n_resamples, rng);
      nlohmann::ordered_json m;
      m["values"] = xs;
      double mean = 0.0;
      for (double x : xs) mean += x;
      mean /= static_cast<double>(xs.size());
      m["mean"] = mean;
      m["ci_lower"] = ci.lower;
      m["ci_upper"] = ci.upper;
      per_mode[std::string(to_string(mode))] = m;
    }
    entry["per_mode"] = per_mode;

    nlohmann::ordered_json comparisons = nlohmann::ordered_json::array();
    for (const auto& [lhs, rhs] : kPairs) {
      const std::vector<double>& a = values[lhs][col.name];
      const std::vector<double>& b = values[rhs][col.name];
      const MannWhitneyResult mw = mann_whitney_u(a, b);
      nlohmann::ordered_json c;
      c["pair"] = std::string(to_string(lhs)) + "_vs_" +
                  std::string(to_string(rhs));
      c["u"] = mw.u;
      c["p_raw"] = mw.p_value;
      c["p_bonferroni"] = bonferroni(mw.p_value, n_comparisons);
      c["exact"] = mw.exact;
      c["cohens_d"] = cohens_d(a, b);
      comparisons.push_back(c);
    }
    entry["comparisons"] = comparisons;
    metrics[col.name] = entry;
  }
  j["metrics"] = metrics;
  return j;
}

inline std::vector<std::string> cmd_multiseed(const ExperimentPlan& plan,
                                              const SimConfig& cfg,
                                              const CompileFn& compile,
                                              CompileStats* stats = nullptr) {
  validate_plan(plan);
  if (plan.seeds.size() < 2)
    throw std::invalid_argument("multiseed: at least two seeds are required");
  if (plan.modes.size() != 3)
    throw std::invalid_argument("multiseed: all three modes are required");
  const std::filesystem::path dir(plan.out_dir);
  std::filesystem::create_directories(dir);

  std::vector<RunResult> runs;
  std::vector<std::string> files;
  for (GovernanceMode mode : plan.modes) {
    for (std::uint64_t seed : plan.seeds) {
      runs.push_back(run_simulation(cfg, mode, plan.threat, compile, seed));
      detail::accumulate_compile_stats(runs.back(), stats);
      detail::emit_run_files(dir, runs.back(), true);
      const std::string stem = detail::run_stem(mode, plan.threat, seed);
      files.push_back("timeseries_" + stem + ".csv");
      files.push_back("summary_" + stem + ".json");
      files.push_back("audit_" + stem + ".jsonl");
    }
  }

  const nlohmann::ordered_json stats_json =
      multiseed_statistics(runs, 5000, plan.seeds[0]);
  std::ostringstream name;
  name << "statistics_" << to_string(plan.threat) << ".json";
  detail::write_text_file(dir / name.str(), stats_json.dump(2) + "\n");
  files.push_back(name.str());
  return files;
}

// The four default one-at-a-time sweeps; each level's ECS comes from a full
// governed run at that parameter value.
inline std::vector<std::string> cmd_sensitivity(const ExperimentPlan& plan,
                                                const SimConfig& cfg,
                                                const CompileFn& compile,
                                                CompileStats* stats = nullptr) {
  validate_plan(plan);
  const std::filesystem::path dir(plan.out_dir);
  std::filesystem::create_directories(dir);
  const GovernanceMode mode =
      plan.modes.empty() ? GovernanceMode::governed : plan.modes[0];

  std::vector<SweepResult> results;
  for (const SweepSpec& spec : default_sweeps(cfg))
    results.push_back(
        oat_sweep(cfg, spec, mode, plan.threat, compile, plan.seeds[0]));
  if (stats) stats->calls = 0;  // sweeps run the mock path only

  std::ostringstream csv;
  csv << "parameter,level,ecs_mean,ecs_std\n";
  for (const SweepResult& result : results) {
    for (const SweepLevelResult& row : result.levels) {
      csv << result.parameter_name << "," << detail::fixed6(row.level) << ","
          << detail::fixed6(row.ecs_mean) << "," << detail::fixed6(row.ecs_std)
          << "\n";
    }
  }
  detail::write_text_file(dir / "sweep_ecs.csv", csv.str());

  nlohmann::ordered_json j;
  j["mode"] = to_string(mode);
  j["threat"] = to_string(plan.threat);
  j["seed"] = plan.seeds[0];
  nlohmann::ordered_json per_param;
  for (const SweepResult& result : results) {
    nlohmann::ordered_json entry;
    entry["baseline_ecs"] = result.baseline_ecs;
    entry["sensitivity_index"] = result.sensitivity;
    per_param[result.parameter_name] = entry;
  }
  j["parameters"] = per_param;
  detail::write_text_file(dir / "sensitivity_indices.json", j.dump(2) + "\n");
  return {"sweep_ecs.csv", "sensitivity_indices.json"};
}

// Recomputes every reported number from the raw audit lines alone.
inline nlohmann::ordered_json audit_report_from_trail(const AuditTrail& trail) {
  nlohmann::ordered_json j;
  j["n_deployments"] = trail.size();

  int skipped = 0, fallbacks = 0;
  nlohmann::ordered_json per_deployment = nlohmann::ordered_json::array();
  std::map<std::string, int> reason_counts;
  std::map<std::string, int> theme_counts;
  double intensity_sum = 0.0;
  int selected_count = 0;
  std::string mode_label;
  for (const AuditEntry& entry : trail) {
    mode_label = to_string(entry.mode);
    if (entry.skipped) ++skipped;
    if (entry.compiler_fallback) ++fallbacks;
    int rejections = 0;
    for (const RejectionRecord& r : entry.selection.rejections) {
      rejections += 1;
      for (RejectionReason reason : r.reasons)
        reason_counts[std::string(to_string(reason))] += 1;
    }
    nlohmann::ordered_json row;
    row["deployment_index"] = entry.deployment_index;
    row["t"] = entry.t;
    row["rejections"] = rejections;
    per_deployment.push_back(row);
    if (!entry.skipped && entry.selection.selected) {
      theme_counts[std::string(to_string(entry.selection.selected->theme))] +=
          1;
      intensity_sum += entry.selection.selected->intensity;
      ++selected_count;
    }
  }

  j["mode"] = mode_label;
  j["skipped_deployments"] = skipped;
  j["compiler_fallbacks"] = fallbacks;
  j["per_deployment_rejections"] = per_deployment;
  nlohmann::ordered_json reasons;
  for (const auto& [name, count] : reason_counts) reasons[name] = count;
  j["rejection_reason_counts"] = reasons;
  nlohmann::ordered_json themes;
  for (const auto& [name, count] : theme_counts) themes[name] = count;
  j["selected_theme_counts"] = themes;
  j["mean_selected_intensity"] =
      selected_count > 0 ? intensity_sum / selected_count : 0.0;
  return j;
}

inline nlohmann::ordered_json cmd_audit_report(const std::string& audit_path,
                                               const std::string& out_dir) {
  std::ifstream in(audit_path);
  if (!in)
    throw std::invalid_argument("audit-report: cannot open file: " +
                                audit_path);
  const AuditTrail trail = read_audit_jsonl(in);
  const nlohmann::ordered_json report = audit_report_from_trail(trail);
  if (!out_dir.empty()) {
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    const std::string stem =
        std::filesystem::path(audit_path).stem().string();
    detail::write_text_file(dir / (stem + "_report.json"),
                            report.dump(2) + "\n");
  }
  return report;
}

}  // namespace cmag
