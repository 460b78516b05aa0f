#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmag/core.hpp"
#include "cmag/dynamics.hpp"
#include "cmag/experiment.hpp"

using namespace cmag;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "cmag_exp_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int count_lines(const std::string& text) {
  int lines = 0;
  for (char c : text)
    if (c == '\n') ++lines;
  return lines;
}

ExperimentPlan base_plan(const std::string& scenario, const fs::path& dir) {
  ExperimentPlan plan;
  plan.scenario = scenario;
  plan.threat = ThreatMode::adversarial;
  plan.out_dir = dir.string();
  return plan;
}

const std::vector<GovernanceMode> kThreeModes = {GovernanceMode::governed,
                                                 GovernanceMode::naive,
                                                 GovernanceMode::unconstrained};

}  // namespace

TEST_CASE("plan validation rejects degenerate requests") {
  const fs::path dir = fresh_dir("plan");
  ExperimentPlan plan = base_plan("run", dir);
  plan.modes = {GovernanceMode::governed};
  CHECK_THROWS_AS(validate_plan(plan), std::invalid_argument);  // no seeds
  plan.seeds = {0, 0};
  CHECK_THROWS_AS(validate_plan(plan), std::invalid_argument);  // duplicates
  plan.seeds = {0};
  plan.out_dir.clear();
  CHECK_THROWS_AS(validate_plan(plan), std::invalid_argument);  // no out_dir
  plan.out_dir = dir.string();
  CHECK_NOTHROW(validate_plan(plan));

  const SimConfig cfg = default_config();
  plan.modes = kThreeModes;
  CHECK_THROWS_AS(cmd_run(plan, cfg, mock_compiler()), std::invalid_argument);
  plan.modes = {GovernanceMode::governed};
  plan.seeds = {0, 1};
  CHECK_THROWS_AS(cmd_run(plan, cfg, mock_compiler()), std::invalid_argument);
  plan.seeds = {0};
  CHECK_THROWS_AS(cmd_compare(plan, cfg, mock_compiler()),
                  std::invalid_argument);
  plan.modes = kThreeModes;
  CHECK_THROWS_AS(cmd_multiseed(plan, cfg, mock_compiler()),
                  std::invalid_argument);  // needs two seeds
}

TEST_CASE("single run emits timeseries, summary, and audit files") {
  const fs::path dir = fresh_dir("run");
  ExperimentPlan plan = base_plan("run", dir);
  plan.modes = {GovernanceMode::governed};
  plan.seeds = {0};

  CompileStats stats;
  const auto files = cmd_run(plan, default_config(), mock_compiler(), &stats);
  REQUIRE(files == std::vector<std::string>{
                       "timeseries_governed_adversarial_seed0.csv",
                       "summary_governed_adversarial_seed0.json",
                       "audit_governed_adversarial_seed0.jsonl"});
  for (const auto& f : files) CHECK(fs::exists(dir / f));
  CHECK(stats.calls == 10);
  CHECK(stats.fallbacks == 0);

  const std::string ts = read_file(dir / files[0]);
  CHECK(count_lines(ts) == 101);
  CHECK(ts.rfind(kTimeseriesHeader, 0) == 0);
  CHECK(ts.find("governed,adversarial,0,") != std::string::npos);

  const auto summary = nlohmann::json::parse(read_file(dir / files[1]));
  CHECK(summary.at("mode") == "governed");
  CHECK(summary.at("seed") == 0);
  CHECK(summary.at("steady").at("ecs_mean").get<double>() > 0.0);
  CHECK(summary.at("config").at("n_agents") == 80);

  std::ifstream audit(dir / files[2]);
  const AuditTrail trail = read_audit_jsonl(audit);
  CHECK(trail.size() == 10);
}

TEST_CASE("comparison produces the full three-mode bundle") {
  const fs::path dir = fresh_dir("compare_a");
  ExperimentPlan plan = base_plan("compare", dir);
  plan.modes = kThreeModes;
  plan.seeds = {0};

  const auto files = cmd_compare(plan, default_config(), mock_compiler());
  REQUIRE(files.size() == 8);
  for (const auto& f : files) CHECK(fs::exists(dir / f));
  CHECK(files[6] == "merged_adversarial_seed0.csv");
  CHECK(files[7] == "comparison_adversarial_seed0.json");

  // No audit files in comparison mode.
  for (const auto& entry : fs::directory_iterator(dir))
    CHECK(entry.path().extension() != ".jsonl");

  const std::string merged = read_file(dir / "merged_adversarial_seed0.csv");
  CHECK(count_lines(merged) == 1 + 3 * 100 * 10);
  CHECK(merged.rfind("t,mode,metric,value\n", 0) == 0);

  const auto cmp =
      nlohmann::json::parse(read_file(dir / "comparison_adversarial_seed0.json"));
  const auto& ecs_row = cmp.at("metrics").at("ecs");
  const double gov = ecs_row.at("governed").at("mean").get<double>();
  const double nai = ecs_row.at("naive").at("mean").get<double>();
  const double unc = ecs_row.at("unconstrained").at("mean").get<double>();
  CHECK(gov > nai);
  CHECK(nai > unc);
  const auto& coop_row = cmp.at("metrics").at("cooperation");
  CHECK(coop_row.at("unconstrained").at("mean").get<double>() >
        coop_row.at("governed").at("mean").get<double>());
}

TEST_CASE("comparison output is byte-identical across reruns") {
  const fs::path dir_a = fresh_dir("compare_rerun_a");
  const fs::path dir_b = fresh_dir("compare_rerun_b");
  ExperimentPlan plan = base_plan("compare", dir_a);
  plan.modes = kThreeModes;
  plan.seeds = {3};

  const auto files_a = cmd_compare(plan, default_config(), mock_compiler());
  plan.out_dir = dir_b.string();
  const auto files_b = cmd_compare(plan, default_config(), mock_compiler());
  REQUIRE(files_a == files_b);
  for (const auto& f : files_a) CHECK(read_file(dir_a / f) == read_file(dir_b / f));
}

TEST_CASE("multiseed grid writes every run plus the statistics layer") {
  const fs::path dir = fresh_dir("multiseed");
  ExperimentPlan plan = base_plan("multiseed", dir);
  plan.modes = kThreeModes;
  plan.seeds = {0, 1};

  const auto files = cmd_multiseed(plan, default_config(), mock_compiler());
  REQUIRE(files.size() == 19);  // 3 modes x 2 seeds x 3 files + statistics
  for (const auto& f : files) CHECK(fs::exists(dir / f));
  CHECK(files.back() == "statistics_adversarial.json");

  const auto stats =
      nlohmann::json::parse(read_file(dir / "statistics_adversarial.json"));
  CHECK(stats.at("n_comparisons") == 15);
  CHECK(stats.at("n_runs") == 6);
  CHECK(stats.at("seeds") == nlohmann::json::array({0, 1}));
  REQUIRE(stats.at("metrics").size() == 5);
  for (const char* metric :
       {"cooperation", "autonomy", "integrity", "fairness", "ecs"}) {
    const auto& entry = stats.at("metrics").at(metric);
    for (const char* mode : {"governed", "naive", "unconstrained"}) {
      const auto& cell = entry.at("per_mode").at(mode);
      REQUIRE(cell.at("values").size() == 2);
      const double mean = cell.at("mean").get<double>();
      CHECK(cell.at("ci_lower").get<double>() <= mean + 1e-12);
      CHECK(mean <= cell.at("ci_upper").get<double>() + 1e-12);
    }
    const auto& comparisons = entry.at("comparisons");
    REQUIRE(comparisons.size() == 3);
    for (const auto& c : comparisons) {
      const double p_raw = c.at("p_raw").get<double>();
      CHECK(c.at("p_bonferroni").get<double>() ==
            Catch::Approx(std::min(1.0, p_raw * 15.0)));
    }
  }
}

TEST_CASE("five-seed statistics separate the modes at the exact rank level") {
  const SimConfig cfg = default_config();
  std::vector<RunResult> runs;
  for (GovernanceMode mode : kThreeModes)
    for (std::uint64_t seed = 0; seed < 5; ++seed)
      runs.push_back(run_simulation(cfg, mode, ThreatMode::adversarial,
                                    mock_compiler(), seed));

  const auto stats = multiseed_statistics(runs, 2000, 0);
  const auto& ecs_cmp = stats.at("metrics").at("ecs").at("comparisons");
  bool checked_exact = false;
  for (const auto& c : ecs_cmp) {
    // Adjacent regimes overlap slightly across seeds (strong, not total,
    // separation); the two extremes separate completely.
    if (c.at("pair") == "governed_vs_naive")
      CHECK(c.at("u").get<double>() >= 20.0);
    if (c.at("pair") == "naive_vs_unconstrained")
      CHECK(c.at("u").get<double>() == 25.0);
    if (c.at("pair") == "governed_vs_unconstrained") {
      CHECK(c.at("u").get<double>() == 25.0);
      CHECK(c.at("exact").get<bool>());
      CHECK(c.at("p_raw").get<double>() ==
            Catch::Approx(2.0 / 252.0).margin(1e-9));
      CHECK(c.at("p_bonferroni").get<double>() ==
            Catch::Approx(0.119).margin(1e-3));
      checked_exact = true;
    }
  }
  CHECK(checked_exact);

  const auto& autonomy = stats.at("metrics").at("autonomy").at("comparisons");
  for (const auto& c : autonomy) {
    if (c.at("pair") == "governed_vs_unconstrained")
      CHECK(c.at("u").get<double>() == 25.0);
  }
  const auto& coop_cmp =
      stats.at("metrics").at("cooperation").at("comparisons");
  for (const auto& c : coop_cmp) {
    if (c.at("pair") == "governed_vs_unconstrained")
      CHECK(c.at("u").get<double>() == 0.0);
  }
}

TEST_CASE("sensitivity bundle sweeps the four default parameters") {
  const fs::path dir = fresh_dir("sensitivity");
  ExperimentPlan plan = base_plan("sensitivity", dir);
  plan.seeds = {0};

  const auto files = cmd_sensitivity(plan, default_config(), mock_compiler());
  REQUIRE(files ==
          std::vector<std::string>{"sweep_ecs.csv", "sensitivity_indices.json"});

  const std::string csv = read_file(dir / "sweep_ecs.csv");
  CHECK(count_lines(csv) == 21);  // header + 4 parameters x 5 levels
  CHECK(csv.rfind("parameter,level,ecs_mean,ecs_std\n", 0) == 0);

  const auto indices =
      nlohmann::json::parse(read_file(dir / "sensitivity_indices.json"));
  CHECK(indices.at("mode") == "governed");
  const auto& params = indices.at("parameters");
  REQUIRE(params.size() == 4);
  for (const char* name : {"base_decay", "diffusion_rate", "prosocial_mean",
                           "susceptibility_mean"}) {
    const auto& entry = params.at(name);
    CHECK(entry.at("baseline_ecs").get<double>() > 0.0);
    CHECK(std::isfinite(entry.at("sensitivity_index").get<double>()));
  }
}

TEST_CASE("audit report is a faithful recomputation from the raw lines") {
  const fs::path dir = fresh_dir("audit_src");
  ExperimentPlan plan = base_plan("run", dir);
  plan.modes = {GovernanceMode::governed};
  plan.seeds = {2};
  cmd_run(plan, default_config(), mock_compiler());
  const fs::path audit_path = dir / "audit_governed_adversarial_seed2.jsonl";

  const fs::path report_dir = fresh_dir("audit_report");
  const auto report =
      cmd_audit_report(audit_path.string(), report_dir.string());

  // Independent aggregation from the same JSONL.
  std::ifstream in(audit_path);
  const AuditTrail trail = read_audit_jsonl(in);
  int skipped = 0, fallbacks = 0, selected = 0;
  double intensity_sum = 0.0;
  std::map<std::string, int> reasons, themes;
  for (const auto& entry : trail) {
    if (entry.skipped) ++skipped;
    if (entry.compiler_fallback) ++fallbacks;
    for (const auto& rec : entry.selection.rejections)
      for (auto reason : rec.reasons)
        reasons[std::string(to_string(reason))] += 1;
    if (!entry.skipped && entry.selection.selected) {
      themes[std::string(to_string(entry.selection.selected->theme))] += 1;
      intensity_sum += entry.selection.selected->intensity;
      ++selected;
    }
  }

  CHECK(report.at("n_deployments") == trail.size());
  CHECK(report.at("mode") == "governed");
  CHECK(report.at("skipped_deployments") == skipped);
  CHECK(report.at("compiler_fallbacks") == fallbacks);
  REQUIRE(report.at("per_deployment_rejections").size() == trail.size());
  for (const auto& [name, count] : reasons)
    CHECK(report.at("rejection_reason_counts").at(name) == count);
  for (const auto& [name, count] : themes)
    CHECK(report.at("selected_theme_counts").at(name) == count);
  CHECK(report.at("mean_selected_intensity").get<double>() ==
        Catch::Approx(intensity_sum / selected));

  // The governed adversarial trail is busy enough to exercise the counters.
  int total_reasons = 0;
  for (const auto& [name, count] : reasons) total_reasons += count;
  CHECK(total_reasons > 0);

  const fs::path report_file =
      report_dir / "audit_governed_adversarial_seed2_report.json";
  REQUIRE(fs::exists(report_file));
  CHECK(nlohmann::json::parse(read_file(report_file)) == report);

  CHECK_THROWS_AS(cmd_audit_report((dir / "missing.jsonl").string(), ""),
                  std::invalid_argument);
}
