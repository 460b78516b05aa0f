// Command-line front end: run, compare, multiseed, sensitivity, and
// audit-report scenarios over the simulation library.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime failure,
// 3 external compiler produced no usable policy (every call fell back).

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cmag/cmag.hpp"

namespace {

struct CliOptions {
  std::string mode = "governed";
  std::string threat = "adversarial";
  std::vector<std::uint64_t> seeds = {0};
  std::string config_path;
  std::string out_dir = "out";
  std::string compiler = "mock";
  std::string endpoint;
  std::string api_key_env = "CMAG_API_KEY";
  double dose_scale = -1.0;  // negative = keep config value
  std::string audit_path;
};

cmag::SimConfig load_config(const CliOptions& opt) {
  cmag::SimConfig cfg = opt.config_path.empty()
                            ? cmag::default_config()
                            : cmag::load_config_file(opt.config_path);
  if (opt.dose_scale >= 0.0) cfg.dose_scale = opt.dose_scale;
  const cmag::ValidationResult check = cmag::validate_config(cfg);
  if (!check.ok()) {
    std::string message = "invalid configuration:";
    for (const std::string& v : check.violations) message += "\n  " + v;
    throw std::invalid_argument(message);
  }
  return cfg;
}

cmag::CompileFn make_compile(const CliOptions& opt) {
  cmag::CompilerConfig compiler;
  if (opt.compiler == "external") {
    compiler.kind = cmag::CompilerKind::external;
    compiler.endpoint_url = opt.endpoint;
    compiler.api_key_env_name = opt.api_key_env;
    if (opt.endpoint.empty())
      throw std::invalid_argument("--endpoint is required with external");
  }
  return cmag::make_compiler(compiler);
}

cmag::ExperimentPlan make_plan(const CliOptions& opt,
                               const std::string& scenario) {
  cmag::ExperimentPlan plan;
  plan.scenario = scenario;
  plan.out_dir = opt.out_dir;
  plan.compiler_kind = opt.compiler == "external" ? cmag::CompilerKind::external
                                                  : cmag::CompilerKind::mock;
  plan.seeds = opt.seeds;
  const auto threat = cmag::enum_from_string<cmag::ThreatMode>(opt.threat);
  if (!threat)
    throw std::invalid_argument("unknown threat mode: " + opt.threat);
  plan.threat = *threat;
  if (scenario == "compare" || scenario == "multiseed") {
    plan.modes = {cmag::GovernanceMode::governed, cmag::GovernanceMode::naive,
                  cmag::GovernanceMode::unconstrained};
  } else {
    const auto mode = cmag::enum_from_string<cmag::GovernanceMode>(opt.mode);
    if (!mode)
      throw std::invalid_argument("unknown governance mode: " + opt.mode);
    plan.modes = {*mode};
  }
  return plan;
}

int external_exit(const cmag::ExperimentPlan& plan,
                  const cmag::CompileStats& stats) {
  if (plan.compiler_kind == cmag::CompilerKind::external &&
      stats.calls > 0 && stats.fallbacks == stats.calls) {
    std::cerr << "error: external compiler never produced a usable policy ("
              << stats.fallbacks << "/" << stats.calls
              << " calls fell back)\n";
    return 3;
  }
  return 0;
}

void print_files(const std::vector<std::string>& files,
                 const std::string& out_dir) {
  for (const std::string& f : files) std::cout << out_dir << "/" << f << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Influence-policy governance simulator"};
  app.require_subcommand(1);
  CliOptions opt;

  auto add_common = [&](CLI::App* sub, bool with_mode, bool multi_seed) {
    if (with_mode)
      sub->add_option("--mode", opt.mode,
                      "governed, naive, or unconstrained");
    sub->add_option("--threat", opt.threat, "adversarial or benign");
    if (multi_seed)
      sub->add_option("--seeds", opt.seeds, "seed list")->delimiter(',');
    else
      sub->add_option("--seed", opt.seeds,
                      "single seed")->expected(1);
    sub->add_option("--config", opt.config_path, "config JSON path");
    sub->add_option("--out-dir", opt.out_dir, "output directory");
    sub->add_option("--compiler", opt.compiler, "mock or external")
        ->check(CLI::IsMember({"mock", "external"}));
    sub->add_option("--endpoint", opt.endpoint,
                    "external compiler endpoint URL");
    sub->add_option("--api-key-env", opt.api_key_env,
                    "environment variable holding the API key");
    sub->add_option("--dose-scale", opt.dose_scale,
                    "override the configured dose scale");
  };

  CLI::App* run = app.add_subcommand("run", "one mode, one seed");
  add_common(run, true, false);
  CLI::App* compare =
      app.add_subcommand("compare", "all three modes on one seed");
  add_common(compare, false, false);
  CLI::App* multiseed =
      app.add_subcommand("multiseed", "all three modes across a seed grid");
  add_common(multiseed, false, true);
  CLI::App* sensitivity =
      app.add_subcommand("sensitivity", "one-at-a-time parameter sweeps");
  add_common(sensitivity, true, false);
  CLI::App* audit_report =
      app.add_subcommand("audit-report", "summarize an audit trail");
  audit_report->add_option("audit", opt.audit_path, "audit JSONL path")
      ->required();
  audit_report->add_option("--out-dir", opt.out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage errors collapse onto exit code 1
  }

  try {
    if (audit_report->parsed()) {
      const nlohmann::ordered_json report =
          cmag::cmd_audit_report(opt.audit_path, opt.out_dir);
      std::cout << report.dump(2) << "\n";
      return 0;
    }

    const cmag::SimConfig cfg = load_config(opt);
    const cmag::CompileFn compile = make_compile(opt);
    cmag::CompileStats stats;

    if (run->parsed()) {
      const auto plan = make_plan(opt, "run");
      print_files(cmag::cmd_run(plan, cfg, compile, &stats), plan.out_dir);
      return external_exit(plan, stats);
    }
    if (compare->parsed()) {
      const auto plan = make_plan(opt, "compare");
      print_files(cmag::cmd_compare(plan, cfg, compile, &stats), plan.out_dir);
      return external_exit(plan, stats);
    }
    if (multiseed->parsed()) {
      const auto plan = make_plan(opt, "multiseed");
      print_files(cmag::cmd_multiseed(plan, cfg, compile, &stats),
                  plan.out_dir);
      return external_exit(plan, stats);
    }
    if (sensitivity->parsed()) {
      const auto plan = make_plan(opt, "sensitivity");
      print_files(cmag::cmd_sensitivity(plan, cfg, compile, &stats),
                  plan.out_dir);
      return external_exit(plan, stats);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
