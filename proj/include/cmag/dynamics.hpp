#pragma once
// Networked influence dynamics: exposure decay, neighbor diffusion, dose
// scheduling, stochastic cooperation decisions, and the full simulation loop.

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "cmag/compiler.hpp"
#include "cmag/core.hpp"
#include "cmag/governance.hpp"
#include "cmag/metrics.hpp"
#include "cmag/population.hpp"
#include "cmag/rng.hpp"

namespace cmag {

inline double cooperation_probability(double prosocial, double exposure,
                                      double susceptibility,
                                      const DynamicsCoefficients& c) {
  return sigmoid(c.logit_bias + c.prosocial_gain * prosocial +
                 c.exposure_gain * exposure * susceptibility);
}

// Per-step dose additions: amount added to each listed agent this step.
struct DoseApplication {
  std::vector<int> targets;
  double amount = 0.0;
};

// Update order within one step: decay, diffusion from a simultaneous
// snapshot, dosing, cap, cooperation draws. Metrics are recorded afterward
// so deployment-step spikes are visible in the same step's record.
inline void step(PopulationState& state, const SimConfig& cfg,
                 GovernanceMode mode,
                 const std::vector<DoseApplication>& doses, Rng& decision_rng,
                 MetricRecord* record = nullptr) {
  const double decay =
      effective_decay(mode, cfg.base_decay, cfg.constitution);
  const double keep = 1.0 - decay;
  const int n = static_cast<int>(state.agents.size());

  for (auto& a : state.agents) a.exposure *= keep;

  std::vector<double> snapshot(n);
  for (int i = 0; i < n; ++i) snapshot[i] = state.agents[i].exposure;
  for (int i = 0; i < n; ++i) {
    const auto& adj = state.network.neighbors[i];
    if (adj.empty()) continue;
    double neighbor_sum = 0.0;
    for (int j : adj) neighbor_sum += snapshot[j];
    const double neighbor_mean =
        neighbor_sum / static_cast<double>(adj.size());
    state.agents[i].exposure +=
        cfg.diffusion_rate * (neighbor_mean - snapshot[i]);
  }

  for (const auto& dose : doses)
    for (int v : dose.targets) state.agents[v].exposure += dose.amount;

  for (auto& a : state.agents)
    a.exposure = std::clamp(a.exposure, 0.0, cfg.exposure_cap);

  for (auto& a : state.agents) {
    const double p = cooperation_probability(a.prosocial, a.exposure,
                                             a.susceptibility, cfg.dynamics);
    a.cooperated = decision_rng.bernoulli(p);
  }

  for (const auto& a : state.agents) {
    if (!(a.exposure >= 0.0 && a.exposure <= cfg.exposure_cap))
      throw std::logic_error("step: exposure left [0, exposure_cap]");
  }

  if (record) {
    record->t = state.t;
    record->cooperation = cooperation_rate(state);
    record->autonomy = autonomy(state, cfg.metrics);
    record->avg_exposure = mean_exposure(state);
    record->max_exposure = max_exposure(state);
    record->integrity =
        integrity_from_avg_exposure(record->avg_exposure, cfg.metrics);
    const SubgroupGaps gaps = subgroup_gaps(state);
    record->gap_exposure = gaps.degenerate ? 0.0 : gaps.exposure_gap;
    record->gap_cooperation = gaps.degenerate ? 0.0 : gaps.cooperation_gap;
    record->fairness = gaps.degenerate
                           ? 1.0
                           : fairness_from_gap(gaps.exposure_gap, cfg.metrics);
    std::vector<double> exposures(n);
    for (int i = 0; i < n; ++i) exposures[i] = state.agents[i].exposure;
    record->exposure_gini = gini(exposures);
    record->ecs = ecs(record->cooperation, record->autonomy, record->integrity,
                      record->fairness);
  }
  state.t += 1;
}

// Compiler callable: produces the base policy for a deployment and reports
// whether an external call fell back to the mock.
struct CompileOutcome {
  Policy policy;
  bool used_fallback = false;
};

using CompileFn = std::function<CompileOutcome(const PopulationSummary&)>;

inline CompileFn mock_compiler() {
  return [](const PopulationSummary& summary) {
    return CompileOutcome{mock_compile(summary), false};
  };
}

struct RunResult {
  std::vector<MetricRecord> timeseries;
  AuditTrail audit;
  SimConfig config_echo;
  GovernanceMode mode = GovernanceMode::governed;
  ThreatMode threat = ThreatMode::adversarial;
  std::uint64_t seed = 0;
};

// Named substreams per component keep runs reproducible and aligned across
// modes sharing a seed: graph, population, per-deployment candidates and
// targeting, per-step decisions.
inline RunResult run_simulation(const SimConfig& cfg, GovernanceMode mode,
                                ThreatMode threat, const CompileFn& compile,
                                std::uint64_t seed) {
  const ValidationResult validation = validate_config(cfg);
  if (!validation.ok())
    throw std::invalid_argument("run_simulation: invalid config: " +
                                validation.violations.front());

  RunResult result;
  result.config_echo = cfg;
  result.mode = mode;
  result.threat = threat;
  result.seed = seed;

  Rng graph_rng = derive_stream(seed, "graph");
  Network net = generate_ba(cfg.n_agents, cfg.ba_m, graph_rng);
  Rng pop_rng = derive_stream(seed, "population");
  PopulationState state = init_population(cfg, std::move(net), pop_rng);

  const double susceptibility_mean = mean_susceptibility(state);
  const UtilityWeights weights = default_weights(cfg.constitution);

  std::vector<std::vector<DoseApplication>> schedule(cfg.horizon);
  result.timeseries.resize(cfg.horizon);

  for (int t = 0; t < cfg.horizon; ++t) {
    if (t % cfg.deploy_interval == 0) {
      const int d = t / cfg.deploy_interval;
      const PopulationSummary summary =
          summarize_population(state, t, threat);
      const CompileOutcome compiled = compile(summary);

      Rng pool_rng = derive_stream(seed, "candidates", d);
      CandidatePool pool =
          generate_candidate_pool(compiled.policy, cfg, threat, pool_rng);
      SelectionResult selection = select_policy(
          pool, mode, cfg.constitution, weights, susceptibility_mean, d);

      AuditEntry entry;
      entry.deployment_index = d;
      entry.t = t;
      entry.mode = mode;
      entry.threat = threat;
      entry.pool = pool;
      entry.compiler_fallback = compiled.used_fallback;
      if (selection.selected) {
        const Policy& p = *selection.selected;
        Rng target_rng = derive_stream(seed, "targeting", d);
        entry.targets =
            targets_for(state.network, p.targeting, cfg.target_fraction,
                        target_rng);
        entry.dose = effective_dose(p, mode, cfg.constitution, cfg.dose_scale);
        if (p.timing == Timing::burst) {
          schedule[t].push_back(DoseApplication{entry.targets, entry.dose});
        } else {
          const double per_step =
              entry.dose / static_cast<double>(cfg.deploy_interval);
          for (int dt = 0; dt < cfg.deploy_interval && t + dt < cfg.horizon;
               ++dt)
            schedule[t + dt].push_back(
                DoseApplication{entry.targets, per_step});
        }
      } else {
        entry.skipped = true;
      }
      entry.selection = std::move(selection);
      result.audit.push_back(std::move(entry));
    }

    Rng decision_rng = derive_stream(seed, "decisions", t);
    step(state, cfg, mode, schedule[t], decision_rng, &result.timeseries[t]);
  }
  return result;
}

}  // namespace cmag
