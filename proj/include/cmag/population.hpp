#pragma once
// Agent population state shared by the compiler, governance, and dynamics
// layers.

#include <vector>

#include "cmag/core.hpp"
#include "cmag/netgen.hpp"
#include "cmag/rng.hpp"

namespace cmag {

struct AgentState {
  double prosocial = 0.0;       // static trait in [0, 1]
  double susceptibility = 0.0;  // static trait in [0, 1]
  double exposure = 0.0;        // accumulated influence dose
  bool cooperated = false;      // most recent cooperation draw
};

struct PopulationState {
  std::vector<AgentState> agents;
  Network network;
  SubgroupPartition partition;
  int t = 0;
};

inline double mean_prosocial(const PopulationState& s) {
  double acc = 0.0;
  for (const auto& a : s.agents) acc += a.prosocial;
  return s.agents.empty() ? 0.0 : acc / static_cast<double>(s.agents.size());
}

inline double mean_susceptibility(const PopulationState& s) {
  double acc = 0.0;
  for (const auto& a : s.agents) acc += a.susceptibility;
  return s.agents.empty() ? 0.0 : acc / static_cast<double>(s.agents.size());
}

inline double mean_exposure(const PopulationState& s) {
  double acc = 0.0;
  for (const auto& a : s.agents) acc += a.exposure;
  return s.agents.empty() ? 0.0 : acc / static_cast<double>(s.agents.size());
}

inline double max_exposure(const PopulationState& s) {
  double m = 0.0;
  for (const auto& a : s.agents) m = std::max(m, a.exposure);
  return m;
}

// Traits drawn from clipped normals; exposure starts at zero.
inline PopulationState init_population(const SimConfig& cfg, Network network,
                                       Rng& rng) {
  PopulationState s;
  s.network = std::move(network);
  s.partition = hub_partition(s.network, cfg.hub_quantile);
  s.agents.resize(s.network.n);
  for (auto& a : s.agents) {
    a.prosocial = clamp01(rng.normal(cfg.prosocial_mean, cfg.prosocial_std));
    a.susceptibility =
        clamp01(rng.normal(cfg.susceptibility_mean, cfg.susceptibility_std));
    a.exposure = 0.0;
    a.cooperated = false;
  }
  s.t = 0;
  return s;
}

}  // namespace cmag
