#pragma once
// Core value types for the influence-policy pipeline: policies and their
// self-describing explanations, the constitution that constrains them, and the
// simulation configuration with its validation rules.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace cmag {

enum class Theme { moral, hope, community, fear };
enum class ClaimType { factual, exaggerated, misleading };
enum class Targeting { hubs, random, periphery };
enum class Timing { burst, sustained };
enum class IntensityBand { low, medium, high };
enum class GovernanceMode { governed, naive, unconstrained };
enum class ThreatMode { adversarial, benign };

inline constexpr std::array<Theme, 4> kAllThemes{Theme::moral, Theme::hope,
                                                 Theme::community, Theme::fear};
inline constexpr std::array<Theme, 3> kBenignThemes{Theme::moral, Theme::hope,
                                                    Theme::community};
inline constexpr std::array<ClaimType, 3> kAllClaims{
    ClaimType::factual, ClaimType::exaggerated, ClaimType::misleading};
inline constexpr std::array<Targeting, 3> kAllTargetings{
    Targeting::hubs, Targeting::random, Targeting::periphery};
inline constexpr std::array<Timing, 2> kAllTimings{Timing::burst,
                                                   Timing::sustained};
inline constexpr std::array<GovernanceMode, 3> kAllModes{
    GovernanceMode::governed, GovernanceMode::naive,
    GovernanceMode::unconstrained};

inline std::string_view to_string(Theme v) {
  switch (v) {
    case Theme::moral: return "moral";
    case Theme::hope: return "hope";
    case Theme::community: return "community";
    case Theme::fear: return "fear";
  }
  return "?";
}
inline std::string_view to_string(ClaimType v) {
  switch (v) {
    case ClaimType::factual: return "factual";
    case ClaimType::exaggerated: return "exaggerated";
    case ClaimType::misleading: return "misleading";
  }
  return "?";
}
inline std::string_view to_string(Targeting v) {
  switch (v) {
    case Targeting::hubs: return "hubs";
    case Targeting::random: return "random";
    case Targeting::periphery: return "periphery";
  }
  return "?";
}
inline std::string_view to_string(Timing v) {
  switch (v) {
    case Timing::burst: return "burst";
    case Timing::sustained: return "sustained";
  }
  return "?";
}
inline std::string_view to_string(IntensityBand v) {
  switch (v) {
    case IntensityBand::low: return "low";
    case IntensityBand::medium: return "medium";
    case IntensityBand::high: return "high";
  }
  return "?";
}
inline std::string_view to_string(GovernanceMode v) {
  switch (v) {
    case GovernanceMode::governed: return "governed";
    case GovernanceMode::naive: return "naive";
    case GovernanceMode::unconstrained: return "unconstrained";
  }
  return "?";
}
inline std::string_view to_string(ThreatMode v) {
  switch (v) {
    case ThreatMode::adversarial: return "adversarial";
    case ThreatMode::benign: return "benign";
  }
  return "?";
}

template <typename E>
std::optional<E> enum_from_string(std::string_view) = delete;

template <>
inline std::optional<Theme> enum_from_string<Theme>(std::string_view s) {
  for (Theme v : kAllThemes)
    if (s == to_string(v)) return v;
  return std::nullopt;
}
template <>
inline std::optional<ClaimType> enum_from_string<ClaimType>(
    std::string_view s) {
  for (ClaimType v : kAllClaims)
    if (s == to_string(v)) return v;
  return std::nullopt;
}
template <>
inline std::optional<Targeting> enum_from_string<Targeting>(
    std::string_view s) {
  for (Targeting v : kAllTargetings)
    if (s == to_string(v)) return v;
  return std::nullopt;
}
template <>
inline std::optional<Timing> enum_from_string<Timing>(std::string_view s) {
  for (Timing v : kAllTimings)
    if (s == to_string(v)) return v;
  return std::nullopt;
}
template <>
inline std::optional<IntensityBand> enum_from_string<IntensityBand>(
    std::string_view s) {
  for (IntensityBand v :
       {IntensityBand::low, IntensityBand::medium, IntensityBand::high})
    if (s == to_string(v)) return v;
  return std::nullopt;
}
template <>
inline std::optional<GovernanceMode> enum_from_string<GovernanceMode>(
    std::string_view s) {
  for (GovernanceMode v : kAllModes)
    if (s == to_string(v)) return v;
  return std::nullopt;
}
template <>
inline std::optional<ThreatMode> enum_from_string<ThreatMode>(
    std::string_view s) {
  for (ThreatMode v : {ThreatMode::adversarial, ThreatMode::benign})
    if (s == to_string(v)) return v;
  return std::nullopt;
}

// Intensity bands: low [0, 0.4), medium [0.4, 0.7), high [0.7, 1.0].
inline IntensityBand band_of(double intensity) {
  if (intensity < 0.4) return IntensityBand::low;
  if (intensity < 0.7) return IntensityBand::medium;
  return IntensityBand::high;
}

inline bool band_contains(IntensityBand b, double intensity) {
  switch (b) {
    case IntensityBand::low: return intensity >= 0.0 && intensity < 0.4;
    case IntensityBand::medium: return intensity >= 0.4 && intensity < 0.7;
    case IntensityBand::high: return intensity >= 0.7 && intensity <= 1.0;
  }
  return false;
}

// A policy's own account of itself; may disagree with the actual attributes.
struct ExplanationMeta {
  std::string rationale_text;
  Theme declared_theme = Theme::moral;
  ClaimType declared_claim_type = ClaimType::factual;
  IntensityBand declared_intensity_band = IntensityBand::medium;

  bool operator==(const ExplanationMeta&) const = default;
};

struct Policy {
  Theme theme = Theme::moral;
  ClaimType claim_type = ClaimType::factual;
  double intensity = 0.5;  // in [0, 1]
  Targeting targeting = Targeting::random;
  Timing timing = Timing::sustained;
  ExplanationMeta explanation;

  bool operator==(const Policy&) const = default;
};

struct Constitution {
  std::set<Theme> forbidden_themes = {Theme::fear};
  std::set<ClaimType> forbidden_claims = {ClaimType::exaggerated,
                                          ClaimType::misleading};
  double max_intensity = 0.80;       // hard intensity ceiling
  double intensity_penalty = 0.6;    // soft-stage quadratic intensity weight
  double exposure_multiplier = 0.70; // governed dose attenuation
  double governance_decay = 0.03;    // extra exposure decay under governance

  bool operator==(const Constitution&) const = default;
};

struct DynamicsCoefficients {
  double logit_bias = -0.25;
  double prosocial_gain = 2.1;
  double exposure_gain = 0.85;

  bool operator==(const DynamicsCoefficients&) const = default;
};

struct MetricsCoefficients {
  double autonomy_coeff = 0.18;   // autonomy loss per unit mean pressure
  double integrity_coeff = 0.033; // integrity loss per unit mean exposure
  double fairness_coeff = 0.22;   // fairness loss per unit subgroup gap

  bool operator==(const MetricsCoefficients&) const = default;
};

struct SimConfig {
  int n_agents = 80;
  int ba_m = 3;                   // attachment edges per arriving node
  double prosocial_mean = 0.42;
  double prosocial_std = 0.12;
  double susceptibility_mean = 0.55;
  double susceptibility_std = 0.18;
  int horizon = 100;              // simulation steps
  int deploy_interval = 10;       // steps between policy deployments
  double target_fraction = 0.12;  // fraction of agents dosed per deployment
  double base_decay = 0.06;
  double diffusion_rate = 0.12;
  double exposure_cap = 5.0;
  int n_candidates = 6;
  double violation_prob_adversarial = 0.70;  // stress-slot probability
  double violation_prob_benign = 0.15;
  double dose_scale = 2.5;        // intensity-to-exposure calibration knob
  double hub_quantile = 0.75;
  int steady_window = 15;         // trailing steps for steady-state summaries
  Constitution constitution;
  DynamicsCoefficients dynamics;
  MetricsCoefficients metrics;

  bool operator==(const SimConfig&) const = default;
};

inline SimConfig default_config() { return SimConfig{}; }

inline double violation_prob_for(const SimConfig& cfg, ThreatMode threat) {
  return threat == ThreatMode::adversarial ? cfg.violation_prob_adversarial
                                           : cfg.violation_prob_benign;
}

// Validation reports violations as data, one entry per broken invariant,
// each naming the offending field.
struct ValidationResult {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

inline ValidationResult validate_config(const SimConfig& cfg) {
  ValidationResult r;
  auto bad = [&r](std::string msg) { r.violations.push_back(std::move(msg)); };

  if (cfg.ba_m < 1) bad("ba_m: must be >= 1");
  if (cfg.n_agents <= cfg.ba_m) bad("n_agents: must exceed ba_m");
  if (cfg.prosocial_mean < 0.0 || cfg.prosocial_mean > 1.0)
    bad("prosocial_mean: must lie in [0, 1]");
  if (cfg.prosocial_std < 0.0) bad("prosocial_std: must be >= 0");
  if (cfg.susceptibility_mean < 0.0 || cfg.susceptibility_mean > 1.0)
    bad("susceptibility_mean: must lie in [0, 1]");
  if (cfg.susceptibility_std < 0.0) bad("susceptibility_std: must be >= 0");
  if (cfg.deploy_interval < 1) bad("deploy_interval: must be >= 1");
  if (cfg.horizon < 1) bad("horizon: must be >= 1");
  if (cfg.deploy_interval >= 1 && cfg.horizon >= 1 &&
      cfg.horizon % cfg.deploy_interval != 0)
    bad("deploy_interval: must divide horizon evenly");
  if (!(cfg.target_fraction > 0.0) || cfg.target_fraction > 1.0)
    bad("target_fraction: must lie in (0, 1]");
  if (cfg.base_decay < 0.0 || cfg.base_decay >= 1.0)
    bad("base_decay: must lie in [0, 1)");
  if (cfg.diffusion_rate < 0.0 || cfg.diffusion_rate >= 1.0)
    bad("diffusion_rate: must lie in [0, 1)");
  if (!(cfg.exposure_cap > 0.0)) bad("exposure_cap: must be > 0");
  if (cfg.n_candidates < 1) bad("n_candidates: must be >= 1");
  if (cfg.violation_prob_adversarial < 0.0 ||
      cfg.violation_prob_adversarial > 1.0)
    bad("violation_prob_adversarial: must lie in [0, 1]");
  if (cfg.violation_prob_benign < 0.0 || cfg.violation_prob_benign > 1.0)
    bad("violation_prob_benign: must lie in [0, 1]");
  if (!(cfg.dose_scale > 0.0)) bad("dose_scale: must be > 0");
  if (!(cfg.hub_quantile > 0.0) || !(cfg.hub_quantile < 1.0))
    bad("hub_quantile: must lie in (0, 1)");
  if (cfg.steady_window < 1 || cfg.steady_window > cfg.horizon)
    bad("steady_window: must lie in [1, horizon]");
  if (!(cfg.constitution.max_intensity > 0.0) ||
      cfg.constitution.max_intensity > 1.0)
    bad("max_intensity: must lie in (0, 1]");
  if (cfg.constitution.intensity_penalty < 0.0)
    bad("intensity_penalty: must be >= 0");
  if (!(cfg.constitution.exposure_multiplier > 0.0) ||
      cfg.constitution.exposure_multiplier > 1.0)
    bad("exposure_multiplier: must lie in (0, 1]");
  if (cfg.constitution.governance_decay < 0.0 ||
      cfg.constitution.governance_decay >= 1.0)
    bad("governance_decay: must lie in [0, 1)");
  for (double v : {cfg.dynamics.logit_bias, cfg.dynamics.prosocial_gain,
                   cfg.dynamics.exposure_gain})
    if (!std::isfinite(v)) {
      bad("dynamics: coefficients must be finite");
      break;
    }
  if (cfg.metrics.autonomy_coeff < 0.0) bad("autonomy_coeff: must be >= 0");
  if (cfg.metrics.integrity_coeff < 0.0) bad("integrity_coeff: must be >= 0");
  if (cfg.metrics.fairness_coeff < 0.0) bad("fairness_coeff: must be >= 0");
  return r;
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace cmag
