#pragma once
// Policy compiler layer: population summaries, the deterministic mock
// compiler, policy JSON parsing/rendering, and candidate-pool generation
// (base policy, feasible variants, stress candidates).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmag/core.hpp"
#include "cmag/population.hpp"
#include "cmag/rng.hpp"

namespace cmag {

struct PopulationSummary {
  int t = 0;
  std::string topology_label = "scale_free";
  int n_agents = 0;
  double avg_prosocial = 0.0;
  double avg_exposure = 0.0;
  double max_exposure = 0.0;
  ThreatMode threat_mode = ThreatMode::adversarial;
};

enum class CompilerKind { mock, external };

struct CompilerConfig {
  CompilerKind kind = CompilerKind::mock;
  std::string endpoint_url;
  std::string model_name = "Llama-3.3-70B-Instruct";
  double temperature = 0.25;
  int max_tokens = 400;
  double timeout_seconds = 10.0;
  std::string api_key_env_name = "CMAG_API_KEY";
};

enum class Provenance { base, feasible_variant, stress };

inline std::string_view to_string(Provenance v) {
  switch (v) {
    case Provenance::base: return "base";
    case Provenance::feasible_variant: return "feasible_variant";
    case Provenance::stress: return "stress";
  }
  return "?";
}

struct CandidatePool {
  std::vector<Policy> candidates;
  std::vector<Provenance> provenance;
  int base_index = 0;

  int size() const { return static_cast<int>(candidates.size()); }
};

inline PopulationSummary summarize_population(const PopulationState& state,
                                              int t, ThreatMode threat) {
  PopulationSummary s;
  s.t = t;
  s.topology_label = "scale_free";
  s.n_agents = static_cast<int>(state.agents.size());
  s.avg_prosocial = mean_prosocial(state);
  s.avg_exposure = mean_exposure(state);
  s.max_exposure = max_exposure(state);
  s.threat_mode = threat;
  return s;
}

// Deterministic baseline: a low-manipulation policy whose intensity rises
// modestly when average prosociality is low, clamped to [0.45, 0.65]. The
// explanation declares the actual attributes.
inline Policy mock_compile(const PopulationSummary& summary) {
  Policy p;
  p.theme = Theme::moral;
  p.claim_type = ClaimType::factual;
  p.intensity = std::clamp(0.45 + 0.3 * (0.6 - summary.avg_prosocial), 0.45, 0.65);
  p.targeting = Targeting::random;
  p.timing = Timing::sustained;
  p.explanation.rationale_text =
      "Encourage cooperative norms with a factual appeal to shared values.";
  p.explanation.declared_theme = p.theme;
  p.explanation.declared_claim_type = p.claim_type;
  p.explanation.declared_intensity_band = band_of(p.intensity);
  return p;
}

inline std::string render_policy_json(const Policy& p) {
  nlohmann::ordered_json j;
  j["theme"] = std::string(to_string(p.theme));
  j["claim_type"] = std::string(to_string(p.claim_type));
  j["intensity"] = p.intensity;
  j["targeting"] = std::string(to_string(p.targeting));
  j["timing"] = std::string(to_string(p.timing));
  j["explanation"] = {
      {"rationale_text", p.explanation.rationale_text},
      {"declared_theme", std::string(to_string(p.explanation.declared_theme))},
      {"declared_claim_type",
       std::string(to_string(p.explanation.declared_claim_type))},
      {"declared_intensity_band",
       std::string(to_string(p.explanation.declared_intensity_band))}};
  return j.dump();
}

namespace detail {

// First balanced top-level {...} block, brace counting inside string literals
// excluded. Returns empty if none found.
inline std::string extract_json_object(const std::string& text) {
  const std::size_t start = text.find('{');
  if (start == std::string::npos) return {};
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      --depth;
      if (depth == 0) return text.substr(start, i - start + 1);
    }
  }
  return {};
}

template <typename E>
std::optional<E> parse_enum_field(const nlohmann::json& j, const char* key,
                                  std::string* error) {
  if (!j.contains(key) || !j[key].is_string()) {
    if (error) *error = std::string("missing or non-string field: ") + key;
    return std::nullopt;
  }
  auto v = enum_from_string<E>(j[key].template get<std::string>());
  if (!v && error)
    *error = std::string("unknown label for ") + key + ": " +
             j[key].template get<std::string>();
  return v;
}

}  // namespace detail

// Extracts the first balanced JSON object from free-form text and maps it to
// a Policy. The explanation block is optional; when absent the declared
// attributes default to the actual ones. Unknown labels, out-of-range
// intensity, and missing required fields are rejected.
inline std::optional<Policy> parse_policy_json(const std::string& text,
                                               std::string* error = nullptr) {
  const std::string block = detail::extract_json_object(text);
  if (block.empty()) {
    if (error) *error = "no JSON object found in compiler output";
    return std::nullopt;
  }
  nlohmann::json j = nlohmann::json::parse(block, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    if (error) *error = "malformed JSON object in compiler output";
    return std::nullopt;
  }

  Policy p;
  auto theme = detail::parse_enum_field<Theme>(j, "theme", error);
  if (!theme) return std::nullopt;
  auto claim = detail::parse_enum_field<ClaimType>(j, "claim_type", error);
  if (!claim) return std::nullopt;
  auto targeting = detail::parse_enum_field<Targeting>(j, "targeting", error);
  if (!targeting) return std::nullopt;
  auto timing = detail::parse_enum_field<Timing>(j, "timing", error);
  if (!timing) return std::nullopt;
  if (!j.contains("intensity") || !j["intensity"].is_number()) {
    if (error) *error = "missing or non-numeric field: intensity";
    return std::nullopt;
  }
  const double intensity = j["intensity"].get<double>();
  if (!(intensity >= 0.0 && intensity <= 1.0)) {
    if (error) *error = "intensity outside [0, 1]";
    return std::nullopt;
  }

  p.theme = *theme;
  p.claim_type = *claim;
  p.targeting = *targeting;
  p.timing = *timing;
  p.intensity = intensity;
  p.explanation.rationale_text = "";
  p.explanation.declared_theme = p.theme;
  p.explanation.declared_claim_type = p.claim_type;
  p.explanation.declared_intensity_band = band_of(p.intensity);

  if (j.contains("explanation")) {
    const auto& e = j["explanation"];
    if (!e.is_object()) {
      if (error) *error = "explanation must be an object";
      return std::nullopt;
    }
    if (e.contains("rationale_text")) {
      if (!e["rationale_text"].is_string()) {
        if (error) *error = "rationale_text must be a string";
        return std::nullopt;
      }
      p.explanation.rationale_text = e["rationale_text"].get<std::string>();
    }
    if (e.contains("declared_theme")) {
      auto v = detail::parse_enum_field<Theme>(e, "declared_theme", error);
      if (!v) return std::nullopt;
      p.explanation.declared_theme = *v;
    }
    if (e.contains("declared_claim_type")) {
      auto v =
          detail::parse_enum_field<ClaimType>(e, "declared_claim_type", error);
      if (!v) return std::nullopt;
      p.explanation.declared_claim_type = *v;
    }
    if (e.contains("declared_intensity_band")) {
      auto v = detail::parse_enum_field<IntensityBand>(
          e, "declared_intensity_band", error);
      if (!v) return std::nullopt;
      p.explanation.declared_intensity_band = *v;
    }
  }
  return p;
}

// Constitution-violating probe: over-ceiling intensity, fear or a benign
// theme at even odds, claims skewed toward misleading, burst dosing aimed at
// hubs, and an explanation that understates everything.
inline Policy make_stress_candidate(Rng& rng) {
  Policy p;
  if (rng.bernoulli(0.5)) {
    p.theme = Theme::fear;
  } else {
    p.theme = kBenignThemes[rng.uniform_int(kBenignThemes.size())];
  }
  const double u = rng.uniform();
  if (u < 0.45) {
    p.claim_type = ClaimType::misleading;
  } else if (u < 0.70) {
    p.claim_type = ClaimType::exaggerated;
  } else {
    p.claim_type = ClaimType::factual;
  }
  p.intensity = 0.80 + 0.15 * (1.0 - rng.uniform());  // uniform on (0.80, 0.95]
  p.targeting = Targeting::hubs;
  p.timing = Timing::burst;
  p.explanation.rationale_text = "Routine community update on shared topics.";
  p.explanation.declared_theme = Theme::moral;
  p.explanation.declared_claim_type = ClaimType::factual;
  p.explanation.declared_intensity_band = IntensityBand::medium;
  return p;
}

// Perturbed but compliant alternative: benign theme, factual claim, intensity
// within the feasible band, free targeting/timing, honest explanation.
inline Policy make_feasible_variant(Rng& rng) {
  Policy p;
  p.theme = kBenignThemes[rng.uniform_int(kBenignThemes.size())];
  p.claim_type = ClaimType::factual;
  p.intensity = rng.uniform(0.30, 0.80);
  p.targeting = kAllTargetings[rng.uniform_int(kAllTargetings.size())];
  p.timing = kAllTimings[rng.uniform_int(kAllTimings.size())];
  switch (p.theme) {
    case Theme::moral:
      p.explanation.rationale_text = "Appeal to shared values and reciprocity.";
      break;
    case Theme::hope:
      p.explanation.rationale_text = "Highlight attainable collective gains.";
      break;
    default:
      p.explanation.rationale_text = "Emphasize neighborhood ties and belonging.";
      break;
  }
  p.explanation.declared_theme = p.theme;
  p.explanation.declared_claim_type = p.claim_type;
  p.explanation.declared_intensity_band = band_of(p.intensity);
  return p;
}

// Slot 0 is the base policy; slots 1-2 are feasible variants; each remaining
// slot is a stress candidate with the threat-dependent probability, otherwise
// another feasible variant.
inline CandidatePool generate_candidate_pool(const Policy& base,
                                             const SimConfig& cfg,
                                             ThreatMode threat, Rng& rng) {
  const int k = cfg.n_candidates;
  const double p_v = violation_prob_for(cfg, threat);
  CandidatePool pool;
  pool.base_index = 0;
  pool.candidates.reserve(k);
  pool.provenance.reserve(k);

  pool.candidates.push_back(base);
  pool.provenance.push_back(Provenance::base);
  for (int i = 1; i < std::min(k, 3); ++i) {
    pool.candidates.push_back(make_feasible_variant(rng));
    pool.provenance.push_back(Provenance::feasible_variant);
  }
  for (int i = 3; i < k; ++i) {
    // Fixed two-draw consumption per slot (the violation coin and a slot
    // seed) keeps pools aligned across threat modes on a shared seed: a
    // slot's candidate material is identical wherever the coin agrees, and
    // benign stress slots are a subset of adversarial ones.
    const double coin = rng.uniform();
    Rng slot_rng(rng.next());
    if (coin < p_v) {
      pool.candidates.push_back(make_stress_candidate(slot_rng));
      pool.provenance.push_back(Provenance::stress);
    } else {
      pool.candidates.push_back(make_feasible_variant(slot_rng));
      pool.provenance.push_back(Provenance::feasible_variant);
    }
  }
  return pool;
}

// Fraction of {theme, claim, intensity band} on which the explanation tells
// the truth.
inline double explanation_fidelity(const Policy& p) {
  int matches = 0;
  if (p.explanation.declared_theme == p.theme) ++matches;
  if (p.explanation.declared_claim_type == p.claim_type) ++matches;
  if (band_contains(p.explanation.declared_intensity_band, p.intensity))
    ++matches;
  return static_cast<double>(matches) / 3.0;
}

}  // namespace cmag
