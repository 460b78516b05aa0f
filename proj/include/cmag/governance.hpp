#pragma once
// Two-stage governance: a hard constitutional filter over candidate pools,
// soft penalized-utility selection among the survivors, exposure modulation
// for the selected policy, and the append-only audit trail.

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmag/compiler.hpp"
#include "cmag/core.hpp"

namespace cmag {

enum class RejectionReason { forbidden_theme, forbidden_claim, intensity_exceeded };

inline std::string_view to_string(RejectionReason v) {
  switch (v) {
    case RejectionReason::forbidden_theme: return "forbidden_theme";
    case RejectionReason::forbidden_claim: return "forbidden_claim";
    case RejectionReason::intensity_exceeded: return "intensity_exceeded";
  }
  return "?";
}

inline std::optional<RejectionReason> rejection_reason_from_string(
    std::string_view s) {
  for (RejectionReason v :
       {RejectionReason::forbidden_theme, RejectionReason::forbidden_claim,
        RejectionReason::intensity_exceeded})
    if (s == to_string(v)) return v;
  return std::nullopt;
}

struct RejectionRecord {
  int deployment_index = 0;
  int candidate_index = 0;
  std::vector<RejectionReason> reasons;  // non-empty, every applicable reason

  bool operator==(const RejectionRecord&) const = default;
};

// Soft-stage scoring tables. The benefit proxy multiplies per-attribute
// boosts; the penalty weights trade that benefit against intensity,
// manipulativeness, autonomy pressure, and explanation infidelity.
struct UtilityWeights {
  double w_intensity = 0.6;      // taken from Constitution::intensity_penalty
  double w_manipulation = 0.5;
  double w_autonomy = 0.3;
  double w_fidelity = 0.2;
  double w_targeting = 0.15;
  std::array<double, 4> theme_boost{0.85, 0.80, 0.78, 1.30};   // moral, hope, community, fear
  std::array<double, 3> claim_boost{1.00, 1.10, 1.20};         // factual, exaggerated, misleading
  std::array<double, 2> timing_boost{1.10, 1.00};              // burst, sustained
  std::array<double, 3> target_boost{1.15, 1.00, 0.90};        // hubs, random, periphery
  // Structural-targeting pressure: only hub concentration is penalized in the
  // soft stage. w_targeting exceeds the largest feasible hub boost advantage
  // (0.80·0.85·1.10·0.15 = 0.112), so the selector never prefers a candidate
  // because it aims at hubs, yet hub targeting can still win on other merits.
  std::array<double, 3> target_bias{1.0, 0.0, 0.0};            // hubs, random, periphery
  std::array<double, 4> manipulation_theme{0.1, 0.1, 0.1, 0.8};
  std::array<double, 3> manipulation_claim{0.0, 0.5, 0.7};

  double theme_boost_of(Theme t) const {
    return theme_boost[static_cast<int>(t)];
  }
  double claim_boost_of(ClaimType c) const {
    return claim_boost[static_cast<int>(c)];
  }
  double timing_boost_of(Timing t) const {
    return timing_boost[static_cast<int>(t)];
  }
  double target_boost_of(Targeting t) const {
    return target_boost[static_cast<int>(t)];
  }
  double target_bias_of(Targeting t) const {
    return target_bias[static_cast<int>(t)];
  }
};

inline UtilityWeights default_weights(const Constitution& c) {
  UtilityWeights w;
  w.w_intensity = c.intensity_penalty;
  return w;
}

struct SelectionResult {
  std::optional<Policy> selected;
  std::optional<int> selected_index;
  GovernanceMode mode = GovernanceMode::governed;
  int feasible_count = 0;
  std::vector<RejectionRecord> rejections;
  std::vector<double> utility_scores;   // governed only; aligned with feasible_indices
  std::vector<int> feasible_indices;    // pool order preserved
};

inline bool violates_hard_constraints(const Policy& p, const Constitution& c) {
  return c.forbidden_themes.count(p.theme) > 0 ||
         c.forbidden_claims.count(p.claim_type) > 0 ||
         p.intensity > c.max_intensity;
}

// Every applicable reason is recorded for each rejected candidate; feasible
// indices preserve pool order.
inline std::vector<RejectionRecord> hard_filter(const CandidatePool& pool,
                                                const Constitution& c,
                                                int deployment_index,
                                                std::vector<int>* feasible) {
  std::vector<RejectionRecord> rejections;
  if (feasible) feasible->clear();
  for (int i = 0; i < pool.size(); ++i) {
    const Policy& p = pool.candidates[i];
    RejectionRecord rec;
    rec.deployment_index = deployment_index;
    rec.candidate_index = i;
    if (c.forbidden_themes.count(p.theme) > 0)
      rec.reasons.push_back(RejectionReason::forbidden_theme);
    if (c.forbidden_claims.count(p.claim_type) > 0)
      rec.reasons.push_back(RejectionReason::forbidden_claim);
    if (p.intensity > c.max_intensity)
      rec.reasons.push_back(RejectionReason::intensity_exceeded);
    if (rec.reasons.empty()) {
      if (feasible) feasible->push_back(i);
    } else {
      rejections.push_back(std::move(rec));
    }
  }
  return rejections;
}

// Multiplicative benefit proxy for expected cooperation lift.
inline double cooperation_boost_proxy(const Policy& p,
                                      const UtilityWeights& w) {
  return p.intensity * w.theme_boost_of(p.theme) *
         w.claim_boost_of(p.claim_type) * w.timing_boost_of(p.timing) *
         w.target_boost_of(p.targeting);
}

inline double manipulation_score(const Policy& p, const UtilityWeights& w) {
  return w.manipulation_theme[static_cast<int>(p.theme)] +
         w.manipulation_claim[static_cast<int>(p.claim_type)];
}

inline double soft_utility(const Policy& p, const UtilityWeights& w,
                           double pop_susceptibility_mean) {
  return cooperation_boost_proxy(p, w) -
         w.w_intensity * p.intensity * p.intensity -
         w.w_manipulation * manipulation_score(p, w) -
         w.w_autonomy * p.intensity * pop_susceptibility_mean -
         w.w_fidelity * (1.0 - explanation_fidelity(p)) -
         w.w_targeting * w.target_bias_of(p.targeting);
}

// governed: hard filter then penalized-utility argmax (ties: lower intensity,
// then lower pool index). naive: hard filter then intensity argmax (ties:
// lower pool index). unconstrained: benefit-proxy argmax over the whole pool,
// no rejections recorded.
inline SelectionResult select_policy(const CandidatePool& pool,
                                     GovernanceMode mode,
                                     const Constitution& constitution,
                                     const UtilityWeights& weights,
                                     double pop_susceptibility_mean,
                                     int deployment_index = 0) {
  SelectionResult result;
  result.mode = mode;

  if (mode == GovernanceMode::unconstrained) {
    result.feasible_count = pool.size();
    int best = -1;
    double best_score = 0.0;
    for (int i = 0; i < pool.size(); ++i) {
      const double score = cooperation_boost_proxy(pool.candidates[i], weights);
      if (best < 0 || score > best_score) {
        best = i;
        best_score = score;
      }
    }
    if (best >= 0) {
      result.selected = pool.candidates[best];
      result.selected_index = best;
    }
    return result;
  }

  result.rejections =
      hard_filter(pool, constitution, deployment_index, &result.feasible_indices);
  result.feasible_count = static_cast<int>(result.feasible_indices.size());
  if (result.feasible_count == 0) return result;  // deployment skipped

  if (mode == GovernanceMode::governed) {
    result.utility_scores.reserve(result.feasible_indices.size());
    int best = -1;
    double best_score = 0.0;
    for (int idx : result.feasible_indices) {
      const double score =
          soft_utility(pool.candidates[idx], weights, pop_susceptibility_mean);
      result.utility_scores.push_back(score);
      if (best < 0 || score > best_score ||
          (score == best_score &&
           pool.candidates[idx].intensity < pool.candidates[best].intensity)) {
        best = idx;
        best_score = score;
      }
    }
    result.selected = pool.candidates[best];
    result.selected_index = best;
  } else {  // naive: highest feasible intensity
    int best = -1;
    for (int idx : result.feasible_indices) {
      if (best < 0 ||
          pool.candidates[idx].intensity > pool.candidates[best].intensity) {
        best = idx;
      }
    }
    result.selected = pool.candidates[best];
    result.selected_index = best;
  }
  return result;
}

// Exposure modulation: the governed mode attenuates dose and accelerates
// decay; the other modes pass the policy through unchanged.
inline double effective_dose(const Policy& p, GovernanceMode mode,
                             const Constitution& c, double dose_scale) {
  const double attenuation =
      mode == GovernanceMode::governed ? c.exposure_multiplier : 1.0;
  return p.intensity * dose_scale * attenuation;
}

inline double effective_decay(GovernanceMode mode, double base_decay,
                              const Constitution& c) {
  return base_decay +
         (mode == GovernanceMode::governed ? c.governance_decay : 0.0);
}

// One audit entry per deployment cycle, including skipped ones.
struct AuditEntry {
  int deployment_index = 0;
  int t = 0;
  GovernanceMode mode = GovernanceMode::governed;
  ThreatMode threat = ThreatMode::adversarial;
  CandidatePool pool;
  SelectionResult selection;
  std::vector<int> targets;        // empty when skipped
  double dose = 0.0;               // effective dose applied, 0 when skipped
  bool compiler_fallback = false;  // external compiler fell back to the mock
  bool skipped = false;
};

using AuditTrail = std::vector<AuditEntry>;

namespace detail {

inline nlohmann::ordered_json policy_to_json(const Policy& p) {
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
  return j;
}

inline Policy policy_from_json(const nlohmann::json& j) {
  std::string err;
  auto p = parse_policy_json(j.dump(), &err);
  if (!p) throw std::runtime_error("invalid policy record: " + err);
  if (j.contains("explanation") &&
      j["explanation"].contains("rationale_text")) {
    p->explanation.rationale_text =
        j["explanation"]["rationale_text"].get<std::string>();
  }
  return *p;
}

}  // namespace detail

inline nlohmann::ordered_json audit_entry_to_json(const AuditEntry& e) {
  nlohmann::ordered_json j;
  j["deployment_index"] = e.deployment_index;
  j["t"] = e.t;
  j["mode"] = std::string(to_string(e.mode));
  j["threat"] = std::string(to_string(e.threat));
  j["pool"] = nlohmann::ordered_json::array();
  for (int i = 0; i < e.pool.size(); ++i) {
    nlohmann::ordered_json c = detail::policy_to_json(e.pool.candidates[i]);
    c["provenance"] = std::string(to_string(e.pool.provenance[i]));
    j["pool"].push_back(std::move(c));
  }
  j["base_index"] = e.pool.base_index;
  j["feasible_count"] = e.selection.feasible_count;
  j["feasible_indices"] = e.selection.feasible_indices;
  j["rejections"] = nlohmann::ordered_json::array();
  for (const auto& rec : e.selection.rejections) {
    nlohmann::ordered_json r;
    r["candidate_index"] = rec.candidate_index;
    r["reasons"] = nlohmann::ordered_json::array();
    for (auto reason : rec.reasons)
      r["reasons"].push_back(std::string(to_string(reason)));
    j["rejections"].push_back(std::move(r));
  }
  j["utility_scores"] = e.selection.utility_scores;
  if (e.selection.selected_index) {
    j["selected_index"] = *e.selection.selected_index;
    j["selected"] = detail::policy_to_json(*e.selection.selected);
  } else {
    j["selected_index"] = nullptr;
    j["selected"] = nullptr;
  }
  j["targets"] = e.targets;
  j["dose"] = e.dose;
  j["compiler_fallback"] = e.compiler_fallback;
  j["skipped"] = e.skipped;
  return j;
}

inline void write_audit_jsonl(const AuditTrail& trail, std::ostream& os) {
  for (const auto& e : trail) os << audit_entry_to_json(e).dump() << '\n';
}

// Strict JSONL reader; any malformed line raises with its 1-based number.
inline AuditTrail read_audit_jsonl(std::istream& is) {
  AuditTrail trail;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw std::runtime_error("audit line " + std::to_string(line_no) +
                               ": malformed JSON");
    }
    try {
      AuditEntry e;
      e.deployment_index = j.at("deployment_index").get<int>();
      e.t = j.at("t").get<int>();
      auto mode = enum_from_string<GovernanceMode>(
          j.at("mode").get<std::string>());
      auto threat =
          enum_from_string<ThreatMode>(j.at("threat").get<std::string>());
      if (!mode || !threat) throw std::runtime_error("unknown mode or threat");
      e.mode = *mode;
      e.threat = *threat;
      for (const auto& c : j.at("pool")) {
        e.pool.candidates.push_back(detail::policy_from_json(c));
        auto prov = c.at("provenance").get<std::string>();
        if (prov == "base") {
          e.pool.provenance.push_back(Provenance::base);
        } else if (prov == "feasible_variant") {
          e.pool.provenance.push_back(Provenance::feasible_variant);
        } else if (prov == "stress") {
          e.pool.provenance.push_back(Provenance::stress);
        } else {
          throw std::runtime_error("unknown provenance: " + prov);
        }
      }
      e.pool.base_index = j.at("base_index").get<int>();
      e.selection.mode = e.mode;
      e.selection.feasible_count = j.at("feasible_count").get<int>();
      e.selection.feasible_indices =
          j.at("feasible_indices").get<std::vector<int>>();
      for (const auto& r : j.at("rejections")) {
        RejectionRecord rec;
        rec.deployment_index = e.deployment_index;
        rec.candidate_index = r.at("candidate_index").get<int>();
        for (const auto& reason : r.at("reasons")) {
          auto parsed = rejection_reason_from_string(reason.get<std::string>());
          if (!parsed) throw std::runtime_error("unknown rejection reason");
          rec.reasons.push_back(*parsed);
        }
        if (rec.reasons.empty())
          throw std::runtime_error("rejection record without reasons");
        e.selection.rejections.push_back(std::move(rec));
      }
      e.selection.utility_scores =
          j.at("utility_scores").get<std::vector<double>>();
      if (!j.at("selected_index").is_null()) {
        e.selection.selected_index = j.at("selected_index").get<int>();
        e.selection.selected = detail::policy_from_json(j.at("selected"));
      }
      e.targets = j.at("targets").get<std::vector<int>>();
      e.dose = j.at("dose").get<double>();
      e.compiler_fallback = j.at("compiler_fallback").get<bool>();
      e.skipped = j.at("skipped").get<bool>();
      trail.push_back(std::move(e));
    } catch (const std::exception& ex) {
      throw std::runtime_error("audit line " + std::to_string(line_no) + ": " +
                               ex.what());
    }
  }
  return trail;
}

}  // namespace cmag
