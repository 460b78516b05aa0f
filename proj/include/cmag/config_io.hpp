#pragma once
// JSON serialization for the simulation configuration. Parsing is strict:
// unknown keys are rejected so typos fail loudly instead of silently running
// the defaults, and serialize -> parse round-trips to an identical config.

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "cmag/core.hpp"

namespace cmag {

namespace detail {

inline void require_keys_known(const nlohmann::json& obj,
                               const std::set<std::string>& known,
                               const std::string& scope) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!known.count(it.key()))
      throw std::invalid_argument("config: unknown key: " + scope + it.key());
  }
}

inline double get_double(const nlohmann::json& obj, const std::string& key,
                         double fallback, const std::string& scope) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number())
    throw std::invalid_argument("config: " + scope + key +
                                " must be a number");
  return v.get<double>();
}

inline int get_int(const nlohmann::json& obj, const std::string& key,
                   int fallback, const std::string& scope) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer())
    throw std::invalid_argument("config: " + scope + key +
                                " must be an integer");
  return v.get<int>();
}

}  // namespace detail

inline nlohmann::ordered_json config_to_json(const SimConfig& cfg) {
  nlohmann::ordered_json j;
  j["n_agents"] = cfg.n_agents;
  j["ba_m"] = cfg.ba_m;
  j["horizon"] = cfg.horizon;
  j["deploy_interval"] = cfg.deploy_interval;
  j["n_candidates"] = cfg.n_candidates;
  j["prosocial_mean"] = cfg.prosocial_mean;
  j["prosocial_std"] = cfg.prosocial_std;
  j["susceptibility_mean"] = cfg.susceptibility_mean;
  j["susceptibility_std"] = cfg.susceptibility_std;
  j["target_fraction"] = cfg.target_fraction;
  j["base_decay"] = cfg.base_decay;
  j["diffusion_rate"] = cfg.diffusion_rate;
  j["exposure_cap"] = cfg.exposure_cap;
  j["violation_prob_adversarial"] = cfg.violation_prob_adversarial;
  j["violation_prob_benign"] = cfg.violation_prob_benign;
  j["dose_scale"] = cfg.dose_scale;
  j["hub_quantile"] = cfg.hub_quantile;
  j["steady_window"] = cfg.steady_window;

  nlohmann::ordered_json c;
  {
    nlohmann::ordered_json themes = nlohmann::ordered_json::array();
    for (Theme t : cfg.constitution.forbidden_themes)
      themes.push_back(to_string(t));
    c["forbidden_themes"] = themes;
    nlohmann::ordered_json claims = nlohmann::ordered_json::array();
    for (ClaimType t : cfg.constitution.forbidden_claims)
      claims.push_back(to_string(t));
    c["forbidden_claims"] = claims;
  }
  c["max_intensity"] = cfg.constitution.max_intensity;
  c["intensity_penalty"] = cfg.constitution.intensity_penalty;
  c["exposure_multiplier"] = cfg.constitution.exposure_multiplier;
  c["governance_decay"] = cfg.constitution.governance_decay;
  j["constitution"] = c;

  nlohmann::ordered_json d;
  d["logit_bias"] = cfg.dynamics.logit_bias;
  d["prosocial_gain"] = cfg.dynamics.prosocial_gain;
  d["exposure_gain"] = cfg.dynamics.exposure_gain;
  j["dynamics"] = d;

  nlohmann::ordered_json m;
  m["autonomy_coeff"] = cfg.metrics.autonomy_coeff;
  m["integrity_coeff"] = cfg.metrics.integrity_coeff;
  m["fairness_coeff"] = cfg.metrics.fairness_coeff;
  j["metrics"] = m;
  return j;
}

// Missing keys keep their defaults; unknown keys and wrong types throw
// std::invalid_argument. Semantic range checks stay in validate_config.
inline SimConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object())
    throw std::invalid_argument("config: top level must be a JSON object");

  SimConfig cfg = default_config();
  detail::require_keys_known(
      j,
      {"n_agents", "ba_m", "horizon", "deploy_interval", "n_candidates",
       "prosocial_mean", "prosocial_std", "susceptibility_mean",
       "susceptibility_std", "target_fraction", "base_decay", "diffusion_rate",
       "exposure_cap", "violation_prob_adversarial", "violation_prob_benign",
       "dose_scale", "hub_quantile", "steady_window", "constitution",
       "dynamics", "metrics"},
      "");

  cfg.n_agents = detail::get_int(j, "n_agents", cfg.n_agents, "");
  cfg.ba_m = detail::get_int(j, "ba_m", cfg.ba_m, "");
  cfg.horizon = detail::get_int(j, "horizon", cfg.horizon, "");
  cfg.deploy_interval =
      detail::get_int(j, "deploy_interval", cfg.deploy_interval, "");
  cfg.n_candidates = detail::get_int(j, "n_candidates", cfg.n_candidates, "");
  cfg.prosocial_mean =
      detail::get_double(j, "prosocial_mean", cfg.prosocial_mean, "");
  cfg.prosocial_std =
      detail::get_double(j, "prosocial_std", cfg.prosocial_std, "");
  cfg.susceptibility_mean = detail::get_double(j, "susceptibility_mean",
                                               cfg.susceptibility_mean, "");
  cfg.susceptibility_std = detail::get_double(j, "susceptibility_std",
                                              cfg.susceptibility_std, "");
  cfg.target_fraction =
      detail::get_double(j, "target_fraction", cfg.target_fraction, "");
  cfg.base_decay = detail::get_double(j, "base_decay", cfg.base_decay, "");
  cfg.diffusion_rate =
      detail::get_double(j, "diffusion_rate", cfg.diffusion_rate, "");
  cfg.exposure_cap =
      detail::get_double(j, "exposure_cap", cfg.exposure_cap, "");
  cfg.violation_prob_adversarial = detail::get_double(
      j, "violation_prob_adversarial", cfg.violation_prob_adversarial, "");
  cfg.violation_prob_benign = detail::get_double(
      j, "violation_prob_benign", cfg.violation_prob_benign, "");
  cfg.dose_scale = detail::get_double(j, "dose_scale", cfg.dose_scale, "");
  cfg.hub_quantile =
      detail::get_double(j, "hub_quantile", cfg.hub_quantile, "");
  cfg.steady_window =
      detail::get_int(j, "steady_window", cfg.steady_window, "");

  if (j.contains("constitution")) {
    const auto& c = j.at("constitution");
    if (!c.is_object())
      throw std::invalid_argument("config: constitution must be an object");
    detail::require_keys_known(c,
                               {"forbidden_themes", "forbidden_claims",
                                "max_intensity", "intensity_penalty",
                                "exposure_multiplier", "governance_decay"},
                               "constitution.");
    if (c.contains("forbidden_themes")) {
      if (!c.at("forbidden_themes").is_array())
        throw std::invalid_argument(
            "config: constitution.forbidden_themes must be an array");
      cfg.constitution.forbidden_themes.clear();
      for (const auto& item : c.at("forbidden_themes")) {
        if (!item.is_string())
          throw std::invalid_argument(
              "config: constitution.forbidden_themes entries must be strings");
        const auto theme = enum_from_string<Theme>(item.get<std::string>());
        if (!theme)
          throw std::invalid_argument(
              "config: constitution.forbidden_themes: unknown theme: " +
              item.get<std::string>());
        cfg.constitution.forbidden_themes.insert(*theme);
      }
    }
    if (c.contains("forbidden_claims")) {
      if (!c.at("forbidden_claims").is_array())
        throw std::invalid_argument(
            "config: constitution.forbidden_claims must be an array");
      cfg.constitution.forbidden_claims.clear();
      for (const auto& item : c.at("forbidden_claims")) {
        if (!item.is_string())
          throw std::invalid_argument(
              "config: constitution.forbidden_claims entries must be strings");
        const auto claim = enum_from_string<ClaimType>(item.get<std::string>());
        if (!claim)
          throw std::invalid_argument(
              "config: constitution.forbidden_claims: unknown claim type: " +
              item.get<std::string>());
        cfg.constitution.forbidden_claims.insert(*claim);
      }
    }
    cfg.constitution.max_intensity = detail::get_double(
        c, "max_intensity", cfg.constitution.max_intensity, "constitution.");
    cfg.constitution.intensity_penalty =
        detail::get_double(c, "intensity_penalty",
                           cfg.constitution.intensity_penalty, "constitution.");
    cfg.constitution.exposure_multiplier = detail::get_double(
        c, "exposure_multiplier", cfg.constitution.exposure_multiplier,
        "constitution.");
    cfg.constitution.governance_decay =
        detail::get_double(c, "governance_decay",
                           cfg.constitution.governance_decay, "constitution.");
  }

  if (j.contains("dynamics")) {
    const auto& d = j.at("dynamics");
    if (!d.is_object())
      throw std::invalid_argument("config: dynamics must be an object");
    detail::require_keys_known(
        d, {"logit_bias", "prosocial_gain", "exposure_gain"}, "dynamics.");
    cfg.dynamics.logit_bias =
        detail::get_double(d, "logit_bias", cfg.dynamics.logit_bias,
                           "dynamics.");
    cfg.dynamics.prosocial_gain = detail::get_double(
        d, "prosocial_gain", cfg.dynamics.prosocial_gain, "dynamics.");
    cfg.dynamics.exposure_gain = detail::get_double(
        d, "exposure_gain", cfg.dynamics.exposure_gain, "dynamics.");
  }

  if (j.contains("metrics")) {
    const auto& m = j.at("metrics");
    if (!m.is_object())
      throw std::invalid_argument("config: metrics must be an object");
    detail::require_keys_known(
        m, {"autonomy_coeff", "integrity_coeff", "fairness_coeff"},
        "metrics.");
    cfg.metrics.autonomy_coeff = detail::get_double(
        m, "autonomy_coeff", cfg.metrics.autonomy_coeff, "metrics.");
    cfg.metrics.integrity_coeff = detail::get_double(
        m, "integrity_coeff", cfg.metrics.integrity_coeff, "metrics.");
    cfg.metrics.fairness_coeff = detail::get_double(
        m, "fairness_coeff", cfg.metrics.fairness_coeff, "metrics.");
  }

  return cfg;
}

inline SimConfig config_from_string(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") +
                                e.what());
  }
  return config_from_json(j);
}

inline SimConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw std::invalid_argument("config: cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return config_from_string(buf.str());
}

inline std::string config_to_string(const SimConfig& cfg) {
  return config_to_json(cfg).dump(2) + "\n";
}

}  // namespace cmag
