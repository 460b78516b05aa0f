#pragma once
// Statistical validation: bootstrap confidence intervals, rank tests with
// multiple-comparison correction, effect sizes, elasticity-style sensitivity
// indices, and one-at-a-time parameter sweeps.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmag/dynamics.hpp"
#include "cmag/rng.hpp"

namespace cmag {

struct BootstrapCI {
  double lower = 0.0;
  double upper = 0.0;
};

// Percentile bootstrap for the mean: resample with replacement, take the
// empirical quantiles of the resampled means.
inline BootstrapCI bootstrap_ci(const std::vector<double>& sample,
                                double level, int n_resamples, Rng& rng) {
  if (sample.empty())
    throw std::invalid_argument("bootstrap_ci: sample must be non-empty");
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("bootstrap_ci: level must lie in (0, 1)");
  if (n_resamples < 1)
    throw std::invalid_argument("bootstrap_ci: n_resamples must be >= 1");

  const std::size_t n = sample.size();
  std::vector<double> means(n_resamples);
  for (int r = 0; r < n_resamples; ++r) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      acc += sample[rng.uniform_int(n)];
    means[r] = acc / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  const double alpha = (1.0 - level) / 2.0;
  auto quantile = [&](double q) {
    // nearest-rank on the sorted resample means
    std::size_t idx = static_cast<std::size_t>(
        std::ceil(q * static_cast<double>(n_resamples)));
    if (idx < 1) idx = 1;
    if (idx > static_cast<std::size_t>(n_resamples))
      idx = static_cast<std::size_t>(n_resamples);
    return means[idx - 1];
  };
  return BootstrapCI{quantile(alpha), quantile(1.0 - alpha)};
}

struct MannWhitneyResult {
  double u = 0.0;        // statistic for the first sample
  double p_value = 1.0;  // two-sided
  bool exact = false;
};

namespace detail {

inline double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

// Midranks over the pooled sample; returns per-value ranks and tie group sizes.
inline std::vector<double> midranks(const std::vector<double>& pooled,
                                    std::vector<std::size_t>* tie_sizes) {
  const std::size_t n = pooled.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });
  std::vector<double> ranks(n);
  if (tie_sizes) tie_sizes->clear();
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    const double rank = 0.5 * (static_cast<double>(i + 1) +
                               static_cast<double>(j + 1));
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    if (tie_sizes && j > i) tie_sizes->push_back(j - i + 1);
    i = j + 1;
  }
  return ranks;
}

inline double u_statistic(const std::vector<double>& a,
                          const std::vector<double>& b) {
  std::vector<double> pooled = a;
  pooled.insert(pooled.end(), b.begin(), b.end());
  const std::vector<double> ranks = midranks(pooled, nullptr);
  double rank_sum_a = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) rank_sum_a += ranks[i];
  const double na = static_cast<double>(a.size());
  return rank_sum_a - na * (na + 1.0) / 2.0;
}

}  // namespace detail

// U reported for the first sample. Exact two-sided permutation p-value when
// the pooled size is at most 12 and there are no ties; otherwise the normal
// approximation with tie and continuity corrections.
inline MannWhitneyResult mann_whitney_u(const std::vector<double>& a,
                                        const std::vector<double>& b) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("mann_whitney_u: samples must be non-empty");

  const std::size_t na = a.size(), nb = b.size(), n = na + nb;
  std::vector<double> pooled = a;
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::vector<std::size_t> tie_sizes;
  const std::vector<double> ranks = detail::midranks(pooled, &tie_sizes);

  double rank_sum_a = 0.0;
  for (std::size_t i = 0; i < na; ++i) rank_sum_a += ranks[i];
  const double u =
      rank_sum_a - static_cast<double>(na) * (static_cast<double>(na) + 1.0) / 2.0;

  MannWhitneyResult result;
  result.u = u;

  const double mu = static_cast<double>(na) * static_cast<double>(nb) / 2.0;

  if (n <= 12 && tie_sizes.empty()) {
    // full enumeration of all C(n, na) group assignments
    std::vector<std::size_t> idx(na);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    const double observed_dev = std::abs(u - mu);
    long long extreme = 0, total = 0;
    std::vector<double> ga(na), gb(nb);
    while (true) {
      ga.clear();
      gb.clear();
      std::size_t next = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (next < na && idx[next] == i) {
          ga.push_back(pooled[i]);
          ++next;
        } else {
          gb.push_back(pooled[i]);
        }
      }
      const double u_perm = detail::u_statistic(ga, gb);
      if (std::abs(u_perm - mu) >= observed_dev - 1e-12) ++extreme;
      ++total;
      // next combination
      std::size_t k = na;
      while (k > 0 && idx[k - 1] == n - na + k - 1) --k;
      if (k == 0) break;
      ++idx[k - 1];
      for (std::size_t j = k; j < na; ++j) idx[j] = idx[j - 1] + 1;
    }
    result.exact = true;
    result.p_value =
        static_cast<double>(extreme) / static_cast<double>(total);
    return result;
  }

  double tie_term = 0.0;
  for (std::size_t t : tie_sizes) {
    const double td = static_cast<double>(t);
    tie_term += td * td * td - td;
  }
  const double nd = static_cast<double>(n);
  const double variance = static_cast<double>(na) * static_cast<double>(nb) /
                          12.0 *
                          ((nd + 1.0) - tie_term / (nd * (nd - 1.0)));
  if (variance <= 0.0) {
    result.p_value = 1.0;  // fully tied pooled sample
    return result;
  }
  double dev = std::abs(u - mu) - 0.5;  // continuity correction
  if (dev < 0.0) dev = 0.0;
  const double z = dev / std::sqrt(variance);
  result.p_value = std::clamp(2.0 * (1.0 - detail::normal_cdf(z)), 0.0, 1.0);
  return result;
}

inline double bonferroni(double p, int n_comparisons) {
  if (n_comparisons < 1)
    throw std::invalid_argument("bonferroni: n_comparisons must be >= 1");
  return std::min(1.0, p * static_cast<double>(n_comparisons));
}

// Pooled-standard-deviation effect size using sample (n-1) variances.
// Equal means give 0 even when the pooled deviation vanishes; a vanishing
// pooled deviation with unequal means is undefined.
inline double cohens_d(const std::vector<double>& a,
                       const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2)
    throw std::invalid_argument("cohens_d: samples need at least two values");
  auto mean = [](const std::vector<double>& xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) /
           static_cast<double>(xs.size());
  };
  auto sample_var = [&](const std::vector<double>& xs, double m) {
    double acc = 0.0;
    for (double x : xs) acc += (x - m) * (x - m);
    return acc / (static_cast<double>(xs.size()) - 1.0);
  };
  const double ma = mean(a), mb = mean(b);
  const double va = sample_var(a, ma), vb = sample_var(b, mb);
  const double na = static_cast<double>(a.size()),
               nb = static_cast<double>(b.size());
  const double pooled =
      std::sqrt(((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0));
  if (pooled == 0.0) {
    if (ma == mb) return 0.0;
    throw std::domain_error(
        "cohens_d: zero pooled deviation with unequal means");
  }
  return (ma - mb) / pooled;
}

// Normalized local elasticity: central difference slope scaled by theta/f.
inline double sensitivity_index(const std::function<double(double)>& f,
                                double theta0, double h) {
  if (!(h > 0.0))
    throw std::invalid_argument("sensitivity_index: h must be > 0");
  const double f0 = f(theta0);
  if (f0 == 0.0)
    throw std::domain_error("sensitivity_index: baseline value is zero");
  const double slope = (f(theta0 + h) - f(theta0 - h)) / (2.0 * h);
  return slope * theta0 / f0;
}

struct SweepSpec {
  std::string parameter_name;
  double baseline = 0.0;
  std::vector<double> levels;  // exactly 5, strictly increasing

  bool valid() const {
    if (levels.size() != 5) return false;
    for (std::size_t i = 1; i < levels.size(); ++i)
      if (!(levels[i] > levels[i - 1])) return false;
    return baseline >= levels.front() && baseline <= levels.back();
  }
};

// Numeric config keys addressable by sweeps; nested fields use dotted names.
inline void set_config_value(SimConfig& cfg, const std::string& key,
                             double value) {
  static const char* kIntKeys[] = {"n_agents", "ba_m", "horizon",
                                   "deploy_interval", "n_candidates",
                                   "steady_window"};
  for (const char* k : kIntKeys) {
    if (key == k) {
      const double rounded = std::round(value);
      if (rounded != value)
        throw std::invalid_argument("set_config_value: " + key +
                                    " requires an integer value");
      int* target = nullptr;
      if (key == "n_agents") target = &cfg.n_agents;
      else if (key == "ba_m") target = &cfg.ba_m;
      else if (key == "horizon") target = &cfg.horizon;
      else if (key == "deploy_interval") target = &cfg.deploy_interval;
      else if (key == "n_candidates") target = &cfg.n_candidates;
      else target = &cfg.steady_window;
      *target = static_cast<int>(rounded);
      return;
    }
  }
  const std::map<std::string, double SimConfig::*> kDoubleKeys = {
      {"prosocial_mean", &SimConfig::prosocial_mean},
      {"prosocial_std", &SimConfig::prosocial_std},
      {"susceptibility_mean", &SimConfig::susceptibility_mean},
      {"susceptibility_std", &SimConfig::susceptibility_std},
      {"target_fraction", &SimConfig::target_fraction},
      {"base_decay", &SimConfig::base_decay},
      {"diffusion_rate", &SimConfig::diffusion_rate},
      {"exposure_cap", &SimConfig::exposure_cap},
      {"violation_prob_adversarial", &SimConfig::violation_prob_adversarial},
      {"violation_prob_benign", &SimConfig::violation_prob_benign},
      {"dose_scale", &SimConfig::dose_scale},
      {"hub_quantile", &SimConfig::hub_quantile}};
  if (auto it = kDoubleKeys.find(key); it != kDoubleKeys.end()) {
    cfg.*(it->second) = value;
    return;
  }
  const std::map<std::string, double Constitution::*> kConstitutionKeys = {
      {"constitution.max_intensity", &Constitution::max_intensity},
      {"constitution.intensity_penalty", &Constitution::intensity_penalty},
      {"constitution.exposure_multiplier", &Constitution::exposure_multiplier},
      {"constitution.governance_decay", &Constitution::governance_decay}};
  if (auto it = kConstitutionKeys.find(key); it != kConstitutionKeys.end()) {
    cfg.constitution.*(it->second) = value;
    return;
  }
  const std::map<std::string, double DynamicsCoefficients::*> kDynamicsKeys = {
      {"dynamics.logit_bias", &DynamicsCoefficients::logit_bias},
      {"dynamics.prosocial_gain", &DynamicsCoefficients::prosocial_gain},
      {"dynamics.exposure_gain", &DynamicsCoefficients::exposure_gain}};
  if (auto it = kDynamicsKeys.find(key); it != kDynamicsKeys.end()) {
    cfg.dynamics.*(it->second) = value;
    return;
  }
  const std::map<std::string, double MetricsCoefficients::*> kMetricsKeys = {
      {"metrics.autonomy_coeff", &MetricsCoefficients::autonomy_coeff},
      {"metrics.integrity_coeff", &MetricsCoefficients::integrity_coeff},
      {"metrics.fairness_coeff", &MetricsCoefficients::fairness_coeff}};
  if (auto it = kMetricsKeys.find(key); it != kMetricsKeys.end()) {
    cfg.metrics.*(it->second) = value;
    return;
  }
  throw std::invalid_argument("set_config_value: unknown parameter: " + key);
}

struct SweepLevelResult {
  double level = 0.0;
  double ecs_mean = 0.0;
  double ecs_std = 0.0;
};

struct SweepResult {
  std::string parameter_name;
  std::vector<SweepLevelResult> levels;
  double baseline_ecs = 0.0;
  double sensitivity = 0.0;
};

inline double steady_ecs_at(const SimConfig& base, const std::string& key,
                            double value, GovernanceMode mode,
                            ThreatMode threat, const CompileFn& compile,
                            std::uint64_t seed, double* ecs_std = nullptr) {
  SimConfig cfg = base;
  set_config_value(cfg, key, value);
  const RunResult run = run_simulation(cfg, mode, threat, compile, seed);
  const SteadySummary summary =
      steady_summary(run.timeseries, cfg.steady_window);
  if (ecs_std) *ecs_std = summary.ecs_std;
  return summary.ecs_mean;
}

// One-at-a-time sweep: steady-state ECS at each level, plus a sensitivity
// index from the two levels flanking the baseline (or baseline plus/minus
// the level spacing when the baseline is itself a level).
inline SweepResult oat_sweep(const SimConfig& base, const SweepSpec& spec,
                             GovernanceMode mode, ThreatMode threat,
                             const CompileFn& compile, std::uint64_t seed) {
  if (!spec.valid())
    throw std::invalid_argument(
        "oat_sweep: spec requires exactly 5 strictly increasing levels with "
        "the baseline in range");

  SweepResult result;
  result.parameter_name = spec.parameter_name;
  for (double level : spec.levels) {
    SweepLevelResult row;
    row.level = level;
    row.ecs_mean = steady_ecs_at(base, spec.parameter_name, level, mode,
                                 threat, compile, seed, &row.ecs_std);
    result.levels.push_back(row);
  }
  result.baseline_ecs = steady_ecs_at(base, spec.parameter_name, spec.baseline,
                                      mode, threat, compile, seed);
  if (result.baseline_ecs == 0.0)
    throw std::domain_error("oat_sweep: baseline ECS is zero");

  double lo = 0.0, hi = 0.0;
  bool baseline_is_level = false;
  for (double level : spec.levels)
    if (level == spec.baseline) baseline_is_level = true;
  if (baseline_is_level) {
    const double spacing = spec.levels[1] - spec.levels[0];
    lo = spec.baseline - spacing;
    hi = spec.baseline + spacing;
  } else {
    lo = spec.levels.front();
    hi = spec.levels.back();
    for (double level : spec.levels) {
      if (level < spec.baseline) lo = std::max(lo, level);
      if (level > spec.baseline) hi = std::min(hi, level);
    }
  }
  auto ecs_of = [&](double v) {
    for (const auto& row : result.levels)
      if (row.level == v) return row.ecs_mean;
    return steady_ecs_at(base, spec.parameter_name, v, mode, threat, compile,
                         seed);
  };
  const double slope = (ecs_of(hi) - ecs_of(lo)) / (hi - lo);
  result.sensitivity = slope * spec.baseline / result.baseline_ecs;
  return result;
}

// Default sweep grid: evenly spaced levels over the stated range, endpoints
// included.
inline SweepSpec make_sweep_spec(const std::string& name, double baseline,
                                 double lo, double hi) {
  SweepSpec spec;
  spec.parameter_name = name;
  spec.baseline = baseline;
  for (int i = 0; i < 5; ++i)
    spec.levels.push_back(lo + (hi - lo) * static_cast<double>(i) / 4.0);
  return spec;
}

inline std::vector<SweepSpec> default_sweeps(const SimConfig& cfg) {
  return {
      make_sweep_spec("base_decay", cfg.base_decay, 0.02, 0.15),
      make_sweep_spec("diffusion_rate", cfg.diffusion_rate, 0.04, 0.25),
      make_sweep_spec("prosocial_mean", cfg.prosocial_mean, 0.20, 0.70),
      make_sweep_spec("susceptibility_mean", cfg.susceptibility_mean, 0.25,
                      0.85),
  };
}

}  // namespace cmag
