#pragma once
// Ethical scorecard: cooperation, autonomy preservation, information
// integrity, exposure fairness, their product, and distributional summaries.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmag/core.hpp"
#include "cmag/population.hpp"

namespace cmag {

struct MetricRecord {
  int t = 0;
  double cooperation = 0.0;
  double autonomy = 0.0;
  double integrity = 0.0;
  double fairness = 0.0;
  double ecs = 0.0;
  double avg_exposure = 0.0;
  double max_exposure = 0.0;
  double exposure_gini = 0.0;
  double gap_exposure = 0.0;   // hubs minus periphery, signed
  double gap_cooperation = 0.0;
};

inline double cooperation_rate(const PopulationState& s) {
  if (s.agents.empty()) return 0.0;
  int count = 0;
  for (const auto& a : s.agents)
    if (a.cooperated) ++count;
  return static_cast<double>(count) / static_cast<double>(s.agents.size());
}

// Autonomy falls with the mean influence pressure exposure * susceptibility.
inline double autonomy(const PopulationState& s,
                       const MetricsCoefficients& coeffs) {
  double pressure = 0.0;
  for (const auto& a : s.agents) pressure += a.exposure * a.susceptibility;
  if (!s.agents.empty()) pressure /= static_cast<double>(s.agents.size());
  return clamp01(1.0 - coeffs.autonomy_coeff * pressure);
}

inline double integrity_from_avg_exposure(double avg_exposure,
                                          const MetricsCoefficients& coeffs) {
  return clamp01(1.0 - coeffs.integrity_coeff * avg_exposure);
}

inline double integrity(const PopulationState& s,
                        const MetricsCoefficients& coeffs) {
  return integrity_from_avg_exposure(mean_exposure(s), coeffs);
}

struct SubgroupGaps {
  double exposure_gap = 0.0;     // mean hub exposure minus mean periphery exposure
  double cooperation_gap = 0.0;
  bool degenerate = false;       // one side of the partition is empty
};

inline SubgroupGaps subgroup_gaps(const PopulationState& s) {
  SubgroupGaps g;
  if (s.partition.hubs.empty() || s.partition.periphery.empty()) {
    g.degenerate = true;
    return g;
  }
  double he = 0.0, hc = 0.0;
  for (int v : s.partition.hubs) {
    he += s.agents[v].exposure;
    hc += s.agents[v].cooperated ? 1.0 : 0.0;
  }
  he /= static_cast<double>(s.partition.hubs.size());
  hc /= static_cast<double>(s.partition.hubs.size());
  double pe = 0.0, pc = 0.0;
  for (int v : s.partition.periphery) {
    pe += s.agents[v].exposure;
    pc += s.agents[v].cooperated ? 1.0 : 0.0;
  }
  pe /= static_cast<double>(s.partition.periphery.size());
  pc /= static_cast<double>(s.partition.periphery.size());
  g.exposure_gap = he - pe;
  g.cooperation_gap = hc - pc;
  return g;
}

// Fairness penalizes the absolute hub-periphery exposure gap. A degenerate
// partition scores 1 and sets the warning flag when one is supplied.
inline double fairness_from_gap(double exposure_gap,
                                const MetricsCoefficients& coeffs) {
  return clamp01(1.0 - coeffs.fairness_coeff * std::abs(exposure_gap));
}

inline double fairness(const PopulationState& s,
                       const MetricsCoefficients& coeffs,
                       bool* degenerate_warning = nullptr) {
  const SubgroupGaps g = subgroup_gaps(s);
  if (degenerate_warning) *degenerate_warning = g.degenerate;
  if (g.degenerate) return 1.0;
  return fairness_from_gap(g.exposure_gap, coeffs);
}

inline double ecs(double cooperation, double autonomy_score, double integrity_score,
                  double fairness_score) {
  return cooperation * autonomy_score * integrity_score * fairness_score;
}

// Mean absolute pairwise difference over twice the squared count times the
// mean; zero for an all-zero vector. Sorted O(n log n) evaluation.
inline double gini(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (double v : values) {
    if (v < 0.0)
      throw std::invalid_argument("gini: negative input is invalid");
    sum += v;
  }
  if (sum == 0.0) return 0.0;
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  // sum_{i<j} (x_(j) - x_(i)) = sum_j x_(j) * (2j - n + 1), 0-based j
  double pair_sum = 0.0;
  for (std::size_t j = 0; j < sorted.size(); ++j)
    pair_sum += sorted[j] * (2.0 * static_cast<double>(j) - n + 1.0);
  const double mean = sum / n;
  return pair_sum / (n * n * mean);
}

struct ParetoPoint {
  double cooperation = 0.0;
  double autonomy = 0.0;
};

// Count of points in b dominated by some point in a: at least its cooperation
// and strictly more autonomy.
inline int pareto_dominated_count(const std::vector<ParetoPoint>& a,
                                  const std::vector<ParetoPoint>& b) {
  if (a.empty() || b.empty()) return 0;
  // Sort a by cooperation descending; prefix maxima of autonomy then answer
  // "best autonomy among a-points with cooperation >= c" by binary search.
  std::vector<ParetoPoint> sorted = a;
  std::sort(sorted.begin(), sorted.end(),
            [](const ParetoPoint& x, const ParetoPoint& y) {
              return x.cooperation > y.cooperation;
            });
  std::vector<double> prefix_max_autonomy(sorted.size());
  double running = sorted[0].autonomy;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    running = std::max(running, sorted[i].autonomy);
    prefix_max_autonomy[i] = running;
  }
  int count = 0;
  for (const auto& p : b) {
    // last index with cooperation >= p.cooperation
    std::size_t lo = 0, hi = sorted.size();
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (sorted[mid].cooperation >= p.cooperation) {
        lo = mid + 1;
      } else {
        hi = mid;
      }
    }
    if (lo > 0 && prefix_max_autonomy[lo - 1] > p.autonomy) ++count;
  }
  return count;
}

struct SteadySummary {
  double cooperation_mean = 0.0, cooperation_std = 0.0;
  double autonomy_mean = 0.0, autonomy_std = 0.0;
  double integrity_mean = 0.0, integrity_std = 0.0;
  double fairness_mean = 0.0, fairness_std = 0.0;
  double ecs_mean = 0.0, ecs_std = 0.0;
  double avg_exposure_mean = 0.0, avg_exposure_std = 0.0;
  double exposure_gini_mean = 0.0, exposure_gini_std = 0.0;
  double gap_exposure_mean = 0.0, gap_exposure_std = 0.0;
  double peak_cooperation = 0.0;  // max over the whole run
  double min_autonomy = 1.0;      // min over the whole run
};

namespace detail {

inline void mean_std(const std::vector<double>& xs, double* mean, double* sd) {
  const double n = static_cast<double>(xs.size());
  double m = 0.0;
  for (double x : xs) m += x;
  m /= n;
  double var = 0.0;
  for (double x : xs) var += (x - m) * (x - m);
  var /= n;  // population std over the window
  *mean = m;
  *sd = std::sqrt(var);
}

}  // namespace detail

inline SteadySummary steady_summary(const std::vector<MetricRecord>& series,
                                    int window) {
  if (window < 1 || static_cast<std::size_t>(window) > series.size())
    throw std::invalid_argument("steady_summary: window must lie in [1, length]");
  SteadySummary s;
  const std::size_t start = series.size() - static_cast<std::size_t>(window);
  auto collect = [&](auto field, double* mean, double* sd) {
    std::vector<double> xs;
    xs.reserve(window);
    for (std::size_t i = start; i < series.size(); ++i)
      xs.push_back(field(series[i]));
    detail::mean_std(xs, mean, sd);
  };
  collect([](const MetricRecord& r) { return r.cooperation; },
          &s.cooperation_mean, &s.cooperation_std);
  collect([](const MetricRecord& r) { return r.autonomy; }, &s.autonomy_mean,
          &s.autonomy_std);
  collect([](const MetricRecord& r) { return r.integrity; }, &s.integrity_mean,
          &s.integrity_std);
  collect([](const MetricRecord& r) { return r.fairness; }, &s.fairness_mean,
          &s.fairness_std);
  collect([](const MetricRecord& r) { return r.ecs; }, &s.ecs_mean, &s.ecs_std);
  collect([](const MetricRecord& r) { return r.avg_exposure; },
          &s.avg_exposure_mean, &s.avg_exposure_std);
  collect([](const MetricRecord& r) { return r.exposure_gini; },
          &s.exposure_gini_mean, &s.exposure_gini_std);
  collect([](const MetricRecord& r) { return r.gap_exposure; },
          &s.gap_exposure_mean, &s.gap_exposure_std);
  s.peak_cooperation = 0.0;
  s.min_autonomy = 1.0;
  for (const auto& r : series) {
    s.peak_cooperation = std::max(s.peak_cooperation, r.cooperation);
    s.min_autonomy = std::min(s.min_autonomy, r.autonomy);
  }
  return s;
}

}  // namespace cmag
