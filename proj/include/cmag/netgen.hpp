#pragma once
// Scale-free interaction network: preferential-attachment generation, the
// hub/periphery partition used by fairness metrics, and target selection.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "cmag/core.hpp"
#include "cmag/rng.hpp"

namespace cmag {

// Undirected simple graph; neighbor lists kept sorted for determinism.
struct Network {
  int n = 0;
  std::vector<std::vector<int>> neighbors;

  int degree(int v) const { return static_cast<int>(neighbors[v].size()); }

  long long edge_count() const {
    long long total = 0;
    for (const auto& adj : neighbors) total += static_cast<long long>(adj.size());
    return total / 2;
  }

  std::vector<int> degrees() const {
    std::vector<int> d(n);
    for (int v = 0; v < n; ++v) d[v] = degree(v);
    return d;
  }
};

struct SubgroupPartition {
  std::vector<int> hubs;       // sorted ids
  std::vector<int> periphery;  // sorted ids
};

// Preferential attachment: seed with the complete graph on m+1 nodes, then
// each arriving node attaches m edges to distinct existing nodes chosen with
// probability proportional to degree (repeat-until-distinct sampling).
inline Network generate_ba(int n, int m, Rng& rng) {
  if (m < 1 || n <= m)
    throw std::invalid_argument("generate_ba: requires n > m >= 1");

  Network net;
  net.n = n;
  net.neighbors.assign(n, {});

  // Endpoint list with one entry per degree unit; sampling an index uniformly
  // picks a node with degree-proportional probability.
  std::vector<int> endpoints;
  endpoints.reserve(2 * (static_cast<std::size_t>(m) * n + m));

  auto add_edge = [&](int u, int v) {
    net.neighbors[u].push_back(v);
    net.neighbors[v].push_back(u);
    endpoints.push_back(u);
    endpoints.push_back(v);
  };

  const int seed_size = m + 1;
  for (int u = 0; u < seed_size; ++u)
    for (int v = u + 1; v < seed_size; ++v) add_edge(u, v);

  std::vector<int> chosen;
  chosen.reserve(m);
  for (int v = seed_size; v < n; ++v) {
    chosen.clear();
    while (static_cast<int>(chosen.size()) < m) {
      const int u = endpoints[rng.uniform_int(endpoints.size())];
      if (std::find(chosen.begin(), chosen.end(), u) == chosen.end())
        chosen.push_back(u);
    }
    for (int u : chosen) add_edge(u, v);
  }

  for (auto& adj : net.neighbors) std::sort(adj.begin(), adj.end());
  return net;
}

// Hubs are the nodes whose degree strictly exceeds the nearest-rank degree
// quantile; if every node ties at the top (regular graphs), all maximal-degree
// nodes count as hubs so the partition is never empty.
inline SubgroupPartition hub_partition(const Network& net, double quantile) {
  if (!(quantile > 0.0) || !(quantile < 1.0))
    throw std::invalid_argument("hub_partition: quantile must lie in (0, 1)");
  if (net.n < 1)
    throw std::invalid_argument("hub_partition: network must be non-empty");

  std::vector<int> degs = net.degrees();
  std::vector<int> sorted = degs;
  std::sort(sorted.begin(), sorted.end());
  std::size_t rank = static_cast<std::size_t>(
      std::ceil(quantile * static_cast<double>(net.n)));
  if (rank < 1) rank = 1;
  if (rank > static_cast<std::size_t>(net.n))
    rank = static_cast<std::size_t>(net.n);
  const int threshold = sorted[rank - 1];
  const int max_degree = sorted.back();

  SubgroupPartition part;
  for (int v = 0; v < net.n; ++v) {
    if (degs[v] > threshold) part.hubs.push_back(v);
  }
  if (part.hubs.empty()) {
    for (int v = 0; v < net.n; ++v)
      if (degs[v] == max_degree) part.hubs.push_back(v);
  }
  std::vector<char> is_hub(net.n, 0);
  for (int v : part.hubs) is_hub[v] = 1;
  for (int v = 0; v < net.n; ++v)
    if (!is_hub[v]) part.periphery.push_back(v);
  return part;
}

inline int target_count(double target_fraction, int n) {
  // round half away from zero
  const double x = target_fraction * static_cast<double>(n);
  return static_cast<int>(std::floor(x + 0.5));
}

// Exactly round(target_fraction * n) nodes. Hubs/periphery take the extreme
// degrees with ascending-id tie-breaks; random samples without replacement
// from the supplied stream. Result is sorted by id.
inline std::vector<int> targets_for(const Network& net, Targeting targeting,
                                    double target_fraction, Rng& rng) {
  const int k = target_count(target_fraction, net.n);
  if (k < 0 || k > net.n)
    throw std::invalid_argument("targets_for: target count out of range");

  std::vector<int> ids(net.n);
  std::iota(ids.begin(), ids.end(), 0);
  std::vector<int> out;
  out.reserve(k);

  switch (targeting) {
    case Targeting::hubs: {
      std::stable_sort(ids.begin(), ids.end(), [&](int a, int b) {
        if (net.degree(a) != net.degree(b)) return net.degree(a) > net.degree(b);
        return a < b;
      });
      out.assign(ids.begin(), ids.begin() + k);
      break;
    }
    case Targeting::periphery: {
      std::stable_sort(ids.begin(), ids.end(), [&](int a, int b) {
        if (net.degree(a) != net.degree(b)) return net.degree(a) < net.degree(b);
        return a < b;
      });
      out.assign(ids.begin(), ids.begin() + k);
      break;
    }
    case Targeting::random: {
      // partial Fisher-Yates; first k slots form the sample
      for (int i = 0; i < k; ++i) {
        const std::uint64_t j =
            i + rng.uniform_int(static_cast<std::uint64_t>(net.n - i));
        std::swap(ids[i], ids[j]);
      }
      out.assign(ids.begin(), ids.begin() + k);
      break;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// One "u v" line per edge, u < v, ascending order.
inline void write_edge_list(const Network& net, std::ostream& os) {
  for (int u = 0; u < net.n; ++u)
    for (int v : net.neighbors[u])
      if (u < v) os << u << ' ' << v << '\n';
}

}  // namespace cmag
