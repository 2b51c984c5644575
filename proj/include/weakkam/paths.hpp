#pragma once

// Shortest-path and connectivity primitives over CostGraph edge subsets.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <queue>
#include <span>
#include <sstream>
#include <vector>

#include "weakkam/error.hpp"
#include "weakkam/grid.hpp"

namespace wkam {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Strongly connected components of the subgraph formed by `edge_ids`.
/// Components are returned with sorted node lists, ordered by smallest node.
/// `nontrivial` marks components that contain at least one subgraph edge.
struct Components {
  std::vector<std::vector<std::size_t>> nodes;
  std::vector<int> of_node;  // component index per node
  std::vector<char> nontrivial;
};

inline Components strongly_connected_components(const CostGraph& g, std::span<const std::size_t> edge_ids) {
  const std::size_t n = g.node_count();
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t id : edge_ids) adj[g.edge(id).from].push_back(g.edge(id).to);
  for (auto& a : adj) std::sort(a.begin(), a.end());

  // Iterative Tarjan.
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
  std::vector<char> on_stack(n, 0);
  std::vector<std::size_t> stack;
  std::vector<std::pair<std::size_t, std::size_t>> call;
  int counter = 0, ncomp = 0;
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] >= 0) continue;
    call.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      auto& [v, pos] = call.back();
      if (pos < adj[v].size()) {
        const std::size_t w = adj[v][pos++];
        if (index[w] < 0) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = ncomp;
        } while (w != v);
        ++ncomp;
      }
      const std::size_t done = v;
      call.pop_back();
      if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
    }
  }

  // Renumber by smallest member for a deterministic order.
  std::vector<int> first(ncomp, -1), remap(ncomp, -1);
  for (std::size_t v = 0; v < n; ++v)
    if (first[comp[v]] < 0) first[comp[v]] = int(v);
  std::vector<int> order(ncomp);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return first[a] < first[b]; });
  for (int k = 0; k < ncomp; ++k) remap[order[k]] = k;

  Components out;
  out.nodes.resize(ncomp);
  out.of_node.resize(n);
  out.nontrivial.assign(ncomp, 0);
  for (std::size_t v = 0; v < n; ++v) {
    out.of_node[v] = remap[comp[v]];
    out.nodes[remap[comp[v]]].push_back(v);
  }
  for (std::size_t id : edge_ids) {
    const auto& e = g.edge(id);
    if (out.of_node[e.from] == out.of_node[e.to]) out.nontrivial[out.of_node[e.from]] = 1;
  }
  return out;
}

inline std::vector<std::size_t> all_edge_ids(const CostGraph& g) {
  std::vector<std::size_t> ids(g.edge_count());
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  return ids;
}

/// Result of a Bellman-Ford pass. When `cycle` is set, the pass did not
/// settle and the edges listed form a cycle of the predecessor graph.
struct BellmanFordResult {
  std::vector<double> dist;
  std::vector<std::ptrdiff_t> pred_edge;
  std::vector<std::size_t> cycle;
};

/// Bellman-Ford with edge weights weight(edge_id). With source == nullopt
/// every node starts at 0 (a virtual source joined to all nodes).
/// Relaxations smaller than `slack` are ignored so roundoff-level cycles do
/// not keep the iteration alive.
template <typename Weight>
BellmanFordResult bellman_ford(const CostGraph& g, Weight&& weight, std::optional<std::size_t> source,
                               double slack = 1e-13) {
  const std::size_t n = g.node_count();
  BellmanFordResult r;
  r.dist.assign(n, source ? kInf : 0.0);
  r.pred_edge.assign(n, -1);
  if (source) r.dist[*source] = 0.0;
  std::ptrdiff_t last = -1;
  for (std::size_t round = 0; round < n; ++round) {
    last = -1;
    for (std::size_t k = 0; k < g.edge_count(); ++k) {
      const auto& e = g.edge(k);
      const double du = r.dist[e.from];
      if (du == kInf) continue;
      const double cand = du + weight(k);
      const double cur = r.dist[e.to];
      if (cur == kInf ? cand < kInf : cand < cur - slack * (1.0 + std::abs(cur))) {
        r.dist[e.to] = cand;
        r.pred_edge[e.to] = std::ptrdiff_t(k);
        last = std::ptrdiff_t(e.to);
      }
    }
    if (last < 0) return r;
  }
  // Still relaxing after n rounds: walk back n steps to land on a cycle.
  std::size_t v = std::size_t(last);
  for (std::size_t i = 0; i < n; ++i) {
    if (r.pred_edge[v] < 0) return r;
    v = g.edge(std::size_t(r.pred_edge[v])).from;
  }
  const std::size_t start = v;
  do {
    if (r.pred_edge[v] < 0) {
      r.cycle.clear();
      return r;
    }
    const std::size_t id = std::size_t(r.pred_edge[v]);
    r.cycle.push_back(id);
    v = g.edge(id).from;
  } while (v != start && r.cycle.size() <= n);
  std::reverse(r.cycle.begin(), r.cycle.end());
  return r;
}

/// Dijkstra on nonnegative weights; ties resolved by node index.
template <typename Weight>
std::vector<double> dijkstra(const CostGraph& g, Weight&& weight, std::size_t source) {
  const std::size_t n = g.node_count();
  std::vector<double> dist(n, kInf);
  std::vector<char> done(n, 0);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[source] = 0.0;
  heap.push({0.0, source});
  while (!heap.empty()) {
    const auto [d, v] = heap.top();
    heap.pop();
    if (done[v]) continue;
    done[v] = 1;
    for (std::size_t id : g.out_edges(v)) {
      const auto& e = g.edge(id);
      const double cand = d + weight(id);
      if (cand < dist[e.to]) {
        dist[e.to] = cand;
        heap.push({cand, e.to});
      }
    }
  }
  return dist;
}

}  // namespace wkam
