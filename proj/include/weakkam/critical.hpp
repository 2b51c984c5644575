#pragma once

// Discrete critical value, tight subgraph, Aubry set and Mather measures.
//
// On the cost graph the critical value is -m*/dt where m* is the minimum
// cycle mean of the base costs. Mather measures are the unit-mass
// circulations attaining m*; their extreme points are uniform measures on
// minimum-mean simple cycles.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "weakkam/error.hpp"
#include "weakkam/grid.hpp"
#include "weakkam/measure.hpp"
#include "weakkam/parallel.hpp"
#include "weakkam/paths.hpp"
#include "weakkam/tolerances.hpp"

namespace wkam {

struct Cycle {
  double mean = kInf;
  std::vector<std::size_t> nodes;  // nodes[k] -> nodes[k+1] (cyclically)
  std::vector<std::size_t> edges;  // edges[k] goes nodes[k] -> nodes[k+1]
};

inline double cycle_mean(const CostGraph& g, std::span<const std::size_t> edges) {
  double s = 0.0;
  for (std::size_t id : edges) s += g.edge(id).cost;
  return s / double(edges.size());
}

namespace detail {

/// Karp's recurrence on one strongly connected edge subset.
///   D_k(v) = min_{(u,v)} D_{k-1}(u) + w(u,v),  D_0 = [v == source]
///   m* = min_v max_k (D_N(v) - D_k(v)) / (N - k)
/// The N-edge walk realising D_N(v*) contains a minimum-mean cycle.
inline Cycle karp_component(const CostGraph& g, const std::vector<std::size_t>& nodes,
                            std::span<const std::size_t> edge_ids, std::size_t threads) {
  const std::size_t n = nodes.size();
  std::vector<std::ptrdiff_t> local(g.node_count(), -1);
  for (std::size_t k = 0; k < n; ++k) local[nodes[k]] = std::ptrdiff_t(k);

  struct In {
    std::size_t from;
    double w;
    std::size_t id;
  };
  std::vector<std::vector<In>> in(n);
  for (std::size_t id : edge_ids) {
    const auto& e = g.edge(id);
    const auto a = local[e.from], b = local[e.to];
    if (a < 0 || b < 0) continue;
    in[std::size_t(b)].push_back({std::size_t(a), e.cost, id});
  }
  for (auto& list : in)
    std::sort(list.begin(), list.end(), [](const In& x, const In& y) { return x.id < y.id; });

  std::vector<double> D((n + 1) * n, kInf);
  std::vector<std::ptrdiff_t> pred((n + 1) * n, -1);
  D[0] = 0.0;  // source = nodes[0]
  for (std::size_t k = 1; k <= n; ++k) {
    const double* prev = &D[(k - 1) * n];
    double* cur = &D[k * n];
    std::ptrdiff_t* pk = &pred[k * n];
    parallel_for(n, threads, [&](std::size_t v) {
      double best = kInf;
      std::ptrdiff_t arg = -1;
      for (std::size_t t = 0; t < in[v].size(); ++t) {
        const double cand = prev[in[v][t].from] + in[v][t].w;
        if (cand < best) {
          best = cand;
          arg = std::ptrdiff_t(t);
        }
      }
      cur[v] = best;
      pk[v] = arg;
    });
  }

  double mstar = kInf;
  std::size_t vstar = 0;
  for (std::size_t v = 0; v < n; ++v) {
    const double dn = D[n * n + v];
    if (dn == kInf) continue;
    double worst = -kInf;
    for (std::size_t k = 0; k < n; ++k) {
      const double dk = D[k * n + v];
      if (dk == kInf) continue;
      worst = std::max(worst, (dn - dk) / double(n - k));
    }
    if (worst < mstar) {
      mstar = worst;
      vstar = v;
    }
  }

  // Walk back from v* and split the walk into simple cycles.
  std::vector<std::size_t> walk_nodes(n + 1), walk_edges(n);
  std::size_t v = vstar;
  walk_nodes[n] = v;
  for (std::size_t k = n; k >= 1; --k) {
    const auto& item = in[v][std::size_t(pred[k * n + v])];
    walk_edges[k - 1] = item.id;
    v = item.from;
    walk_nodes[k - 1] = v;
  }
  Cycle best;
  std::vector<std::ptrdiff_t> pos(n, -1);
  std::vector<std::size_t> stack_nodes, stack_edges;
  for (std::size_t k = 0; k <= n; ++k) {
    const std::size_t u = walk_nodes[k];
    if (pos[u] >= 0) {
      const std::size_t p = std::size_t(pos[u]);
      std::vector<std::size_t> ce(stack_edges.begin() + std::ptrdiff_t(p), stack_edges.end());
      std::vector<std::size_t> cn(stack_nodes.begin() + std::ptrdiff_t(p), stack_nodes.end());
      const double mean = cycle_mean(g, ce);
      if (mean < best.mean) {
        best.mean = mean;
        best.edges = ce;
        for (auto& x : cn) x = nodes[x];
        best.nodes = cn;
      }
      for (std::size_t q = p; q < stack_nodes.size(); ++q) pos[stack_nodes[q]] = -1;
      stack_nodes.resize(p);
      stack_edges.resize(p);
    }
    pos[u] = std::ptrdiff_t(stack_nodes.size());
    stack_nodes.push_back(u);
    if (k < n) stack_edges.push_back(walk_edges[k]);
  }
  return best;
}

}  // namespace detail

/// Minimum-mean cycle of the subgraph `edge_ids`, taken over all of its
/// strongly connected components (earliest component wins ties).
inline Cycle karp_min_mean_cycle(const CostGraph& g, std::span<const std::size_t> edge_ids,
                                 std::size_t threads = 1) {
  const auto comps = strongly_connected_components(g, edge_ids);
  std::vector<std::vector<std::size_t>> per_comp(comps.nodes.size());
  for (std::size_t id : edge_ids) {
    const auto& e = g.edge(id);
    if (comps.of_node[e.from] == comps.of_node[e.to]) per_comp[comps.of_node[e.from]].push_back(id);
  }
  Cycle best;
  for (std::size_t c = 0; c < comps.nodes.size(); ++c) {
    if (!comps.nontrivial[c]) continue;
    Cycle cyc = detail::karp_component(g, comps.nodes[c], per_comp[c], threads);
    if (cyc.mean < best.mean) best = std::move(cyc);
  }
  return best;
}

inline Cycle karp_min_mean_cycle(const CostGraph& g, std::size_t threads = 1) {
  const auto ids = all_edge_ids(g);
  return karp_min_mean_cycle(g, ids, threads);
}

/// c = -m*/dt on the u = 0 graph.
inline double critical_value(const CostGraph& g, std::size_t threads = 1) {
  return -karp_min_mean_cycle(g, threads).mean / g.dt();
}

inline double critical_value(const LagrangianModel& model, const TorusGrid& grid, std::size_t threads = 1) {
  return critical_value(build_cost_graph(model, grid), threads);
}

/// Long-run-average cross-check: iterates the min-plus operator and brackets
/// the mean growth per step between min_j and max_j of (Tu - u)_j.
struct ValueIterationEstimate {
  double c = 0.0;
  double c_lower = 0.0;
  double c_upper = 0.0;
  std::size_t iterations = 0;
};

inline ValueIterationEstimate critical_value_iteration(const CostGraph& g, std::size_t iterations,
                                                       std::size_t threads = 1) {
  const std::size_t n = g.node_count();
  std::vector<double> u(n, 0.0), next(n, 0.0);
  double lo = -kInf, hi = kInf;
  for (std::size_t it = 0; it < iterations; ++it) {
    parallel_for(n, threads, [&](std::size_t j) {
      double best = kInf;
      auto [a, b] = g.in_range(j);
      for (std::size_t id = a; id < b; ++id) best = std::min(best, u[g.edge(id).from] + g.edge(id).cost);
      next[j] = best;
    });
    lo = kInf;
    hi = -kInf;
    for (std::size_t j = 0; j < n; ++j) {
      lo = std::min(lo, next[j] - u[j]);
      hi = std::max(hi, next[j] - u[j]);
    }
    const double shift = next[0];
    for (std::size_t j = 0; j < n; ++j) u[j] = next[j] - shift;
  }
  ValueIterationEstimate est;
  est.iterations = iterations;
  est.c_lower = -hi / g.dt();
  est.c_upper = -lo / g.dt();
  est.c = 0.5 * (est.c_lower + est.c_upper);
  return est;
}

/// Reduced cost c0_ij + c dt + u_i - u_j of one edge.
inline double reduced_cost(const CostGraph& g, std::span<const double> u, double c, std::size_t id) {
  const auto& e = g.edge(id);
  return e.cost + c * g.dt() + u[e.from] - u[e.to];
}

/// Mane potential Phi(source, .) with costs c0 + c dt. It is a discrete
/// subsolution, and a weak KAM solution when `source` lies on a critical cycle.
inline std::vector<double> mane_potential_from(const CostGraph& g, double c, std::size_t source) {
  const double shift = c * g.dt();
  auto r = bellman_ford(g, [&](std::size_t id) { return g.edge(id).cost + shift; }, source);
  if (!r.cycle.empty()) {
    double total = 0.0;
    for (std::size_t id : r.cycle) total += g.edge(id).cost + shift;
    std::ostringstream msg;
    msg << "cycle of total cost " << total << " below zero (c too large?)";
    throw Error(ErrorKind::NegativeCycle, msg.str());
  }
  return r.dist;
}

/// A weak KAM potential anchored on the first node of the Karp cycle.
inline std::vector<double> critical_potential(const CostGraph& g, double c, const Cycle& karp) {
  return mane_potential_from(g, c, karp.nodes.front());
}

/// Edges with reduced cost <= tol_tight. Throws NotSubsolution when some
/// reduced cost is below -tol_sub.
inline std::vector<std::size_t> tight_subgraph(const CostGraph& g, std::span<const double> u, double c,
                                               const Tolerances& tol) {
  std::vector<std::size_t> tight;
  double worst = 0.0;
  for (std::size_t id = 0; id < g.edge_count(); ++id) {
    const double r = reduced_cost(g, u, c, id);
    worst = std::min(worst, r);
    if (r <= tol.tol_tight) tight.push_back(id);
  }
  if (-worst > tol.tol_sub) {
    std::ostringstream msg;
    msg << "potential violates the subsolution inequality by " << -worst << " > " << tol.tol_sub;
    throw Error(ErrorKind::NotSubsolution, msg.str());
  }
  return tight;
}

/// Nodes lying on a cycle of the tight subgraph.
inline std::vector<std::size_t> discrete_aubry(const CostGraph& g, std::span<const double> u, double c,
                                               const Tolerances& tol) {
  const auto tight = tight_subgraph(g, u, c, tol);
  const auto comps = strongly_connected_components(g, tight);
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < comps.nodes.size(); ++k)
    if (comps.nontrivial[k]) out.insert(out.end(), comps.nodes[k].begin(), comps.nodes[k].end());
  std::sort(out.begin(), out.end());
  return out;
}

inline DiscreteMeasure mather_measure_karp(const CostGraph& g, std::size_t threads = 1) {
  const Cycle cyc = karp_min_mean_cycle(g, threads);
  return cycle_measure(g, cyc.edges);
}

/// A closed walk found by following the first outgoing edge from node 0.
/// Used as a deliberately poor starting point for cycle canceling.
inline DiscreteMeasure first_cycle_measure(const CostGraph& g) {
  std::vector<std::ptrdiff_t> seen(g.node_count(), -1);
  std::vector<std::size_t> path_edges;
  std::size_t v = 0;
  while (seen[v] < 0) {
    seen[v] = std::ptrdiff_t(path_edges.size());
    const auto out = g.out_edges(v);
    if (out.empty()) throw Error(ErrorKind::IterationLimit, "node without outgoing edges");
    path_edges.push_back(out.front());
    v = g.edge(out.front()).to;
  }
  std::vector<std::size_t> cyc(path_edges.begin() + seen[v], path_edges.end());
  return cycle_measure(g, cyc);
}

/// Minimises sum_e m_e c0_e over unit-mass circulations. While some cycle
/// has negative total cost under c0 - J (J the current objective), all mass
/// is moved onto it. Cycles are detected by Bellman-Ford.
inline DiscreteMeasure cancel_cycles(const CostGraph& g, DiscreteMeasure start, std::size_t limit = 0) {
  if (limit == 0) limit = 10 * g.edge_count();
  DiscreteMeasure m = std::move(start);
  double J = m.objective(g) / m.total_mass();
  for (std::size_t it = 0; it < limit; ++it) {
    auto r = bellman_ford(g, [&](std::size_t id) { return g.edge(id).cost - J; }, std::nullopt);
    if (r.cycle.empty()) return m;
    const double mean = cycle_mean(g, r.cycle);
    if (!(mean < J - 1e-13 * (1.0 + std::abs(J)))) return m;
    m = cycle_measure(g, r.cycle);
    J = mean;
  }
  std::ostringstream msg;
  msg << "cycle canceling exceeded " << limit << " cancellations";
  throw Error(ErrorKind::IterationLimit, msg.str());
}

inline DiscreteMeasure mather_measure_circulation(const CostGraph& g, std::size_t limit = 0,
                                                  std::size_t threads = 1) {
  return cancel_cycles(g, mather_measure_karp(g, threads), limit);
}

struct ExtremeMeasureOptions {
  std::size_t max_cycles_per_component = 64;
  std::size_t dfs_budget = 200000;  // DFS expansions per component
  std::size_t max_length = 0;       // 0: twice the grid side
};

/// One minimum-mean cycle measure per tight strongly connected component
/// whose best cycle is globally optimal (within tol_tight per edge), plus
/// any further simple cycles of equal mean found by a bounded DFS.
inline std::vector<DiscreteMeasure> enumerate_extreme_measures(const CostGraph& g, std::span<const double> u,
                                                               double c, const Tolerances& tol,
                                                               const ExtremeMeasureOptions& opt = {},
                                                               std::size_t threads = 1) {
  const auto tight = tight_subgraph(g, u, c, tol);
  const auto comps = strongly_connected_components(g, tight);
  std::vector<std::vector<std::size_t>> per_comp(comps.nodes.size());
  for (std::size_t id : tight) {
    const auto& e = g.edge(id);
    if (comps.of_node[e.from] == comps.of_node[e.to]) per_comp[comps.of_node[e.from]].push_back(id);
  }
  const double mstar = -c * g.dt();
  std::size_t max_len = opt.max_length;
  if (max_len == 0) {
    const double side = g.dim() == 2 ? std::sqrt(double(g.node_count())) : double(g.node_count());
    max_len = 2 * std::size_t(std::lround(side));
  }

  std::vector<DiscreteMeasure> out;
  std::set<std::vector<std::size_t>> seen;
  auto add = [&](std::vector<std::size_t> edges) {
    std::vector<std::size_t> key = edges;
    std::sort(key.begin(), key.end());
    if (seen.insert(key).second) out.push_back(cycle_measure(g, edges));
  };

  for (std::size_t k = 0; k < comps.nodes.size(); ++k) {
    if (!comps.nontrivial[k]) continue;
    const Cycle best = detail::karp_component(g, comps.nodes[k], per_comp[k], threads);
    if (best.edges.empty() || best.mean > mstar + tol.tol_tight) continue;
    add(best.edges);

    // Bounded DFS for further simple cycles with the same mean; each cycle
    // is found once, from its smallest node.
    const double tie = 1e-12 * (1.0 + std::abs(best.mean));
    std::map<std::size_t, std::vector<std::size_t>> adj;
    for (std::size_t id : per_comp[k]) adj[g.edge(id).from].push_back(id);
    std::size_t budget = opt.dfs_budget;
    std::size_t found = 1;
    std::vector<char> on_path(g.node_count(), 0);
    std::vector<std::size_t> path;
    std::function<void(std::size_t, std::size_t, double)> dfs = [&](std::size_t s, std::size_t v, double sum) {
      for (std::size_t id : adj[v]) {
        if (budget == 0 || found >= opt.max_cycles_per_component) return;
        --budget;
        const std::size_t w = g.edge(id).to;
        const double total = sum + g.edge(id).cost;
        if (w == s) {
          path.push_back(id);
          if (std::abs(total / double(path.size()) - best.mean) <= tie) {
            const std::size_t before = out.size();
            add(path);
            if (out.size() > before) ++found;
          }
          path.pop_back();
          continue;
        }
        if (w < s || on_path[w] || path.size() + 1 >= max_len) continue;
        on_path[w] = 1;
        path.push_back(id);
        dfs(s, w, total);
        path.pop_back();
        on_path[w] = 0;
      }
    };
    for (std::size_t s : comps.nodes[k]) {
      on_path[s] = 1;
      dfs(s, s, 0.0);
      on_path[s] = 0;
      if (budget == 0 || found >= opt.max_cycles_per_component) break;
    }
  }
  return out;
}

}  // namespace wkam
