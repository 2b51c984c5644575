#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "weakkam/weakkam.hpp"

namespace wkam::testing {

// W = 1 - cos x
inline LagrangianModel pendulum() {
  LagrangianModel m;
  m.W.a = {1.0, -1.0};
  return m;
}

// W = (1 - cos 2x) / 2
inline LagrangianModel double_well(TrigPoly lambda = TrigPoly::constant(1.0), double delta = 1.0,
                                   double Delta = 1.0) {
  LagrangianModel m;
  m.W.a = {0.5, 0.0, -0.5};
  m.coupling.lambda = lambda;
  m.delta = delta;
  m.Delta = Delta;
  return m;
}

inline LagrangianModel constant_potential(double w) {
  LagrangianModel m;
  m.W = TrigPoly::constant(w);
  return m;
}

// V = 1.5 + 0.5 cos x with lambda = V
inline LagrangianModel drift() {
  LagrangianModel m;
  m.family = Family::Drift;
  m.V[0].a = {1.5, 0.5};
  m.coupling.lambda.a = {1.5, 0.5};
  m.delta = 1.0;
  m.Delta = 2.0;
  return m;
}

inline CostGraph grid_graph(const LagrangianModel& m, int n, double dt, double vmax = 3.0) {
  return build_cost_graph(m, build_grid(m.dim, n, dt, vmax));
}

inline CostGraph drift_graph(int n = 200) { return grid_graph(drift(), n, 0.1); }

inline Tolerances drift_tolerances(const CostGraph& g) {
  Tolerances t = Tolerances::defaults(g);
  t.tol_tight = 10.0 * g.dx() * g.dt();
  return t;
}

// A, B with A->A 0, A->B 1, B->B 0.2, B->A 1 and lambda = 1.
inline CostGraph two_node() {
  return make_synthetic_graph(2, 1.0, {{0, 0, 0.0}, {0, 1, 1.0}, {1, 1, 0.2}, {1, 0, 1.0}},
                              {NodeCoupling{1.0, 0.0}, NodeCoupling{1.0, 0.0}});
}

// A <-> B with costs 1 and -1, self-loops of cost 1, lambda = (1, 3).
inline CostGraph two_point_gap() {
  return make_synthetic_graph(2, 1.0, {{0, 1, 1.0}, {1, 0, -1.0}, {0, 0, 1.0}, {1, 1, 1.0}},
                              {NodeCoupling{1.0, 0.0}, NodeCoupling{3.0, 0.0}});
}

inline const std::vector<double>& standard_eps() {
  static const std::vector<double> e{0.2, 0.1, 0.05, 0.025, 0.0125};
  return e;
}

inline const std::vector<double>& fine_eps() {
  static const std::vector<double> e{0.004, 0.002, 0.001, 0.0005, 0.00025};
  return e;
}

inline double sup_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Minimum cycle mean by enumerating every simple cycle (each from its
/// smallest node).
inline double brute_force_min_mean(const CostGraph& g) {
  const std::size_t n = g.node_count();
  double best = kInf;
  std::vector<char> on(n, 0);
  std::function<void(std::size_t, std::size_t, double, std::size_t)> dfs = [&](std::size_t s, std::size_t v,
                                                                             double sum, std::size_t len) {
    for (std::size_t id : g.out_edges(v)) {
      const std::size_t w = g.edge(id).to;
      const double total = sum + g.edge(id).cost;
      if (w == s) {
        best = std::min(best, total / double(len + 1));
      } else if (w > s && !on[w]) {
        on[w] = 1;
        dfs(s, w, total, len + 1);
        on[w] = 0;
      }
    }
  };
  for (std::size_t s = 0; s < n; ++s) {
    on[s] = 1;
    dfs(s, s, 0.0, 0);
    on[s] = 0;
  }
  return best;
}

}  // namespace wkam::testing
