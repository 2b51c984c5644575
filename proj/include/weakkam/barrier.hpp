#pragma once

// Action functions, Mane potential, Peierls barrier and Aubry classes on the
// cost graph with critical costs c0 + c dt.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "weakkam/error.hpp"
#include "weakkam/grid.hpp"
#include "weakkam/parallel.hpp"
#include "weakkam/paths.hpp"

namespace wkam {

/// Minimal k-step path costs from y to every node.
inline std::vector<double> finite_action_row(const CostGraph& g, double c, std::size_t k, std::size_t y) {
  const std::size_t n = g.node_count();
  std::vector<double> cur(n, kInf), next(n);
  cur[y] = 0.0;
  for (std::size_t s = 0; s < k; ++s) {
    for (std::size_t j = 0; j < n; ++j) {
      auto [a, b] = g.in_range(j);
      double best = kInf;
      for (std::size_t id = a; id < b; ++id)
        best = std::min(best, cur[g.edge(id).from] + g.edge(id).cost + c * g.dt());
      next[j] = best;
    }
    std::swap(cur, next);
  }
  return cur;
}

inline double finite_action(const CostGraph& g, double c, std::size_t k, std::size_t y, std::size_t x) {
  if (k == 0) throw Error(ErrorKind::Config, "finite_action needs k >= 1");
  return finite_action_row(g, c, k, y)[x];
}

/// min over k in [N, k_max] of the k-step action from y to x.
inline double liminf_check(const CostGraph& g, double c, std::size_t y, std::size_t x, std::size_t k_max) {
  const std::size_t n = g.node_count();
  if (k_max < n) throw Error(ErrorKind::Config, "liminf_check needs k_max >= node count");
  std::vector<double> cur(n, kInf), next(n);
  cur[y] = 0.0;
  double best = kInf;
  for (std::size_t s = 1; s <= k_max; ++s) {
    for (std::size_t j = 0; j < n; ++j) {
      auto [a, b] = g.in_range(j);
      double m = kInf;
      for (std::size_t id = a; id < b; ++id) m = std::min(m, cur[g.edge(id).from] + g.edge(id).cost + c * g.dt());
      next[j] = m;
    }
    std::swap(cur, next);
    if (s >= n) best = std::min(best, cur[x]);
  }
  return best;
}

/// Dense N x N matrices, row y, column x.
struct BarrierMatrix {
  std::size_t n = 0;
  std::vector<double> h;    // Peierls barrier h(y, x)
  std::vector<double> phi;  // Mane potential Phi(y, x), Phi(x, x) = 0

  double H(std::size_t y, std::size_t x) const { return h[y * n + x]; }
  double Phi(std::size_t y, std::size_t x) const { return phi[y * n + x]; }

  std::vector<double> h_column(std::size_t x) const {
    std::vector<double> col(n);
    for (std::size_t y = 0; y < n; ++y) col[y] = H(y, x);
    return col;
  }
  std::vector<double> h_row(std::size_t y) const {
    return std::vector<double>(h.begin() + std::ptrdiff_t(y * n), h.begin() + std::ptrdiff_t((y + 1) * n));
  }
  std::vector<double> phi_row(std::size_t y) const {
    return std::vector<double>(phi.begin() + std::ptrdiff_t(y * n), phi.begin() + std::ptrdiff_t((y + 1) * n));
  }
};

/// All-pairs Mane potential by Johnson reweighting: one Bellman-Ford pass
/// for a node potential, then Dijkstra from every source on the reduced
/// costs. Reduced costs below zero (roundoff-level cycles at criticality)
/// are clamped to zero.
inline std::vector<double> mane_matrix(const CostGraph& g, double c, double tol_tight, std::size_t threads = 1) {
  const std::size_t n = g.node_count();
  const double shift = c * g.dt();
  auto w = [&](std::size_t id) { return g.edge(id).cost + shift; };
  const auto bf = bellman_ford(g, w, std::nullopt);
  if (!bf.cycle.empty()) {
    double total = 0.0;
    for (std::size_t id : bf.cycle) total += w(id);
    if (total < -double(n) * tol_tight) {
      std::ostringstream msg;
      msg << "cycle of length " << bf.cycle.size() << " with total cost " << total << " < -N tol_tight";
      throw Error(ErrorKind::NegativeCycle, msg.str());
    }
  }
  const auto& p = bf.dist;
  std::vector<double> phi(n * n);
  parallel_for(n, threads, [&](std::size_t y) {
    auto d = dijkstra(
        g,
        [&](std::size_t id) {
          const auto& e = g.edge(id);
          return std::max(0.0, w(id) + p[e.from] - p[e.to]);
        },
        y);
    for (std::size_t x = 0; x < n; ++x) phi[y * n + x] = x == y ? 0.0 : d[x] - p[y] + p[x];
  });
  return phi;
}

/// h(y, x) = min over z in the Aubry set of Phi(y, z) + Phi(z, x).
inline BarrierMatrix peierls_matrix(const CostGraph& g, double c, std::span<const std::size_t> aubry,
                                    double tol_tight, std::size_t threads = 1) {
  if (aubry.empty()) throw Error(ErrorKind::Config, "peierls_matrix needs a nonempty Aubry set");
  BarrierMatrix b;
  b.n = g.node_count();
  b.phi = mane_matrix(g, c, tol_tight, threads);
  b.h.assign(b.n * b.n, kInf);
  const std::size_t n = b.n;
  parallel_for(n, threads, [&](std::size_t y) {
    double* row = &b.h[y * n];
    for (std::size_t z : aubry) {
      const double a = b.phi[y * n + z];
      const double* pz = &b.phi[z * n];
      for (std::size_t x = 0; x < n; ++x) row[x] = std::min(row[x], a + pz[x]);
    }
  });
  return b;
}

/// Groups Aubry nodes joined by d_c(x, y) = h(x, y) + h(y, x) <= tol_class.
inline std::vector<std::vector<std::size_t>> aubry_classes(const BarrierMatrix& b, std::span<const std::size_t> aubry,
                                                           double tol_class) {
  const std::size_t m = aubry.size();
  std::vector<std::size_t> parent(m);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = i + 1; k < m; ++k)
      if (b.H(aubry[i], aubry[k]) + b.H(aubry[k], aubry[i]) <= tol_class) {
        const std::size_t ri = find(i), rk = find(k);
        if (ri != rk) parent[std::max(ri, rk)] = std::min(ri, rk);
      }
  std::vector<std::vector<std::size_t>> classes;
  std::vector<std::ptrdiff_t> slot(m, -1);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t r = find(i);
    if (slot[r] < 0) {
      slot[r] = std::ptrdiff_t(classes.size());
      classes.emplace_back();
    }
    classes[std::size_t(slot[r])].push_back(aubry[i]);
  }
  return classes;
}

/// Oscillation of the Mane potential: max Phi - min Phi. Every solution of
/// the contact scheme satisfies |u_eps| <= this bound.
inline double potential_oscillation(const BarrierMatrix& b) {
  const auto [lo, hi] = std::minmax_element(b.phi.begin(), b.phi.end());
  return *hi - *lo;
}

/// Lipschitz bound for the contact solutions at eps <= 1, from the fixed-point
/// equation along an edge and its reverse:
///   max_e (c0_e + c dt)/|d_e| + max_slope * K * dt / dx.
inline double lipschitz_bound(const CostGraph& g, double c, double K) {
  double m = 0.0;
  for (const auto& e : g.edges()) {
    const double len = std::hypot(e.disp[0], e.disp[1]);
    if (len > 0.0) m = std::max(m, (e.cost + c * g.dt()) / len);
  }
  return m + g.max_coupling_slope() * K * g.dt() / g.dx();
}

/// True when every node has an incoming edge with reduced cost <= tol.
inline bool every_node_calibrated(const CostGraph& g, std::span<const double> u, double c, double tol) {
  for (std::size_t j = 0; j < g.node_count(); ++j) {
    auto [a, b] = g.in_range(j);
    bool ok = false;
    for (std::size_t id = a; id < b && !ok; ++id)
      ok = g.edge(id).cost + c * g.dt() + u[g.edge(id).from] - u[j] <= tol;
    if (!ok) return false;
  }
  return true;
}

}  // namespace wkam
