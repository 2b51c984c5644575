#pragma once

// Implicit backward Lax-Oleinik scheme for H(x, Du, eps u) = c:
//
//   w_j = min_i [u_i + dt L(x_j, v_ij, eps w_j)] + c dt
//
// The coupling g does not depend on v, so the minimum is taken over
// u_i + c0_ij once and the scalar equation w = A_j + dt g_j(eps w) is then
// solved per node.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "weakkam/error.hpp"
#include "weakkam/grid.hpp"
#include "weakkam/parallel.hpp"
#include "weakkam/paths.hpp"

namespace wkam {

struct ValueField {
  std::vector<double> u;
  double eps = 0.0;
  std::size_t iterations = 0;
  double final_change = 0.0;
  std::vector<double> changes;  // sup-change per sweep (only when recorded)

  double sup_norm() const {
    double m = 0.0;
    for (double v : u) m = std::max(m, std::abs(v));
    return m;
  }
};

struct SolveOptions {
  double tol_fix = 1e-10;
  std::size_t max_iter = 1000000;
  std::size_t threads = 1;
  bool record_changes = false;
};

/// Root of w = a + dt g(eps w). The map w -> w - dt g(eps w) is strictly
/// increasing, so bisection on a sign-changing bracket is monotone.
inline double solve_node_equation(const NodeCoupling& nc, double a, double dt, double eps) {
  if (eps == 0.0) return a;
  if (nc.kappa == 0.0) return a / (1.0 + eps * nc.lambda * dt);
  auto F = [&](double w) { return w - a - dt * nc.g(eps * w); };
  double r = std::abs(dt * nc.g(eps * a)) + 1e-300;
  double lo = a - r, hi = a + r;
  while (F(lo) > 0.0) lo -= (r *= 2.0);
  while (F(hi) < 0.0) hi += (r *= 2.0);
  for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (F(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline void check_contraction(const CostGraph& g, double eps) {
  if (eps < 0.0) throw Error(ErrorKind::ContractionViolated, "eps must be >= 0");
  const double q = eps * g.max_coupling_slope() * g.dt();
  if (q >= 1.0) {
    std::ostringstream msg;
    msg << "eps * Delta * dt = " << q << " >= 1";
    throw Error(ErrorKind::ContractionViolated, msg.str());
  }
}

/// min_i (u_i + c0_ij) over incoming edges, the smallest source winning ties.
inline std::pair<double, std::size_t> best_predecessor(const CostGraph& g, std::span<const double> u,
                                                       std::size_t j) {
  auto [a, b] = g.in_range(j);
  double best = kInf;
  std::size_t arg = a;
  for (std::size_t id = a; id < b; ++id) {
    const double cand = u[g.edge(id).from] + g.edge(id).cost;
    if (cand < best) {
      best = cand;
      arg = id;
    }
  }
  return {best, arg};
}

inline std::vector<double> lax_oleinik_step(std::span<const double> u, const CostGraph& g, double c, double eps,
                                            std::size_t threads = 1) {
  check_contraction(g, eps);
  std::vector<double> out(g.node_count());
  parallel_for(g.node_count(), threads, [&](std::size_t j) {
    const double a = best_predecessor(g, u, j).first + c * g.dt();
    out[j] = solve_node_equation(g.coupling(j), a, g.dt(), eps);
  });
  return out;
}

/// Jacobi iteration from u = 0 to the unique fixed point.
inline ValueField solve_contact(const CostGraph& g, double c, double eps, const SolveOptions& opt = {}) {
  if (!(eps > 0.0)) throw Error(ErrorKind::ContractionViolated, "solve_contact needs eps > 0");
  check_contraction(g, eps);
  ValueField f;
  f.eps = eps;
  f.u.assign(g.node_count(), 0.0);
  for (std::size_t it = 1; it <= opt.max_iter; ++it) {
    auto next = lax_oleinik_step(f.u, g, c, eps, opt.threads);
    double change = 0.0;
    for (std::size_t j = 0; j < next.size(); ++j) change = std::max(change, std::abs(next[j] - f.u[j]));
    f.u = std::move(next);
    f.iterations = it;
    f.final_change = change;
    if (opt.record_changes) f.changes.push_back(change);
    if (!std::isfinite(change)) throw Error(ErrorKind::NonFiniteState, "value iteration diverged");
    if (change <= opt.tol_fix) return f;
  }
  std::ostringstream msg;
  msg << "eps = " << eps << ": sup-change " << f.final_change << " after " << opt.max_iter
      << " sweeps (tol_fix = " << opt.tol_fix << ")";
  throw Error(ErrorKind::NoConvergence, msg.str());
}

struct CalibratedPath {
  std::vector<std::size_t> nodes;  // nodes[0] = start, nodes[k+1] precedes nodes[k]
  std::vector<std::size_t> edges;  // edges[k] goes nodes[k+1] -> nodes[k]
  double max_defect = 0.0;         // largest |calibration residual| along the path
  bool saturated = false;          // some step used the longest stencil displacement
};

/// Greedy backward chain of argmin predecessors.
inline CalibratedPath backward_calibrated_path(std::span<const double> u, const CostGraph& g, double c, double eps,
                                               std::size_t start, std::size_t steps) {
  double reach = 0.0;
  for (const auto& e : g.edges()) reach = std::max(reach, std::hypot(e.disp[0], e.disp[1]));
  CalibratedPath p;
  p.nodes.push_back(start);
  std::size_t j = start;
  for (std::size_t s = 0; s < steps; ++s) {
    const auto [best, id] = best_predecessor(g, u, j);
    const auto& e = g.edge(id);
    const double resid = u[j] - best - g.dt() * g.coupling(j).g(eps * u[j]) - c * g.dt();
    p.max_defect = std::max(p.max_defect, std::abs(resid));
    const double len = std::hypot(e.disp[0], e.disp[1]);
    if (reach > 0.0 && len >= reach * (1.0 - 1e-12)) p.saturated = true;
    p.edges.push_back(id);
    j = e.from;
    p.nodes.push_back(j);
  }
  return p;
}

/// max over edges of u_j - u_i - c0_ij - c dt.
inline double subsolution_defect(std::span<const double> u, const CostGraph& g, double c) {
  double worst = -kInf;
  for (const auto& e : g.edges()) worst = std::max(worst, u[e.to] - u[e.from] - e.cost - c * g.dt());
  return worst;
}

/// max over non-loop edges of |u_j - u_i| / |d_ij|.
inline double discrete_lipschitz(std::span<const double> u, const CostGraph& g) {
  double m = 0.0;
  for (const auto& e : g.edges()) {
    const double len = std::hypot(e.disp[0], e.disp[1]);
    if (len > 0.0) m = std::max(m, std::abs(u[e.to] - u[e.from]) / len);
  }
  return m;
}

}  // namespace wkam
