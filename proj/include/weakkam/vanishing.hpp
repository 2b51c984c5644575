#pragma once

// eps -> 0 sweep of the contact scheme and the selection formulas for its limit:
//
//   h_mu(x) = sum_y h(y, x) w(y) mu(y) / sum_y w(y) mu(y),   w(y) = dL/du(y, v(y), 0)
//   u0_hat  = min over Mather measures mu of h_mu
//
// With w = 1 this is the discounted (unweighted) formula.

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "weakkam/barrier.hpp"
#include "weakkam/contact.hpp"
#include "weakkam/measure.hpp"

namespace wkam {

struct SweepResult {
  std::vector<double> eps;
  std::vector<ValueField> fields;
  std::vector<double> gaps;        // sup |u_k - u_{k+1}|
  std::vector<double> lipschitz;   // per eps
  std::vector<double> sup_norms;   // per eps
  std::vector<double> u_smallest;  // raw field at the smallest eps
  std::vector<double> u0_direct;   // extrapolated to eps = 0
};

/// Per-node least-squares line through the last (up to three) points,
/// evaluated at eps = 0.
inline std::vector<double> richardson_limit(const std::vector<double>& eps, const std::vector<ValueField>& fields) {
  const std::size_t m = std::min<std::size_t>(3, eps.size());
  const std::size_t first = eps.size() - m;
  const std::size_t n = fields.back().u.size();
  if (m == 1) return fields.back().u;
  double se = 0.0, see = 0.0;
  for (std::size_t k = first; k < eps.size(); ++k) {
    se += eps[k];
    see += eps[k] * eps[k];
  }
  const double mean_e = se / double(m);
  const double sxx = see - double(m) * mean_e * mean_e;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double su = 0.0, seu = 0.0;
    for (std::size_t k = first; k < eps.size(); ++k) {
      su += fields[k].u[i];
      seu += eps[k] * fields[k].u[i];
    }
    const double mean_u = su / double(m);
    const double slope = (seu - double(m) * mean_e * mean_u) / sxx;
    out[i] = mean_u - slope * mean_e;
  }
  return out;
}

inline SweepResult sweep(const CostGraph& g, double c, const std::vector<double>& eps_list,
                         const SolveOptions& opt = {}) {
  if (eps_list.empty()) throw Error(ErrorKind::Config, "eps_list is empty");
  for (std::size_t k = 0; k < eps_list.size(); ++k) {
    if (!(eps_list[k] > 0.0)) throw Error(ErrorKind::Config, "eps_list entries must be positive");
    if (k > 0 && !(eps_list[k] < eps_list[k - 1]))
      throw Error(ErrorKind::Config, "eps_list must be strictly decreasing");
  }
  SweepResult r;
  r.eps = eps_list;
  for (double e : eps_list) {
    r.fields.push_back(solve_contact(g, c, e, opt));
    r.lipschitz.push_back(discrete_lipschitz(r.fields.back().u, g));
    r.sup_norms.push_back(r.fields.back().sup_norm());
  }
  for (std::size_t k = 0; k + 1 < r.fields.size(); ++k) {
    double m = 0.0;
    for (std::size_t i = 0; i < g.node_count(); ++i)
      m = std::max(m, std::abs(r.fields[k].u[i] - r.fields[k + 1].u[i]));
    r.gaps.push_back(m);
  }
  r.u_smallest = r.fields.back().u;
  r.u0_direct = richardson_limit(r.eps, r.fields);
  return r;
}

/// dL/du(y, v, 0) at each node; the families here make it independent of v.
inline std::vector<double> coupling_weights(const CostGraph& g) {
  std::vector<double> w(g.node_count());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = g.coupling(i).dg(0.0);
  return w;
}

struct SelectionReport {
  bool weighted = true;
  std::vector<std::vector<double>> h_mu;  // one field per measure
  std::vector<double> u_hat;              // pointwise minimum
  std::vector<double> min_weight;         // per measure, max over its support of w (should be <= -delta)
};

inline SelectionReport selection_inf(const BarrierMatrix& b, const std::vector<DiscreteMeasure>& measures,
                                     const CostGraph& g, bool weighted = true) {
  if (measures.empty()) throw Error(ErrorKind::EmptyMeasureList, "no Mather measures to select from");
  const std::size_t n = g.node_count();
  const auto w = weighted ? coupling_weights(g) : std::vector<double>(n, 1.0);
  SelectionReport rep;
  rep.weighted = weighted;
  rep.u_hat.assign(n, kInf);
  for (const auto& m : measures) {
    const auto mu = m.node_marginal(g);
    std::vector<double> field(n, 0.0);
    double denom = 0.0;
    double wmax = -kInf;
    for (std::size_t y = 0; y < n; ++y) {
      if (mu[y] <= 0.0) continue;
      const double wy = w[y] * mu[y];
      denom += wy;
      wmax = std::max(wmax, w[y]);
      for (std::size_t x = 0; x < n; ++x) field[x] += b.H(y, x) * wy;
    }
    for (double& v : field) v /= denom;
    for (std::size_t x = 0; x < n; ++x) rep.u_hat[x] = std::min(rep.u_hat[x], field[x]);
    rep.h_mu.push_back(std::move(field));
    rep.min_weight.push_back(wmax);
  }
  return rep;
}

/// I_mu = sum_y u(y) dL/du(y, v(y), 0) mu(y) per measure.
inline std::vector<double> constraint_check(std::span<const double> u, const std::vector<DiscreteMeasure>& measures,
                                            const CostGraph& g) {
  const auto w = coupling_weights(g);
  std::vector<double> out;
  for (const auto& m : measures) {
    const auto mu = m.node_marginal(g);
    double s = 0.0;
    for (std::size_t y = 0; y < mu.size(); ++y)
      if (mu[y] > 0.0) s += u[y] * w[y] * mu[y];
    out.push_back(s);
  }
  return out;
}

struct Membership {
  double defect = 0.0;
  std::vector<double> constraints;
  double threshold = 0.0;  // constraints must be >= -threshold
  bool pass = false;
};

/// Is u a critical subsolution with I_mu >= -tol_con * |u|_inf for all mu?
inline Membership check_membership(std::span<const double> u, const std::vector<DiscreteMeasure>& measures,
                                   const CostGraph& g, double c, double tol_sub, double tol_con) {
  Membership r;
  r.defect = subsolution_defect(u, g, c);
  r.constraints = constraint_check(u, measures, g);
  double sup = 0.0;
  for (double v : u) sup = std::max(sup, std::abs(v));
  r.threshold = tol_con * std::max(sup, 1e-300);
  r.pass = r.defect <= tol_sub;
  for (double v : r.constraints) r.pass = r.pass && v >= -r.threshold;
  return r;
}

/// max over measures, supported y and nodes x of
///   (u_hat(y) - Phi(x, y)) - u(x),
/// i.e. how far the witness subsolutions rise above u.
inline double witness_excess(const BarrierMatrix& b, const std::vector<DiscreteMeasure>& measures,
                             std::span<const double> u_hat, std::span<const double> u, const CostGraph& g) {
  double worst = -kInf;
  for (const auto& m : measures)
    for (std::size_t y : m.support_nodes(g))
      for (std::size_t x = 0; x < b.n; ++x) worst = std::max(worst, u_hat[y] - b.Phi(x, y) - u[x]);
  return worst;
}

struct OccupationResult {
  DiscreteMeasure measure;  // normalized
  double raw_mass = 0.0;
  double closedness = 0.0;
  double action_gap = 0.0;  // sum m_e c0_e / dt + c
  std::size_t horizon = 0;
  bool saturated = false;
};

/// Discounted occupation measure of the backward calibrated path from
/// `start`: step k (edge from nodes[k+1] to nodes[k]) gets weight
///   eps dt exp(eps dt sum_{s<k} abar_s),
/// abar_s the trapezoidal average over the step of int_0^1 dL/du(tau eps u) dtau.
inline OccupationResult occupation_measure(std::span<const double> u, const CostGraph& g, double c, double eps,
                                           std::size_t start, std::size_t horizon) {
  const auto path = backward_calibrated_path(u, g, c, eps, start, horizon);
  OccupationResult r;
  r.horizon = horizon;
  r.saturated = path.saturated;
  r.measure.weight.assign(g.edge_count(), 0.0);
  auto alpha = [&](std::size_t i) { return g.coupling(i).secant(eps * u[i]); };
  double log_decay = 0.0;
  for (std::size_t k = 0; k < path.edges.size(); ++k) {
    const double w = eps * g.dt() * std::exp(log_decay);
    r.measure.weight[path.edges[k]] += w;
    r.raw_mass += w;
    const double abar = 0.5 * (alpha(path.nodes[k]) + alpha(path.nodes[k + 1]));
    log_decay += eps * g.dt() * abar;
  }
  for (double& w : r.measure.weight) w /= r.raw_mass;
  r.closedness = r.measure.closedness_defect(g);
  r.action_gap = r.measure.objective(g) / g.dt() + c;
  return r;
}

inline std::size_t occupation_horizon(const CostGraph& g, double eps) {
  return std::size_t(std::ceil(10.0 / (eps * g.min_lambda() * g.dt())));
}

struct CompareReport {
  static constexpr std::array<const char*, 4> kNames{"uF_direct", "uG_direct", "formula_unweighted",
                                                     "formula_weighted"};
  std::array<std::vector<double>, 4> fields;
  std::array<std::array<double, 4>, 4> gaps{};  // pairwise sup norms
  double max_gap = 0.0;
  double threshold = 0.0;
  bool gap_detected = false;
  SweepResult sweepF, sweepG;
};

inline constexpr double kGapConstant = 10.0;

/// F: same base costs with coupling lambda = 1; G: the given coupling.
/// A gap is reported when some pair of fields differs by more than
/// `threshold` (default kGapConstant * dx).
inline CompareReport compare_discounted_contact(const CostGraph& gF, const CostGraph& gG, double c,
                                                const BarrierMatrix& b,
                                                const std::vector<DiscreteMeasure>& measures,
                                                const std::vector<double>& eps_list, const SolveOptions& opt = {},
                                                double threshold = 0.0) {
  CompareReport r;
  r.sweepF = sweep(gF, c, eps_list, opt);
  r.sweepG = sweep(gG, c, eps_list, opt);
  r.fields[0] = r.sweepF.u0_direct;
  r.fields[1] = r.sweepG.u0_direct;
  r.fields[2] = selection_inf(b, measures, gG, false).u_hat;
  r.fields[3] = selection_inf(b, measures, gG, true).u_hat;
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t k = 0; k < 4; ++k) {
      double m = 0.0;
      for (std::size_t i = 0; i < r.fields[a].size(); ++i) m = std::max(m, std::abs(r.fields[a][i] - r.fields[k][i]));
      r.gaps[a][k] = m;
      r.max_gap = std::max(r.max_gap, m);
    }
  r.threshold = threshold > 0.0 ? threshold : kGapConstant * gG.dx();
  r.gap_detected = r.max_gap > r.threshold;
  return r;
}

/// The same graph with every node's coupling replaced by lambda = 1, kappa = 0.
inline CostGraph with_discount_coupling(const CostGraph& g) {
  std::vector<Vec> coords(g.node_count());
  for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = g.coord(i);
  std::vector<NodeCoupling> cpl(g.node_count(), NodeCoupling{1.0, 0.0});
  std::vector<Edge> edges(g.edges().begin(), g.edges().end());
  return CostGraph(g.dim(), g.dx(), g.dt(), std::move(coords), std::move(cpl), std::move(edges));
}

}  // namespace wkam
