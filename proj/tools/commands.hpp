#pragma once

#include <cstdio>
#include <functional>
#include <map>
#include <string>

#include "config.hpp"

namespace wkam::cli {

struct RunFlags {
  std::size_t threads = 1;
  bool value_iteration = false;
};

struct Outputs {
  std::string csv;
  json summary = json::object();
};

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Leading coordinate columns of per-node CSV rows.
inline std::string coord_header(const ExperimentConfig& cfg) {
  if (cfg.synthetic) return "node";
  return cfg.grid.dim == 1 ? "node,x" : "node,x,y";
}

inline std::string coord_cells(const ExperimentConfig& cfg, const CostGraph& g, std::size_t i) {
  std::string s = std::to_string(i);
  if (cfg.synthetic) return s;
  s += "," + fmt(g.coord(i)[0]);
  if (cfg.grid.dim == 2) s += "," + fmt(g.coord(i)[1]);
  return s;
}

inline SolveOptions solve_options(const ExperimentConfig& cfg, const RunFlags& flags) {
  SolveOptions o;
  o.tol_fix = cfg.tol_fix;
  o.max_iter = cfg.max_iter;
  o.threads = flags.threads;
  return o;
}

inline json validation_json(const ValidationReport& r) {
  return {{"delta_measured", r.delta_measured}, {"Delta_measured", r.Delta_measured},
          {"lambda_min", r.lambda_min},         {"lambda_max", r.lambda_max},
          {"min_hessian", r.min_hessian},       {"growth_ratio", r.growth_ratio}};
}

inline json measure_json(const DiscreteMeasure& m, const CostGraph& g) {
  const auto mu = m.node_marginal(g);
  json support = json::array(), marginal = json::array();
  for (std::size_t i : m.support_nodes(g)) {
    support.push_back(i);
    marginal.push_back(mu[i]);
  }
  return {{"mass", m.total_mass()},
          {"objective", m.objective(g)},
          {"conservation_defect", m.conservation_defect(g)},
          {"closedness_defect", m.closedness_defect(g)},
          {"support_nodes", support},
          {"node_marginal", marginal}};
}

inline json classes_json(const std::vector<std::vector<std::size_t>>& classes) {
  json out = json::array();
  for (const auto& c : classes) out.push_back(c);
  return out;
}

inline Outputs cmd_validate(const ExperimentConfig& cfg, const RunFlags&) {
  Outputs out;
  const CostGraph g = cfg.graph();
  if (!cfg.synthetic) out.summary["validation"] = validation_json(validate_model(cfg.model));
  std::size_t min_out = g.edge_count(), max_out = 0;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    min_out = std::min(min_out, g.out_edges(i).size());
    max_out = std::max(max_out, g.out_edges(i).size());
  }
  out.summary["graph"] = {{"nodes", g.node_count()},
                          {"edges", g.edge_count()},
                          {"min_out_degree", min_out},
                          {"max_out_degree", max_out},
                          {"strongly_connected", strongly_connected(g)},
                          {"max_coupling_slope", g.max_coupling_slope()}};
  out.csv = coord_header(cfg) + ",W,lambda,kappa\n";
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const double W = cfg.synthetic ? 0.0 : cfg.model.potential(g.coord(i));
    out.csv += coord_cells(cfg, g, i) + "," + fmt(W) + "," + fmt(g.coupling(i).lambda) + "," +
               fmt(g.coupling(i).kappa) + "\n";
  }
  return out;
}

inline Outputs cmd_critical(const ExperimentConfig& cfg, const RunFlags& flags) {
  Outputs out;
  const CostGraph g = cfg.graph();
  const Tolerances tol = cfg.tolerances(g);
  const Cycle cyc = karp_min_mean_cycle(g, flags.threads);
  const double c = -cyc.mean / g.dt();
  const auto potential = critical_potential(g, c, cyc);
  const auto aubry = discrete_aubry(g, potential, c, tol);
  const auto circ = cancel_cycles(g, cycle_measure(g, cyc.edges));
  out.summary["c"] = c;
  out.summary["min_cycle_mean"] = cyc.mean;
  out.summary["cycle_nodes"] = cyc.nodes;
  out.summary["aubry_nodes"] = aubry;
  out.summary["circulation_objective"] = circ.objective(g);
  out.summary["subsolution_defect"] = subsolution_defect(potential, g, c);
  if (flags.value_iteration) {
    const std::size_t steps = cfg.options.value_iteration_steps.value_or(20 * g.node_count());
    const auto est = critical_value_iteration(g, steps, flags.threads);
    out.summary["value_iteration"] = {
        {"steps", est.iterations}, {"c", est.c}, {"c_lower", est.c_lower}, {"c_upper", est.c_upper}};
  }
  std::vector<char> in_aubry(g.node_count(), 0);
  for (std::size_t i : aubry) in_aubry[i] = 1;
  const auto mu = cycle_measure(g, cyc.edges).node_marginal(g);
  out.csv = coord_header(cfg) + ",potential,aubry,mather_marginal\n";
  for (std::size_t i = 0; i < g.node_count(); ++i)
    out.csv += coord_cells(cfg, g, i) + "," + fmt(potential[i]) + "," + std::to_string(int(in_aubry[i])) + "," +
               fmt(mu[i]) + "\n";
  return out;
}

inline Outputs cmd_solve(const ExperimentConfig& cfg, const RunFlags& flags) {
  if (cfg.eps_list.empty()) config_error("missing key eps_list");
  Outputs out;
  const CostGraph g = cfg.graph();
  const double c = critical_value(g, flags.threads);
  out.summary["c"] = c;
  json runs = json::array();
  std::vector<ValueField> fields;
  for (double e : cfg.eps_list) {
    fields.push_back(solve_contact(g, c, e, solve_options(cfg, flags)));
    const auto& f = fields.back();
    runs.push_back({{"eps", e},
                    {"iterations", f.iterations},
                    {"final_change", f.final_change},
                    {"sup_norm", f.sup_norm()},
                    {"lipschitz", discrete_lipschitz(f.u, g)}});
  }
  out.summary["runs"] = runs;
  out.csv = coord_header(cfg);
  for (std::size_t k = 0; k < fields.size(); ++k) out.csv += ",u_eps_" + std::to_string(k);
  out.csv += "\n";
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    out.csv += coord_cells(cfg, g, i);
    for (const auto& f : fields) out.csv += "," + fmt(f.u[i]);
    out.csv += "\n";
  }
  return out;
}

inline Outputs cmd_barrier(const ExperimentConfig& cfg, const RunFlags& flags) {
  Outputs out;
  const CostGraph g = cfg.graph();
  const Tolerances tol = cfg.tolerances(g);
  const auto a = analyze_critical(g, tol, flags.threads, true);
  const std::size_t n = g.node_count();
  out.summary["c"] = a.c;
  out.summary["aubry_nodes"] = a.aubry;
  out.summary["classes"] = classes_json(a.classes);
  out.summary["class_count"] = a.classes.size();
  out.summary["potential_oscillation"] = potential_oscillation(a.barrier);
  auto pairs = cfg.options.pairs;
  if (pairs.empty()) pairs.push_back({0, n / 2});
  const std::size_t k_max = cfg.options.liminf_k_max.value_or(4 * n);
  json checks = json::array();
  for (const auto& [y, x] : pairs) {
    const double h = a.barrier.H(y, x);
    const double lim = liminf_check(g, a.c, y, x, k_max);
    checks.push_back({{"y", y}, {"x", x}, {"h", h}, {"liminf", lim}, {"agree", std::abs(h - lim) <= tol.tol_osc}});
  }
  out.summary["liminf_checks"] = checks;
  out.csv = "y,x,h,phi\n";
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t x = 0; x < n; ++x)
      out.csv += std::to_string(y) + "," + std::to_string(x) + "," + fmt(a.barrier.H(y, x)) + "," +
                 fmt(a.barrier.Phi(y, x)) + "\n";
  return out;
}

inline Outputs cmd_mather(const ExperimentConfig& cfg, const RunFlags& flags) {
  Outputs out;
  const CostGraph g = cfg.graph();
  const Tolerances tol = cfg.tolerances(g);
  const auto a = analyze_critical(g, tol, flags.threads, false);
  out.summary["c"] = a.c;
  json list = json::array();
  for (const auto& m : a.measures) list.push_back(measure_json(m, g));
  out.summary["measures"] = list;
  out.summary["circulation"] = measure_json(a.circulation, g);
  out.csv = "measure,from,to,weight\n";
  for (std::size_t k = 0; k < a.measures.size(); ++k)
    for (std::size_t id : a.measures[k].support_edges())
      out.csv += std::to_string(k) + "," + std::to_string(g.edge(id).from) + "," + std::to_string(g.edge(id).to) +
                 "," + fmt(a.measures[k].weight[id]) + "\n";
  return out;
}

inline json sweep_json(const SweepResult& s) {
  json runs = json::array();
  for (std::size_t k = 0; k < s.eps.size(); ++k)
    runs.push_back({{"eps", s.eps[k]},
                    {"iterations", s.fields[k].iterations},
                    {"sup_norm", s.sup_norms[k]},
                    {"lipschitz", s.lipschitz[k]}});
  return {{"runs", runs}, {"gaps", s.gaps}};
}

inline double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline Outputs cmd_vanish(const ExperimentConfig& cfg, const RunFlags& flags) {
  if (cfg.eps_list.empty()) config_error("missing key eps_list");
  Outputs out;
  const CostGraph g = cfg.graph();
  const Tolerances tol = cfg.tolerances(g);
  const auto a = analyze_critical(g, tol, flags.threads, true);
  const auto s = sweep(g, a.c, cfg.eps_list, solve_options(cfg, flags));
  const auto weighted = selection_inf(a.barrier, a.measures, g, true);
  const auto unweighted = selection_inf(a.barrier, a.measures, g, false);
  const auto member = check_membership(s.u0_direct, a.measures, g, a.c, tol.tol_sub, tol.tol_con);
  const double K = potential_oscillation(a.barrier);

  out.summary["c"] = a.c;
  out.summary["class_count"] = a.classes.size();
  out.summary["measure_count"] = a.measures.size();
  out.summary["sweep"] = sweep_json(s);
  out.summary["bounds"] = {{"sup_norm", K}, {"lipschitz", lipschitz_bound(g, a.c, K)}};
  out.summary["norms"] = {{"u0_direct_vs_weighted", sup_diff(s.u0_direct, weighted.u_hat)},
                          {"u0_direct_vs_unweighted", sup_diff(s.u0_direct, unweighted.u_hat)},
                          {"weighted_vs_unweighted", sup_diff(weighted.u_hat, unweighted.u_hat)},
                          {"u_smallest_vs_u0_direct", sup_diff(s.u_smallest, s.u0_direct)}};
  out.summary["membership"] = {{"subsolution_defect", member.defect},
                               {"constraints", member.constraints},
                               {"threshold", member.threshold},
                               {"pass", member.pass}};
  out.summary["witness_excess"] = witness_excess(a.barrier, a.measures, weighted.u_hat, s.u0_direct, g);
  if (cfg.options.occupation_start) {
    json occ = json::array();
    for (std::size_t k = 0; k < s.eps.size(); ++k) {
      const auto r = occupation_measure(s.fields[k].u, g, a.c, s.eps[k], *cfg.options.occupation_start,
                                        occupation_horizon(g, s.eps[k]));
      occ.push_back({{"eps", s.eps[k]},
                     {"horizon", r.horizon},
                     {"closedness", r.closedness},
                     {"action_gap", r.action_gap},
                     {"saturated", r.saturated}});
    }
    out.summary["occupation"] = occ;
  }

  out.csv = coord_header(cfg);
  for (std::size_t k = 0; k < s.eps.size(); ++k) out.csv += ",u_eps_" + std::to_string(k);
  out.csv += ",u0_direct,u0_formula_weighted,u0_formula_unweighted\n";
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    out.csv += coord_cells(cfg, g, i);
    for (const auto& f : s.fields) out.csv += "," + fmt(f.u[i]);
    out.csv += "," + fmt(s.u0_direct[i]) + "," + fmt(weighted.u_hat[i]) + "," + fmt(unweighted.u_hat[i]) + "\n";
  }
  return out;
}

inline Outputs cmd_compare(const ExperimentConfig& cfg, const RunFlags& flags) {
  if (cfg.eps_list.empty()) config_error("missing key eps_list");
  Outputs out;
  const CostGraph gG = cfg.graph();
  const CostGraph gF = with_discount_coupling(gG);
  const Tolerances tol = cfg.tolerances(gG);
  const auto a = analyze_critical(gG, tol, flags.threads, true);
  const auto r = compare_discounted_contact(gF, gG, a.c, a.barrier, a.measures, cfg.eps_list,
                                            solve_options(cfg, flags), cfg.options.gap_threshold.value_or(0.0));
  out.summary["c"] = a.c;
  json gaps = json::object();
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t k = i + 1; k < 4; ++k)
      gaps[std::string(CompareReport::kNames[i]) + "_vs_" + CompareReport::kNames[k]] = r.gaps[i][k];
  out.summary["gaps"] = gaps;
  double zero = 0.0;
  for (const auto& f : r.fields)
    for (double v : f) zero = std::max(zero, std::abs(v));
  out.summary["max_abs_value"] = zero;
  out.summary["max_gap"] = r.max_gap;
  out.summary["threshold"] = r.threshold;
  out.summary["gap_detected"] = r.gap_detected;
  out.summary["finding"] = r.gap_detected ? "gap detected" : "no gap detected";
  out.summary["sweep_F"] = sweep_json(r.sweepF);
  out.summary["sweep_G"] = sweep_json(r.sweepG);
  out.csv = coord_header(cfg);
  for (const char* name : CompareReport::kNames) out.csv += std::string(",") + name;
  out.csv += "\n";
  for (std::size_t i = 0; i < gG.node_count(); ++i) {
    out.csv += coord_cells(cfg, gG, i);
    for (const auto& f : r.fields) out.csv += "," + fmt(f[i]);
    out.csv += "\n";
  }
  return out;
}

using Command = std::function<Outputs(const ExperimentConfig&, const RunFlags&)>;

inline const std::map<std::string, Command>& commands() {
  static const std::map<std::string, Command> table{
      {"validate", cmd_validate}, {"critical", cmd_critical}, {"solve", cmd_solve},  {"barrier", cmd_barrier},
      {"mather", cmd_mather},     {"vanish", cmd_vanish},     {"compare", cmd_compare}};
  return table;
}

/// Edge list (i, j, displacement..., cost) for --dump-graph.
inline std::string graph_csv(const CostGraph& g) {
  std::string s = g.dim() == 2 ? "from,to,dx,dy,cost\n" : "from,to,d,cost\n";
  for (const auto& e : g.edges()) {
    s += std::to_string(e.from) + "," + std::to_string(e.to) + "," + fmt(e.disp[0]);
    if (g.dim() == 2) s += "," + fmt(e.disp[1]);
    s += "," + fmt(e.cost) + "\n";
  }
  return s;
}

}  // namespace wkam::cli
