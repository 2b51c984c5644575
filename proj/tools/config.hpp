#pragma once

// Experiment configuration: JSON document -> resolved config -> model/graph.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "weakkam/weakkam.hpp"

namespace wkam::cli {

using json = nlohmann::json;

inline void config_error(const std::string& what) { throw Error(ErrorKind::Config, what); }

inline void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) config_error(where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!ok.count(it.key())) config_error("unknown key " + (where.empty() ? "" : where + ".") + it.key());
}

inline const json& require(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key)) config_error("missing key " + (where.empty() ? "" : where + ".") + key);
  return obj.at(key);
}

inline double number(const json& v, const std::string& name) {
  if (!v.is_number()) config_error(name + " must be a number");
  return v.get<double>();
}

inline long integer(const json& v, const std::string& name) {
  if (!v.is_number_integer()) config_error(name + " must be an integer");
  return v.get<long>();
}

inline std::vector<double> number_list(const json& v, const std::string& name) {
  if (!v.is_array()) config_error(name + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) out.push_back(number(x, name));
  return out;
}

inline TrigPoly parse_poly(const json& v, const std::string& name) {
  if (v.is_number()) return TrigPoly::constant(v.get<double>());
  reject_unknown(v, name, {"a", "b"});
  TrigPoly p;
  p.a = v.contains("a") ? number_list(v.at("a"), name + ".a") : std::vector<double>{0.0};
  if (p.a.empty()) p.a = {0.0};
  if (v.contains("b")) p.b = number_list(v.at("b"), name + ".b");
  return p;
}

inline json poly_json(const TrigPoly& p) { return json{{"a", p.a}, {"b", p.b}}; }

struct Options {
  std::optional<std::size_t> occupation_start;
  std::optional<std::size_t> liminf_k_max;
  std::vector<std::array<std::size_t, 2>> pairs;
  std::optional<std::size_t> value_iteration_steps;
  std::optional<double> gap_threshold;
};

struct ExperimentConfig {
  bool synthetic = false;
  LagrangianModel model;
  TorusGrid grid;
  // synthetic graph
  std::size_t nodes = 0;
  double dt = 1.0;
  std::vector<SyntheticEdge> edges;
  std::vector<NodeCoupling> coupling;

  std::optional<double> tol_sub, tol_tight, tol_class, tol_con, tol_osc;
  double tol_fix = 1e-10;
  std::size_t max_iter = 1000000;
  std::vector<double> eps_list;
  Options options;
  std::string output_dir = ".";

  Tolerances tolerances(const CostGraph& g) const {
    Tolerances t = Tolerances::defaults(g);
    if (tol_sub) t.tol_sub = *tol_sub;
    if (tol_tight) t.tol_tight = *tol_tight;
    if (tol_class) t.tol_class = *tol_class;
    if (tol_con) t.tol_con = *tol_con;
    if (tol_osc) t.tol_osc = *tol_osc;
    return t;
  }

  CostGraph graph() const {
    return synthetic ? make_synthetic_graph(nodes, dt, edges, coupling) : build_cost_graph(model, grid);
  }
};

inline Family parse_family(const std::string& s) {
  if (s == "mechanical") return Family::Mechanical;
  if (s == "drift") return Family::Drift;
  if (s == "mechanical_drift") return Family::MechanicalDrift;
  config_error("model.family must be mechanical, drift or mechanical_drift (got " + s + ")");
  return Family::Mechanical;
}

inline const char* family_name(Family f) {
  switch (f) {
    case Family::Mechanical: return "mechanical";
    case Family::Drift: return "drift";
    case Family::MechanicalDrift: return "mechanical_drift";
  }
  return "";
}

inline void parse_coupling_kind(const json& c, Coupling& out) {
  const std::string kind = require(c, "model.coupling", "kind").get<std::string>();
  if (kind == "linear") out.kind = CouplingKind::Linear;
  else if (kind == "saturating") out.kind = CouplingKind::Saturating;
  else config_error("model.coupling.kind must be linear or saturating (got " + kind + ")");
}

inline ExperimentConfig parse_config(const json& doc) {
  ExperimentConfig cfg;
  reject_unknown(doc, "", {"model", "grid", "synthetic", "solver", "eps_list", "options", "output_dir"});
  if (doc.contains("synthetic")) {
    if (doc.contains("model") || doc.contains("grid")) config_error("synthetic excludes model and grid blocks");
    const json& s = doc.at("synthetic");
    reject_unknown(s, "synthetic", {"nodes", "dt", "edges", "lambda", "kappa", "delta", "Delta"});
    cfg.synthetic = true;
    const long nodes = integer(require(s, "synthetic", "nodes"), "synthetic.nodes");
    if (nodes < 1) config_error("synthetic.nodes must be >= 1");
    cfg.nodes = std::size_t(nodes);
    cfg.dt = number(require(s, "synthetic", "dt"), "synthetic.dt");
    if (!(cfg.dt > 0.0)) config_error("synthetic.dt must be positive");
    const json& edges = require(s, "synthetic", "edges");
    if (!edges.is_array()) config_error("synthetic.edges must be an array");
    for (const auto& e : edges) {
      if (!e.is_array() || e.size() != 3) config_error("synthetic.edges entries are [from, to, cost]");
      const long a = integer(e[0], "synthetic.edges"), b = integer(e[1], "synthetic.edges");
      if (a < 0 || b < 0 || a >= nodes || b >= nodes) config_error("synthetic.edges node out of range");
      cfg.edges.push_back({std::size_t(a), std::size_t(b), number(e[2], "synthetic.edges")});
    }
    const auto lambda = number_list(require(s, "synthetic", "lambda"), "synthetic.lambda");
    if (lambda.size() != cfg.nodes) config_error("synthetic.lambda needs one entry per node");
    const double kappa = s.contains("kappa") ? number(s.at("kappa"), "synthetic.kappa") : 0.0;
    const double delta = number(require(s, "synthetic", "delta"), "synthetic.delta");
    const double Delta = number(require(s, "synthetic", "Delta"), "synthetic.Delta");
    for (double l : lambda) {
      if (!(l > 0.0) || l < delta || l > Delta) {
        std::ostringstream msg;
        msg << "synthetic lambda " << l << " outside declared [" << delta << ", " << Delta << "]";
        throw Error(ErrorKind::ModelViolation, msg.str());
      }
      cfg.coupling.push_back(NodeCoupling{l, kappa});
    }
    cfg.model.delta = delta;
    cfg.model.Delta = Delta;
    cfg.model.coupling.kappa = kappa;
  } else {
    const json& m = require(doc, "", "model");
    reject_unknown(m, "model", {"family", "dim", "W", "V", "coupling", "delta", "Delta"});
    cfg.model.family = parse_family(require(m, "model", "family").get<std::string>());
    const long dim = integer(require(m, "model", "dim"), "model.dim");
    if (dim != 1 && dim != 2) config_error("model.dim must be 1 or 2");
    cfg.model.dim = int(dim);
    if (cfg.model.family != Family::Drift) cfg.model.W = parse_poly(require(m, "model", "W"), "model.W");
    else if (m.contains("W")) config_error("model.W is not used by the drift family");
    if (cfg.model.family != Family::Mechanical) {
      const json& V = require(m, "model", "V");
      if (!V.is_array() || V.size() != std::size_t(dim)) config_error("model.V needs one polynomial per dimension");
      for (long d = 0; d < dim; ++d) cfg.model.V[std::size_t(d)] = parse_poly(V[std::size_t(d)], "model.V");
    } else if (m.contains("V")) {
      config_error("model.V is not used by the mechanical family");
    }
    if (m.contains("coupling")) {
      const json& c = m.at("coupling");
      reject_unknown(c, "model.coupling", {"kind", "lambda", "kappa"});
      parse_coupling_kind(c, cfg.model.coupling);
      cfg.model.coupling.lambda = parse_poly(require(c, "model.coupling", "lambda"), "model.coupling.lambda");
      if (cfg.model.coupling.kind == CouplingKind::Saturating)
        cfg.model.coupling.kappa = number(require(c, "model.coupling", "kappa"), "model.coupling.kappa");
      else if (c.contains("kappa"))
        config_error("model.coupling.kappa is only used by the saturating coupling");
    }
    cfg.model.delta = number(require(m, "model", "delta"), "model.delta");
    cfg.model.Delta = number(require(m, "model", "Delta"), "model.Delta");

    const json& g = require(doc, "", "grid");
    reject_unknown(g, "grid", {"dim", "n", "dt", "vmax"});
    const long gdim = integer(require(g, "grid", "dim"), "grid.dim");
    const long n = integer(require(g, "grid", "n"), "grid.n");
    const double dt = number(require(g, "grid", "dt"), "grid.dt");
    const double vmax = number(require(g, "grid", "vmax"), "grid.vmax");
    if (gdim != dim) config_error("grid.dim must equal model.dim");
    cfg.grid = build_grid(int(gdim), int(n), dt, vmax);
  }

  if (doc.contains("solver")) {
    const json& s = doc.at("solver");
    reject_unknown(s, "solver", {"tol_fix", "max_iter", "tol_sub", "tol_tight", "tol_class", "tol_con", "tol_osc"});
    auto positive = [&](const char* key) -> std::optional<double> {
      if (!s.contains(key)) return std::nullopt;
      const double v = number(s.at(key), std::string("solver.") + key);
      if (!(v > 0.0)) config_error(std::string("solver.") + key + " must be positive");
      return v;
    };
    if (auto v = positive("tol_fix")) cfg.tol_fix = *v;
    if (s.contains("max_iter")) {
      const long it = integer(s.at("max_iter"), "solver.max_iter");
      if (it < 1) config_error("solver.max_iter must be >= 1");
      cfg.max_iter = std::size_t(it);
    }
    cfg.tol_sub = positive("tol_sub");
    cfg.tol_tight = positive("tol_tight");
    cfg.tol_class = positive("tol_class");
    cfg.tol_con = positive("tol_con");
    cfg.tol_osc = positive("tol_osc");
  }
  if (doc.contains("eps_list")) {
    cfg.eps_list = number_list(doc.at("eps_list"), "eps_list");
    for (std::size_t k = 0; k < cfg.eps_list.size(); ++k) {
      if (!(cfg.eps_list[k] > 0.0)) config_error("eps_list entries must be positive");
      if (k > 0 && !(cfg.eps_list[k] < cfg.eps_list[k - 1])) config_error("eps_list must be strictly decreasing");
    }
  }
  const std::size_t node_count = cfg.synthetic ? cfg.nodes : cfg.grid.node_count();
  auto node = [&](const json& v, const std::string& name) {
    const long k = integer(v, name);
    if (k < 0 || std::size_t(k) >= node_count) config_error(name + " out of range");
    return std::size_t(k);
  };
  if (doc.contains("options")) {
    const json& o = doc.at("options");
    reject_unknown(o, "options", {"occupation_start", "liminf_k_max", "pairs", "value_iteration_steps", "gap_threshold"});
    if (o.contains("occupation_start")) cfg.options.occupation_start = node(o.at("occupation_start"), "options.occupation_start");
    if (o.contains("liminf_k_max")) {
      const long k = integer(o.at("liminf_k_max"), "options.liminf_k_max");
      if (k < long(node_count)) config_error("options.liminf_k_max must be >= node count");
      cfg.options.liminf_k_max = std::size_t(k);
    }
    if (o.contains("pairs")) {
      if (!o.at("pairs").is_array()) config_error("options.pairs must be an array of [y, x]");
      for (const auto& p : o.at("pairs")) {
        if (!p.is_array() || p.size() != 2) config_error("options.pairs entries are [y, x]");
        cfg.options.pairs.push_back({node(p[0], "options.pairs"), node(p[1], "options.pairs")});
      }
    }
    if (o.contains("value_iteration_steps")) {
      const long k = integer(o.at("value_iteration_steps"), "options.value_iteration_steps");
      if (k < 1) config_error("options.value_iteration_steps must be >= 1");
      cfg.options.value_iteration_steps = std::size_t(k);
    }
    if (o.contains("gap_threshold")) {
      const double v = number(o.at("gap_threshold"), "options.gap_threshold");
      if (!(v > 0.0)) config_error("options.gap_threshold must be positive");
      cfg.options.gap_threshold = v;
    }
  }
  if (doc.contains("output_dir")) cfg.output_dir = doc.at("output_dir").get<std::string>();
  return cfg;
}

/// The config with every default filled in. The output directory is left
/// out so that results do not depend on where they are written.
inline json resolved_json(const ExperimentConfig& cfg) {
  const CostGraph g = cfg.graph();
  const Tolerances t = cfg.tolerances(g);
  json out;
  if (cfg.synthetic) {
    json edges = json::array();
    for (const auto& e : cfg.edges) edges.push_back(json::array({e.from, e.to, e.cost}));
    std::vector<double> lambda;
    for (const auto& c : cfg.coupling) lambda.push_back(c.lambda);
    out["synthetic"] = {{"nodes", cfg.nodes}, {"dt", cfg.dt}, {"edges", edges}, {"lambda", lambda},
                        {"kappa", cfg.model.coupling.kappa}, {"delta", cfg.model.delta},
                        {"Delta", cfg.model.Delta}};
  } else {
    const auto& m = cfg.model;
    json model{{"family", family_name(m.family)}, {"dim", m.dim}, {"delta", m.delta}, {"Delta", m.Delta}};
    if (m.family != Family::Drift) model["W"] = poly_json(m.W);
    if (m.family != Family::Mechanical) {
      json V = json::array();
      for (int d = 0; d < m.dim; ++d) V.push_back(poly_json(m.V[std::size_t(d)]));
      model["V"] = V;
    }
    json coupling{{"kind", m.coupling.kind == CouplingKind::Linear ? "linear" : "saturating"},
                  {"lambda", poly_json(m.coupling.lambda)}};
    if (m.coupling.kind == CouplingKind::Saturating) coupling["kappa"] = m.coupling.kappa;
    model["coupling"] = coupling;
    out["model"] = model;
    out["grid"] = {{"dim", cfg.grid.dim}, {"n", cfg.grid.n}, {"dt", cfg.grid.dt}, {"vmax", cfg.grid.vmax}};
  }
  out["solver"] = {{"tol_fix", cfg.tol_fix}, {"max_iter", cfg.max_iter}, {"tol_sub", t.tol_sub},
                   {"tol_tight", t.tol_tight}, {"tol_class", t.tol_class}, {"tol_con", t.tol_con},
                   {"tol_osc", t.tol_osc}};
  out["eps_list"] = cfg.eps_list;
  json opts = json::object();
  if (cfg.options.occupation_start) opts["occupation_start"] = *cfg.options.occupation_start;
  if (cfg.options.liminf_k_max) opts["liminf_k_max"] = *cfg.options.liminf_k_max;
  if (!cfg.options.pairs.empty()) opts["pairs"] = cfg.options.pairs;
  if (cfg.options.value_iteration_steps) opts["value_iteration_steps"] = *cfg.options.value_iteration_steps;
  if (cfg.options.gap_threshold) opts["gap_threshold"] = *cfg.options.gap_threshold;
  out["options"] = opts;
  return out;
}

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string config_hash(const json& resolved) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(resolved.dump())));
  return buf;
}

inline json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot read config file " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    config_error(std::string("malformed config: ") + e.what());
  }
  return {};
}

}  // namespace wkam::cli
