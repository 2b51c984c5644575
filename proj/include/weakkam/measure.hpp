#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "weakkam/grid.hpp"

namespace wkam {

/// Nonnegative weights on the edges of a CostGraph (indexed by edge id).
/// Closed (Mather candidate) measures are flow-conserving with unit mass.
struct DiscreteMeasure {
  std::vector<double> weight;

  double total_mass() const {
    double s = 0.0;
    for (double w : weight) s += w;
    return s;
  }

  /// mu_i = sum of weights leaving node i.
  std::vector<double> node_marginal(const CostGraph& g) const {
    std::vector<double> mu(g.node_count(), 0.0);
    for (std::size_t k = 0; k < weight.size(); ++k) mu[g.edge(k).from] += weight[k];
    return mu;
  }

  /// Mean outgoing velocity per supported node; zero elsewhere.
  std::vector<Vec> mean_velocity(const CostGraph& g) const {
    std::vector<Vec> v(g.node_count(), Vec{0.0, 0.0});
    const auto mu = node_marginal(g);
    for (std::size_t k = 0; k < weight.size(); ++k) {
      const auto& e = g.edge(k);
      v[e.from][0] += weight[k] * e.vel[0];
      v[e.from][1] += weight[k] * e.vel[1];
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (mu[i] > 0.0) {
        v[i][0] /= mu[i];
        v[i][1] /= mu[i];
      }
    }
    return v;
  }

  /// max_i |inflow_i - outflow_i|.
  double conservation_defect(const CostGraph& g) const {
    std::vector<double> bal(g.node_count(), 0.0);
    for (std::size_t k = 0; k < weight.size(); ++k) {
      bal[g.edge(k).from] -= weight[k];
      bal[g.edge(k).to] += weight[k];
    }
    double m = 0.0;
    for (double b : bal) m = std::max(m, std::abs(b));
    return m;
  }

  /// sum_e m_e c0_e (the discrete action of the measure).
  double objective(const CostGraph& g) const {
    double s = 0.0;
    for (std::size_t k = 0; k < weight.size(); ++k) s += weight[k] * g.edge(k).cost;
    return s;
  }

  /// max over phi in {cos(k x_d)/k, sin(k x_d)/k : k <= harmonics} of
  /// |sum_e m_e <grad phi(x_e), v_e>| with x_e the midpoint of the edge.
  /// Test functions are scaled so that |grad phi| <= 1.
  double closedness_defect(const CostGraph& g, int harmonics = 3) const {
    double worst = 0.0;
    for (int d = 0; d < g.dim(); ++d) {
      for (int k = 1; k <= harmonics; ++k) {
        double sc = 0.0, ss = 0.0;
        for (std::size_t id = 0; id < weight.size(); ++id) {
          if (weight[id] == 0.0) continue;
          const auto& e = g.edge(id);
          const double mid = g.coord(e.from)[d] + 0.5 * e.disp[d];
          sc += weight[id] * -std::sin(k * mid) * e.vel[d];
          ss += weight[id] * std::cos(k * mid) * e.vel[d];
        }
        worst = std::max({worst, std::abs(sc), std::abs(ss)});
      }
    }
    return worst;
  }

  std::vector<std::size_t> support_edges() const {
    std::vector<std::size_t> s;
    for (std::size_t k = 0; k < weight.size(); ++k)
      if (weight[k] > 0.0) s.push_back(k);
    return s;
  }

  std::vector<std::size_t> support_nodes(const CostGraph& g) const {
    const auto mu = node_marginal(g);
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < mu.size(); ++i)
      if (mu[i] > 0.0) s.push_back(i);
    return s;
  }
};

/// Uniform occupation measure of a closed walk given by its edge ids.
inline DiscreteMeasure cycle_measure(const CostGraph& g, std::span<const std::size_t> cycle_edges) {
  DiscreteMeasure m;
  m.weight.assign(g.edge_count(), 0.0);
  const double w = 1.0 / double(cycle_edges.size());
  for (std::size_t id : cycle_edges) m.weight[id] += w;
  return m;
}

}  // namespace wkam
