#pragma once

// The eps = 0 pipeline: critical value, a critical potential, the discrete
// Aubry set, its classes, the barrier matrix and the Mather measures.

#include <set>
#include <vector>

#include "weakkam/barrier.hpp"
#include "weakkam/critical.hpp"
#include "weakkam/tolerances.hpp"

namespace wkam {

struct CriticalAnalysis {
  double c = 0.0;
  Cycle karp;
  std::vector<double> potential;
  std::vector<std::size_t> aubry;
  std::vector<std::vector<std::size_t>> classes;
  BarrierMatrix barrier;
  std::vector<DiscreteMeasure> measures;  // extreme measures plus the circulation optimum
  DiscreteMeasure circulation;
};

inline CriticalAnalysis analyze_critical(const CostGraph& g, const Tolerances& tol, std::size_t threads = 1,
                                         bool with_barrier = true) {
  CriticalAnalysis a;
  a.karp = karp_min_mean_cycle(g, threads);
  a.c = -a.karp.mean / g.dt();
  a.potential = critical_potential(g, a.c, a.karp);
  a.aubry = discrete_aubry(g, a.potential, a.c, tol);
  a.circulation = cancel_cycles(g, cycle_measure(g, a.karp.edges));
  a.measures = enumerate_extreme_measures(g, a.potential, a.c, tol, {}, threads);
  std::set<std::vector<std::size_t>> seen;
  for (const auto& m : a.measures) seen.insert(m.support_edges());
  if (!seen.count(a.circulation.support_edges())) a.measures.push_back(a.circulation);
  if (with_barrier) {
    a.barrier = peierls_matrix(g, a.c, a.aubry, tol.tol_tight, threads);
    a.classes = aubry_classes(a.barrier, a.aubry, tol.tol_class);
  }
  return a;
}

}  // namespace wkam
