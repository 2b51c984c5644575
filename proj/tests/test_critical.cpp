#include <gtest/gtest.h>

#include <random>

#include "models.hpp"

using namespace wkam;
using namespace wkam::testing;

namespace {

CostGraph synthetic(std::size_t n, std::vector<SyntheticEdge> edges) {
  return make_synthetic_graph(n, 1.0, edges, std::vector<NodeCoupling>(n));
}

CostGraph random_graph(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> cost(-1.0, 1.0), coin(0.0, 1.0);
  std::vector<SyntheticEdge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (coin(rng) < 0.3) edges.push_back({i, j, cost(rng)});
  // A Hamiltonian ring keeps the graph strongly connected.
  for (std::size_t i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n, cost(rng)});
  return synthetic(n, edges);
}

void check_measure_invariants(const DiscreteMeasure& m, const CostGraph& g) {
  EXPECT_NEAR(m.total_mass(), 1.0, 1e-12);
  EXPECT_LE(m.conservation_defect(g), 1e-10);
  for (double w : m.weight) EXPECT_GE(w, 0.0);
}

}  // namespace

TEST(Karp, SingleSelfLoop) {
  const auto g = synthetic(1, {{0, 0, 0.4}});
  const auto c = karp_min_mean_cycle(g);
  EXPECT_NEAR(c.mean, 0.4, 1e-15);
  EXPECT_EQ(c.nodes, std::vector<std::size_t>{0});
}

TEST(Karp, TwoCycleWithoutLoops) {
  EXPECT_NEAR(karp_min_mean_cycle(synthetic(2, {{0, 1, -1.0}, {1, 0, 0.5}})).mean, -0.25, 1e-15);
}

TEST(Karp, SelfLoopBeatsTwoCycle) {
  const auto c = karp_min_mean_cycle(synthetic(2, {{0, 1, 1.0}, {1, 0, 3.0}, {1, 1, 1.5}}));
  EXPECT_NEAR(c.mean, 1.5, 1e-15);
  EXPECT_EQ(c.nodes, std::vector<std::size_t>{1});
}

TEST(Karp, MatchesExhaustiveEnumeration) {
  std::mt19937_64 rng(2024);
  for (int seed = 0; seed < 200; ++seed) {
    const std::size_t n = 2 + std::size_t(rng() % 11);
    const auto g = random_graph(rng, n);
    const double exact = brute_force_min_mean(g);
    const auto cyc = karp_min_mean_cycle(g);
    EXPECT_NEAR(cyc.mean, exact, 1e-9) << "seed " << seed;
    EXPECT_NEAR(cycle_mean(g, cyc.edges), cyc.mean, 1e-12);
    const auto circ = cancel_cycles(g, first_cycle_measure(g));
    EXPECT_NEAR(circ.objective(g), exact, 1e-9) << "seed " << seed;
    check_measure_invariants(circ, g);
  }
}

TEST(Karp, ThreadCountDoesNotChangeTheCycle) {
  const auto g = drift_graph(200);
  const auto a = karp_min_mean_cycle(g, 1), b = karp_min_mean_cycle(g, 4);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.edges, b.edges);
}

TEST(CriticalValue, Pendulum) { EXPECT_NEAR(critical_value(pendulum(), build_grid(1, 200, 0.05, 3.0)), 0.0, 2e-2); }

TEST(CriticalValue, ConstantPotential) {
  EXPECT_NEAR(critical_value(constant_potential(0.7), build_grid(1, 200, 0.05, 3.0)), -0.7, 1e-9);
}

TEST(CriticalValue, DriftFlow) { EXPECT_NEAR(critical_value(drift_graph()), 0.0, 2e-2); }

TEST(CriticalValue, ValueIterationBracketsKarp) {
  const auto g = grid_graph(double_well(), 100, 0.05);
  const double c = critical_value(g);
  const auto est = critical_value_iteration(g, 4000);
  EXPECT_LE(est.c_lower, c + 1e-9);
  EXPECT_GE(est.c_upper, c - 1e-9);
  EXPECT_NEAR(est.c, c, 1e-3);
}

TEST(TightSubgraph, PendulumLoops) {
  const auto g = grid_graph(pendulum(), 200, 0.05);
  const auto tol = Tolerances::defaults(g);
  const auto cyc = karp_min_mean_cycle(g);
  const double c = -cyc.mean / g.dt();
  const auto u = critical_potential(g, c, cyc);
  const auto tight = tight_subgraph(g, u, c, tol);
  auto loop_tight = [&](std::size_t node) {
    for (std::size_t id : tight)
      if (g.edge(id).from == node && g.edge(id).to == node) return true;
    return false;
  };
  EXPECT_TRUE(loop_tight(0));
  EXPECT_FALSE(loop_tight(100));
}

TEST(TightSubgraph, ConstantPotentialLoopsAllTight) {
  const auto g = grid_graph(constant_potential(0.7), 64, 0.05);
  const auto cyc = karp_min_mean_cycle(g);
  const double c = -cyc.mean / g.dt();
  const std::vector<double> u(g.node_count(), 0.0);
  const auto tight = tight_subgraph(g, u, c, Tolerances::defaults(g));
  std::size_t loops = 0;
  for (std::size_t id : tight) loops += g.edge(id).from == g.edge(id).to;
  EXPECT_EQ(loops, g.node_count());
}

TEST(TightSubgraph, RejectsNonSubsolution) {
  const auto g = grid_graph(pendulum(), 50, 0.1);
  std::vector<double> u(g.node_count(), 0.0);
  u[10] = 5.0;
  try {
    tight_subgraph(g, u, 0.0, Tolerances::defaults(g));
    FAIL() << "expected NotSubsolution";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotSubsolution);
  }
}

TEST(DiscreteAubry, PendulumIsTheBottom) {
  const auto g = grid_graph(pendulum(), 200, 0.05);
  const auto a = analyze_critical(g, Tolerances::defaults(g), 1, false);
  EXPECT_EQ(a.aubry, std::vector<std::size_t>{0});
}

TEST(DiscreteAubry, DoubleWellHasTwoClusters) {
  const auto g = grid_graph(double_well(), 200, 0.05);
  const auto a = analyze_critical(g, Tolerances::defaults(g), 1, false);
  EXPECT_EQ(a.aubry, (std::vector<std::size_t>{0, 100}));
}

TEST(DiscreteAubry, DriftCoversTheCircle) {
  const auto g = drift_graph();
  const auto a = analyze_critical(g, drift_tolerances(g), 1, false);
  EXPECT_EQ(a.aubry.size(), g.node_count());
}

TEST(MatherMeasure, PendulumPointMass) {
  const auto g = grid_graph(pendulum(), 200, 0.05);
  const auto m = mather_measure_karp(g);
  const auto s = m.support_edges();
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(g.edge(s[0]).from, 0u);
  EXPECT_EQ(g.edge(s[0]).to, 0u);
  EXPECT_NEAR(mather_measure_circulation(g).objective(g), 0.0, 1e-12);
}

TEST(MatherMeasure, ConstantPotentialFirstLoop) {
  const auto g = grid_graph(constant_potential(0.7), 64, 0.05);
  const auto s = mather_measure_karp(g).support_nodes(g);
  EXPECT_EQ(s, std::vector<std::size_t>{0});
}

TEST(MatherMeasure, DriftMarginalIsInverseSpeed) {
  // Density 1 / (T_p V) with period T_p = 2 pi / sqrt(2).
  const auto g = drift_graph();
  const auto m = mather_measure_karp(g);
  check_measure_invariants(m, g);
  const auto mu = m.node_marginal(g);
  const double Tp = kTwoPi / std::sqrt(2.0);
  // Compare cumulative distributions on [0, x).
  double emp = 0.0, exact = 0.0, worst = 0.0;
  const std::size_t n = g.node_count();
  const int sub = 64;
  for (std::size_t i = 0; i < n; ++i) {
    worst = std::max(worst, std::abs(emp - exact));
    emp += mu[i];
    for (int k = 0; k < sub; ++k) {
      const double x = (double(i) + (k + 0.5) / sub) * g.dx();
      exact += g.dx() / sub / (Tp * (1.5 + 0.5 * std::cos(x)));
    }
  }
  EXPECT_NEAR(exact, 1.0, 1e-6);
  EXPECT_LE(worst, 0.05);
  EXPECT_LE(m.closedness_defect(g), 10.0 * g.dx());
}

TEST(MatherMeasure, DoubleWellObjectiveUnique) {
  const auto g = grid_graph(double_well(), 200, 0.05);
  const auto a = analyze_critical(g, Tolerances::defaults(g), 1, false);
  ASSERT_EQ(a.measures.size(), 2u);
  DiscreteMeasure mix;
  mix.weight.assign(g.edge_count(), 0.0);
  for (std::size_t k = 0; k < g.edge_count(); ++k) mix.weight[k] = 0.3 * a.measures[0].weight[k] + 0.7 * a.measures[1].weight[k];
  EXPECT_NEAR(mix.objective(g), -a.c * g.dt(), 1e-12);
  EXPECT_NEAR(a.circulation.objective(g), -a.c * g.dt(), 1e-12);
}

TEST(ExtremeMeasures, CountsPerModel) {
  {
    const auto g = grid_graph(pendulum(), 200, 0.05);
    const auto a = analyze_critical(g, Tolerances::defaults(g), 1, false);
    EXPECT_EQ(enumerate_extreme_measures(g, a.potential, a.c, Tolerances::defaults(g)).size(), 1u);
  }
  {
    const auto g = grid_graph(double_well(), 200, 0.05);
    const auto a = analyze_critical(g, Tolerances::defaults(g), 1, false);
    EXPECT_EQ(enumerate_extreme_measures(g, a.potential, a.c, Tolerances::defaults(g)).size(), 2u);
  }
  {
    const auto g = drift_graph();
    const auto a = analyze_critical(g, drift_tolerances(g), 1, false);
    const auto ms = enumerate_extreme_measures(g, a.potential, a.c, drift_tolerances(g));
    EXPECT_EQ(ms.size(), 1u);
    for (const auto& m : ms) check_measure_invariants(m, g);
  }
}

TEST(MatherMeasure, CirculationAgreesWithKarp) {
  for (const auto& g : {grid_graph(pendulum(), 100, 0.05), drift_graph(100), grid_graph(double_well(), 100, 0.05)}) {
    const double karp = mather_measure_karp(g).objective(g);
    const double circ = mather_measure_circulation(g).objective(g);
    EXPECT_LE(circ, karp + 1e-12);
    EXPECT_GE(circ, karp - 1e-9);
  }
}

TEST(MatherMeasure, DriftActionGapShrinksWithGrid) {
  // int L0 dmu + c with the continuous value c = 0.
  double prev = kInf;
  for (int n : {50, 100, 200}) {
    const auto g = drift_graph(n);
    const double gap = std::abs(mather_measure_karp(g).objective(g) / g.dt());
    EXPECT_LT(gap, prev);
    prev = gap;
  }
}
