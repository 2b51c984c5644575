#include <gtest/gtest.h>

#include <random>

#include "models.hpp"

using namespace wkam;
using namespace wkam::testing;

namespace {

LagrangianModel discounted_free() {
  LagrangianModel m;
  m.W = TrigPoly::constant(0.0);
  return m;
}

}  // namespace

TEST(TrigPoly, PeriodicInEveryCoordinate) {
  TrigPoly p{{0.3, 1.0, -0.4, 0.2}, {0.5, 0.1, -0.7}};
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-10.0, 10.0);
  for (int k = 0; k < 1000; ++k) {
    const Vec x{U(rng), U(rng)};
    EXPECT_NEAR(p(x, 2), p(Vec{x[0] + kTwoPi, x[1]}, 2), 1e-12);
    EXPECT_NEAR(p(x, 2), p(Vec{x[0], x[1] + kTwoPi}, 2), 1e-12);
  }
}

TEST(EvalL, PendulumAtRest) { EXPECT_DOUBLE_EQ(eval_L(pendulum(), {0.0, 0.0}, {0.0, 0.0}, 0.0), 0.0); }

TEST(EvalL, DriftAlongTheFlow) { EXPECT_NEAR(eval_L(drift(), {0.0, 0.0}, {2.0, 0.0}, 0.0), 0.0, 1e-15); }

TEST(EvalL, LinearCouplingAddsMinusLambdaU) {
  LagrangianModel m = discounted_free();
  m.coupling.lambda = TrigPoly::constant(2.0);
  m.delta = m.Delta = 2.0;
  EXPECT_NEAR(eval_L(m, {1.0, 0.0}, {0.0, 0.0}, 0.3), -0.6, 1e-15);
}

TEST(EvalDLdu, LambdaFromTrigPolynomial) {
  LagrangianModel m = pendulum();
  m.coupling.lambda.a = {1.0, 0.5};
  EXPECT_NEAR(eval_dLdu(m, {0.0, 0.0}, {0.3, 0.0}, 0.0), -1.5, 1e-15);
  EXPECT_NEAR(eval_dLdu(m, {std::numbers::pi, 0.0}, {0.3, 0.0}, 0.0), -0.5, 1e-15);
}

TEST(EvalDLdu, SaturatingTermHasZeroSlopeAtZero) {
  LagrangianModel m = pendulum();
  m.coupling.kind = CouplingKind::Saturating;
  m.coupling.kappa = 1.0;
  m.coupling.lambda.a = {1.0, 0.5};
  for (double x : {0.0, 1.0, 2.5}) EXPECT_NEAR(eval_dLdu(m, {x, 0.0}, {0.0, 0.0}, 0.0), -(1.0 + 0.5 * std::cos(x)), 1e-15);
}

TEST(EvalDLdu, MatchesCentralDifferences) {
  LagrangianModel m = double_well(TrigPoly{{1.0, 0.5}, {}}, 0.5, 1.5);
  m.coupling.kind = CouplingKind::Saturating;
  m.coupling.kappa = 0.8;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-3.0, 3.0);
  const double h = 1e-4;
  for (int k = 0; k < 2000; ++k) {
    const Vec x{U(rng), 0.0}, v{U(rng), 0.0};
    const double u = U(rng);
    const double fd = (eval_L(m, x, v, u + h) - eval_L(m, x, v, u - h)) / (2.0 * h);
    EXPECT_NEAR(eval_dLdu(m, x, v, u), fd, 1e-6);
  }
}

TEST(LegendreH, FreeParticle) { EXPECT_DOUBLE_EQ(legendre_H(discounted_free(), {0.4, 0.0}, {1.0, 0.0}, 0.0), 0.5); }

TEST(LegendreH, DriftClosedFormAgainstVelocityGrid) {
  const auto m = drift();
  const Vec x{0.0, 0.0}, p{1.0, 0.0};
  EXPECT_NEAR(legendre_H(m, x, p, 0.0), 2.5, 1e-15);
  double best = -kInf;
  for (int k = -200000; k <= 200000; ++k) {
    const double v = k * 1e-4;
    best = std::max(best, p[0] * v - eval_L(m, x, {v, 0.0}, 0.0));
  }
  EXPECT_NEAR(best, 2.5, 1e-7);
}

TEST(LegendreH, YoungEqualityAtConjugateVelocity) {
  const auto m = drift();
  for (double x : {0.0, 1.0, 4.0})
    for (double p : {-1.5, 0.0, 0.7}) {
      const Vec v{p + m.drift({x, 0.0})[0], 0.0};
      const double gap = legendre_H(m, {x, 0.0}, {p, 0.0}, 0.2) + eval_L(m, {x, 0.0}, v, 0.2) - p * v[0];
      EXPECT_NEAR(gap, 0.0, 1e-12);
    }
}

TEST(LegendreH, YoungInequalityOnRandomSamples) {
  LagrangianModel m;
  m.dim = 2;
  m.family = Family::MechanicalDrift;
  m.W.a = {1.0, -0.5, 0.2};
  m.V[0].a = {0.3, 0.4};
  m.V[1].b = {0.6};
  m.coupling.kind = CouplingKind::Saturating;
  m.coupling.kappa = 0.5;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-4.0, 4.0);
  for (int k = 0; k < 10000; ++k) {
    const Vec x{U(rng), U(rng)}, p{U(rng), U(rng)}, v{U(rng), U(rng)};
    const double u = U(rng);
    const double gap = legendre_H(m, x, p, u) + eval_L(m, x, v, u) - (p[0] * v[0] + p[1] * v[1]);
    EXPECT_GE(gap, -1e-9);
  }
}

TEST(LegendreH, ClosedFormMatchesSearch) {
  LagrangianModel m = drift();
  m.family = Family::MechanicalDrift;
  m.W.a = {1.0, -1.0};
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-3.0, 3.0);
  for (int k = 0; k < 500; ++k) {
    const Vec x{U(rng), 0.0}, p{U(rng), 0.0};
    const double u = U(rng);
    EXPECT_NEAR(legendre_H(m, x, p, u), legendre_H_search(m, x, p, u), 1e-6);
  }
}

TEST(ContactOde, DiscountedMomentumDecaysExponentially) {
  const auto path = integrate_contact_ode(discounted_free(), PhasePoint{{0.0, 0.0}, {1.0, 0.0}, 0.0}, 1e-3, 1000);
  EXPECT_NEAR(path.back().p[0], std::exp(-1.0), 1e-6);
}

TEST(ContactOde, RestIsAnEquilibrium) {
  const auto path = integrate_contact_ode(discounted_free(), PhasePoint{{2.0, 0.0}, {0.0, 0.0}, 0.0}, 0.01, 100);
  EXPECT_DOUBLE_EQ(path.back().x[0], 2.0);
  EXPECT_DOUBLE_EQ(path.back().p[0], 0.0);
}

TEST(ContactOde, ValueEquationHoldsAlongTrajectory) {
  const auto m = pendulum();
  const double dt = 1e-3;
  const auto path = integrate_contact_ode(m, PhasePoint{{0.5, 0.0}, {0.8, 0.0}, 0.1}, dt, 200);
  for (std::size_t k = 1; k + 1 < path.size(); ++k) {
    const auto& s = path[k];
    const auto hp = hamiltonian_partials(m, s.x, s.p, s.u);
    const double udot = (path[k + 1].u - path[k - 1].u) / (2.0 * dt);
    EXPECT_NEAR(udot, s.p[0] * hp.H_p[0] - hp.H, 1e-5);
  }
}

TEST(ContactOde, FourthOrderRichardsonRatio) {
  const auto m = pendulum();
  const PhasePoint start{{0.5, 0.0}, {0.8, 0.0}, 0.1};
  auto end = [&](double dt) { return integrate_contact_ode(m, start, dt, std::size_t(std::lround(2.0 / dt))).back(); };
  const auto a = end(0.1), b = end(0.05), c = end(0.025);
  auto dist = [](const PhasePoint& p, const PhasePoint& q) {
    return std::abs(angle_diff(p.x[0], q.x[0])) + std::abs(p.p[0] - q.p[0]) + std::abs(p.u - q.u);
  };
  const double ratio = dist(a, b) / dist(b, c);
  EXPECT_GE(ratio, 12.0);
  EXPECT_LE(ratio, 20.0);
}

TEST(ContactOde, BlowUpIsReported) {
  LagrangianModel m = discounted_free();
  EXPECT_THROW(
      {
        try {
          integrate_contact_ode(m, PhasePoint{{0.0, 0.0}, {1e200, 0.0}, 0.0}, 1.0, 10);
        } catch (const Error& e) {
          EXPECT_EQ(e.kind(), ErrorKind::NonFiniteState);
          throw;
        }
      },
      Error);
}

TEST(ValidateModel, MeasuresCouplingBounds) {
  const auto m = double_well(TrigPoly{{1.0, 0.5}, {}}, 0.5, 1.5);
  const auto r = validate_model(m);
  EXPECT_NEAR(r.delta_measured, 0.5, 1e-12);
  EXPECT_NEAR(r.Delta_measured, 1.5, 1e-12);
  EXPECT_NEAR(r.min_hessian, 1.0, 1e-6);
}

TEST(ValidateModel, RejectsSignChangingLambda) {
  LagrangianModel m = pendulum();
  m.coupling.lambda.a = {0.0, 1.0};
  try {
    validate_model(m);
    FAIL() << "expected ModelViolation";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ModelViolation);
  }
}

TEST(ValidateModel, SaturatingSlopeStaysInsideDeclaredRange) {
  LagrangianModel m = pendulum();
  m.coupling.kind = CouplingKind::Saturating;
  m.coupling.kappa = 1.0;
  const auto r = validate_model(m);
  EXPECT_GE(r.delta_measured, 1.0 - 1e-12);
  EXPECT_LE(r.Delta_measured, 1.0 + kSaturationSlopeMax + 1e-12);
}
