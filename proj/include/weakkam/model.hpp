#pragma once

// Contact Lagrangians on T^1 / T^2:
//
//   L(x, v, u) = 1/2 |v - V(x)|^2 + W(x) + g(x, u)
//   g(x, u)    = -lambda(x) u                        (linear coupling)
//              = -lambda(x) u - kappa u^3 / (1 + u^2) (saturating coupling)
//
// and the matching Hamiltonian H(x, p, u) = 1/2|p|^2 + <p, V(x)> - W(x) - g(x, u).

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "weakkam/error.hpp"
#include "weakkam/trig_poly.hpp"

namespace wkam {

enum class Family { Mechanical, Drift, MechanicalDrift };
enum class CouplingKind { Linear, Saturating };

/// Largest value of d/du [u^3 / (1 + u^2)], attained at u^2 = 3.
inline constexpr double kSaturationSlopeMax = 9.0 / 8.0;

/// The u-coupling frozen at one point of the torus.
struct NodeCoupling {
  double lambda = 1.0;
  double kappa = 0.0;

  double g(double u) const { return -lambda * u - kappa * u * u * u / (1.0 + u * u); }

  double dg(double u) const {
    const double s = u * u;
    return -lambda - kappa * (3.0 * s + s * s) / ((1.0 + s) * (1.0 + s));
  }

  /// int_0^1 dg(tau u) dtau, i.e. g(u)/u with the u -> 0 limit filled in.
  double secant(double u) const {
    if (std::abs(u) < 1e-8) return -lambda;
    return g(u) / u;
  }

  /// Upper bound of -dg over all u.
  double max_slope() const { return lambda + kappa * kSaturationSlopeMax; }
};

struct Coupling {
  CouplingKind kind = CouplingKind::Linear;
  TrigPoly lambda = TrigPoly::constant(1.0);
  double kappa = 0.0;
};

struct LagrangianModel {
  int dim = 1;
  Family family = Family::Mechanical;
  TrigPoly W = TrigPoly::constant(0.0);
  std::array<TrigPoly, 2> V{TrigPoly::constant(0.0), TrigPoly::constant(0.0)};
  Coupling coupling;
  double delta = 1.0;  // declared lower bound of lambda
  double Delta = 1.0;  // declared upper bound of lambda

  double potential(const Vec& x) const {
    return family == Family::Drift ? 0.0 : W(x, dim);
  }
  Vec potential_gradient(const Vec& x) const {
    return family == Family::Drift ? Vec{0.0, 0.0} : W.gradient(x, dim);
  }
  Vec drift(const Vec& x) const {
    if (family == Family::Mechanical) return {0.0, 0.0};
    Vec out{0.0, 0.0};
    for (int d = 0; d < dim; ++d) out[d] = V[d](x, dim);
    return out;
  }
  NodeCoupling coupling_at(const Vec& x) const {
    const double k = coupling.kind == CouplingKind::Saturating ? coupling.kappa : 0.0;
    return NodeCoupling{coupling.lambda(x, dim), k};
  }
};

/// Kinetic-plus-potential part L(x, v, 0).
inline double eval_L0(const LagrangianModel& m, const Vec& x, const Vec& v) {
  const Vec drift = m.drift(x);
  double kin = 0.0;
  for (int d = 0; d < m.dim; ++d) kin += 0.5 * (v[d] - drift[d]) * (v[d] - drift[d]);
  return kin + m.potential(x);
}

inline double eval_L(const LagrangianModel& m, const Vec& x, const Vec& v, double u) {
  return eval_L0(m, x, v) + m.coupling_at(x).g(u);
}

/// Exact dL/du; the families here make it independent of v.
inline double eval_dLdu(const LagrangianModel& m, const Vec& x, const Vec& /*v*/, double u) {
  return m.coupling_at(x).dg(u);
}

/// Legendre transform in closed form: 1/2|p|^2 + <p,V> - W - g.
inline double legendre_H(const LagrangianModel& m, const Vec& x, const Vec& p, double u) {
  const Vec drift = m.drift(x);
  double h = 0.0;
  for (int d = 0; d < m.dim; ++d) h += 0.5 * p[d] * p[d] + p[d] * drift[d];
  return h - m.potential(x) - m.coupling_at(x).g(u);
}

/// The same transform by golden-section search of max_v <p,v> - L(x,v,u).
/// The kinetic term is separable, so each velocity coordinate is searched
/// independently on a bracket wide enough to contain the maximizer.
inline double legendre_H_search(const LagrangianModel& m, const Vec& x, const Vec& p, double u,
                                double tol = 1e-10) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  const Vec drift = m.drift(x);
  double total = 0.0;
  for (int d = 0; d < m.dim; ++d) {
    auto f = [&](double v) { return p[d] * v - 0.5 * (v - drift[d]) * (v - drift[d]); };
    const double span = 10.0 + 2.0 * (std::abs(p[d]) + std::abs(drift[d]));
    double lo = -span, hi = span;
    double c = hi - invphi * (hi - lo), e = lo + invphi * (hi - lo);
    double fc = f(c), fe = f(e);
    while (hi - lo > tol) {
      if (fc > fe) {
        hi = e; e = c; fe = fc;
        c = hi - invphi * (hi - lo); fc = f(c);
      } else {
        lo = c; c = e; fc = fe;
        e = lo + invphi * (hi - lo); fe = f(e);
      }
    }
    total += f(0.5 * (lo + hi));
  }
  return total - m.potential(x) - m.coupling_at(x).g(u);
}

struct HamiltonianPartials {
  double H = 0.0;
  Vec H_x{0.0, 0.0};
  Vec H_p{0.0, 0.0};
  double H_u = 0.0;
};

inline HamiltonianPartials hamiltonian_partials(const LagrangianModel& m, const Vec& x, const Vec& p,
                                                double u) {
  HamiltonianPartials out;
  out.H = legendre_H(m, x, p, u);
  const Vec drift = m.drift(x);
  const Vec gw = m.potential_gradient(x);
  const Vec gl = m.coupling.lambda.gradient(x, m.dim);
  for (int d = 0; d < m.dim; ++d) {
    out.H_p[d] = p[d] + drift[d];
    double hx = -gw[d] + u * gl[d];
    if (m.family != Family::Mechanical) {
      // d/dx_d <p, V(x)>; each V_e is a tensor-sum polynomial.
      for (int e = 0; e < m.dim; ++e) hx += p[e] * m.V[e].periodic_d1(x[d]);
    }
    out.H_x[d] = hx;
  }
  out.H_u = -m.coupling_at(x).dg(u);
  return out;
}

struct PhasePoint {
  Vec x{0.0, 0.0};  // reduced to [0, 2pi)
  Vec p{0.0, 0.0};
  double u = 0.0;
};

/// Fixed-step RK4 for the contact Hamiltonian system
///   x' = H_p,  p' = -H_x - p H_u,  u' = <p, H_p> - H.
/// Returns steps + 1 points including the start.
inline std::vector<PhasePoint> integrate_contact_ode(const LagrangianModel& m, PhasePoint start,
                                                     double dt, std::size_t steps) {
  if (!(dt > 0.0)) throw Error(ErrorKind::NonFiniteState, "time step must be positive");
  struct State {
    Vec x, p;
    double u;
  };
  const int dim = m.dim;
  auto rhs = [&](const State& s) {
    const auto hp = hamiltonian_partials(m, s.x, s.p, s.u);
    State ds{{0.0, 0.0}, {0.0, 0.0}, 0.0};
    double php = 0.0;
    for (int d = 0; d < dim; ++d) {
      ds.x[d] = hp.H_p[d];
      ds.p[d] = -hp.H_x[d] - s.p[d] * hp.H_u;
      php += s.p[d] * hp.H_p[d];
    }
    ds.u = php - hp.H;
    return ds;
  };
  auto axpy = [&](const State& s, double h, const State& k) {
    State r = s;
    for (int d = 0; d < dim; ++d) {
      r.x[d] += h * k.x[d];
      r.p[d] += h * k.p[d];
    }
    r.u += h * k.u;
    return r;
  };

  std::vector<PhasePoint> out;
  out.reserve(steps + 1);
  for (int d = 0; d < dim; ++d) start.x[d] = wrap_angle(start.x[d]);
  out.push_back(start);
  State s{start.x, start.p, start.u};
  for (std::size_t i = 0; i < steps; ++i) {
    const State k1 = rhs(s);
    const State k2 = rhs(axpy(s, 0.5 * dt, k1));
    const State k3 = rhs(axpy(s, 0.5 * dt, k2));
    const State k4 = rhs(axpy(s, dt, k3));
    for (int d = 0; d < dim; ++d) {
      s.x[d] += dt / 6.0 * (k1.x[d] + 2.0 * k2.x[d] + 2.0 * k3.x[d] + k4.x[d]);
      s.p[d] += dt / 6.0 * (k1.p[d] + 2.0 * k2.p[d] + 2.0 * k3.p[d] + k4.p[d]);
    }
    s.u += dt / 6.0 * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u);
    bool finite = std::isfinite(s.u);
    for (int d = 0; d < dim; ++d) finite = finite && std::isfinite(s.x[d]) && std::isfinite(s.p[d]);
    if (!finite) {
      std::ostringstream msg;
      msg << "state left the float range at step " << i + 1;
      throw Error(ErrorKind::NonFiniteState, msg.str());
    }
    for (int d = 0; d < dim; ++d) s.x[d] = wrap_angle(s.x[d]);
    out.push_back(PhasePoint{s.x, s.p, s.u});
  }
  return out;
}

struct ValidationBox {
  double u_max = 4.0;
  double v_max = 4.0;
  int x_samples = 64;  // total over the torus
  int u_samples = 64;
  int v_samples = 16;
};

struct ValidationReport {
  double delta_measured = 0.0;    // min of -dL/du over the samples
  double Delta_measured = 0.0;    // max of -dL/du (= dH/du) over the samples
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double min_hessian = 0.0;       // smallest sampled d^2L/dv^2 (finite differences)
  double growth_ratio = 0.0;      // L(2R)/(2R) over L(R)/R along the axes, R large
};

/// Samples the working box and checks the standing assumptions: convex
/// superlinear kinetic part and lambda in [delta, Delta] with delta > 0.
inline ValidationReport validate_model(const LagrangianModel& m, const ValidationBox& box = {}) {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::ModelViolation, what); };
  if (m.dim != 1 && m.dim != 2) fail("dim must be 1 or 2");
  if (!(m.delta > 0.0)) fail("declared delta must be positive");
  if (!(m.Delta >= m.delta)) fail("declared Delta must be >= delta");
  if (m.coupling.kind == CouplingKind::Saturating && m.coupling.kappa < 0.0)
    fail("saturating kappa must be >= 0");

  ValidationReport rep;
  rep.delta_measured = std::numeric_limits<double>::infinity();
  rep.Delta_measured = -std::numeric_limits<double>::infinity();
  rep.lambda_min = std::numeric_limits<double>::infinity();
  rep.lambda_max = -std::numeric_limits<double>::infinity();
  rep.min_hessian = std::numeric_limits<double>::infinity();

  // x_samples points in total: a line on T^1, a square lattice on T^2.
  const int side = m.dim == 2 ? std::max(2, int(std::lround(std::sqrt(double(box.x_samples))))) : box.x_samples;
  const int nx = side;
  const int ny = m.dim == 2 ? side : 1;
  const double tol = 1e-12;
  for (int ix = 0; ix < nx; ++ix) {
    for (int iy = 0; iy < ny; ++iy) {
      const Vec x{kTwoPi * ix / nx, m.dim == 2 ? kTwoPi * iy / ny : 0.0};
      const NodeCoupling nc = m.coupling_at(x);
      rep.lambda_min = std::min(rep.lambda_min, nc.lambda);
      rep.lambda_max = std::max(rep.lambda_max, nc.lambda);
      if (nc.lambda <= 0.0 || nc.lambda < m.delta - tol || nc.lambda > m.Delta + tol) {
        std::ostringstream msg;
        msg << "lambda(x) = " << nc.lambda << " at x = (" << x[0] << ", " << x[1]
            << ") outside declared [" << m.delta << ", " << m.Delta << "]";
        fail(msg.str());
      }
      for (int iu = 0; iu < box.u_samples; ++iu) {
        const double u = -box.u_max + 2.0 * box.u_max * iu / (box.u_samples - 1);
        const double slope = -nc.dg(u);
        rep.delta_measured = std::min(rep.delta_measured, slope);
        rep.Delta_measured = std::max(rep.Delta_measured, slope);
        if (!(slope > 0.0)) {
          std::ostringstream msg;
          msg << "dL/du = " << -slope << " >= 0 at x = (" << x[0] << ", " << x[1] << "), u = " << u;
          fail(msg.str());
        }
        for (int iv = 0; iv < box.v_samples; ++iv) {
          const double vs = -box.v_max + 2.0 * box.v_max * iv / (box.v_samples - 1);
          for (int d = 0; d < m.dim; ++d) {
            Vec v{vs, m.dim == 2 ? -vs : 0.0};
            const double h = 1e-3;
            Vec vp = v, vm = v;
            vp[d] += h;
            vm[d] -= h;
            const double hess = (eval_L(m, x, vp, u) - 2.0 * eval_L(m, x, v, u) + eval_L(m, x, vm, u)) / (h * h);
            rep.min_hessian = std::min(rep.min_hessian, hess);
            if (!(hess > 0.0)) {
              std::ostringstream msg;
              msg << "d2L/dv2 = " << hess << " not positive at x = (" << x[0] << ", " << x[1] << ")";
              fail(msg.str());
            }
          }
        }
      }
    }
  }

  // Superlinearity: L(x, R e, 0)/R must keep growing with R.
  const double R = 1e3;
  rep.growth_ratio = std::numeric_limits<double>::infinity();
  for (int d = 0; d < m.dim; ++d) {
    for (double sgn : {-1.0, 1.0}) {
      Vec e1{0.0, 0.0}, e2{0.0, 0.0};
      e1[d] = sgn * R;
      e2[d] = sgn * 2.0 * R;
      const Vec x0{0.0, 0.0};
      const double r = (eval_L(m, x0, e2, 0.0) / (2.0 * R)) / (eval_L(m, x0, e1, 0.0) / R);
      rep.growth_ratio = std::min(rep.growth_ratio, r);
    }
  }
  if (!(rep.growth_ratio > 1.5)) fail("Lagrangian is not superlinear in v");
  return rep;
}

}  // namespace wkam
