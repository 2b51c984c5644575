#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

namespace wkam {

/// A point or vector on the flat torus T^1 / T^2. Unused components are 0.
using Vec = std::array<double, 2>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Reduces an angle to [0, 2pi).
inline double wrap_angle(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

/// Shortest signed representative of a - b on the circle, in [-pi, pi].
inline double angle_diff(double a, double b) {
  double d = std::fmod(a - b, kTwoPi);
  if (d > std::numbers::pi) d -= kTwoPi;
  if (d < -std::numbers::pi) d += kTwoPi;
  return d;
}

/// Trigonometric polynomial a_0 + sum_k a_k cos(kx) + b_k sin(kx).
/// On T^2 the same one-dimensional part is added once per coordinate.
struct TrigPoly {
  std::vector<double> a{0.0};  // a_0 .. a_K
  std::vector<double> b;       // b_1 .. b_K

  static TrigPoly constant(double c) { return TrigPoly{{c}, {}}; }

  double constant_term() const { return a.empty() ? 0.0 : a[0]; }

  // Periodic part and its first two derivatives in one coordinate.
  double periodic(double t) const {
    double s = 0.0;
    for (std::size_t k = 1; k < a.size(); ++k) s += a[k] * std::cos(double(k) * t);
    for (std::size_t k = 1; k <= b.size(); ++k) s += b[k - 1] * std::sin(double(k) * t);
    return s;
  }
  double periodic_d1(double t) const {
    double s = 0.0;
    for (std::size_t k = 1; k < a.size(); ++k) s -= double(k) * a[k] * std::sin(double(k) * t);
    for (std::size_t k = 1; k <= b.size(); ++k) s += double(k) * b[k - 1] * std::cos(double(k) * t);
    return s;
  }
  double periodic_d2(double t) const {
    double s = 0.0;
    for (std::size_t k = 1; k < a.size(); ++k) s -= double(k * k) * a[k] * std::cos(double(k) * t);
    for (std::size_t k = 1; k <= b.size(); ++k) s -= double(k * k) * b[k - 1] * std::sin(double(k) * t);
    return s;
  }

  double operator()(const Vec& x, int dim) const {
    double s = constant_term();
    for (int d = 0; d < dim; ++d) s += periodic(x[d]);
    return s;
  }

  Vec gradient(const Vec& x, int dim) const {
    Vec g{0.0, 0.0};
    for (int d = 0; d < dim; ++d) g[d] = periodic_d1(x[d]);
    return g;
  }

  bool is_constant() const {
    for (std::size_t k = 1; k < a.size(); ++k)
      if (a[k] != 0.0) return false;
    for (double c : b)
      if (c != 0.0) return false;
    return true;
  }

  /// Sum of |coefficients| of the periodic part: bounds |periodic(t)|.
  double periodic_bound() const {
    double s = 0.0;
    for (std::size_t k = 1; k < a.size(); ++k) s += std::abs(a[k]);
    for (double c : b) s += std::abs(c);
    return s;
  }
};

}  // namespace wkam
