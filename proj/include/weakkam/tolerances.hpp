#pragma once

#include "weakkam/grid.hpp"

namespace wkam {

/// Numerical thresholds shared by the analysis modules. All are absolute
/// except tol_con, which is relative to the sup norm of the field checked.
struct Tolerances {
  double tol_sub = 0.0;    // subsolution defect
  double tol_tight = 0.0;  // reduced cost of a tight edge
  double tol_class = 0.0;  // d_c threshold joining Aubry nodes
  double tol_con = 1e-3;   // Mather constraint, relative
  double tol_osc = 0.0;    // barrier vs liminf oracle

  /// Grid-scaled defaults.
  static Tolerances defaults(double dx, double dt) {
    Tolerances t;
    t.tol_sub = 10.0 * dx * dt;
    t.tol_tight = 1e-3 * dx * dt;
    t.tol_class = 20.0 * dx;
    t.tol_con = 1e-3;
    t.tol_osc = 10.0 * dx;
    return t;
  }
  static Tolerances defaults(const CostGraph& g) { return defaults(g.dx(), g.dt()); }
};

}  // namespace wkam
