#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "liouville/field.hpp"
#include "liouville/phase.hpp"

namespace liouville {

// Per-degree metadata consumed by chart construction. Built-in systems fill
// these in; hand-rolled systems get permissive defaults.
struct DegreeHints {
  bool compact_slices = true;
  double center = 0.0;                     // angle origin reference on the q axis
  std::vector<double> separatrix_levels;   // guarded critical values
  // Chart domains keep per-degree levels inside this window, away from
  // centers and separatrices.
  double level_min = -std::numeric_limits<double>::infinity();
  double level_max = std::numeric_limits<double>::infinity();
};

// Extra state components integrated alongside (q, p), e.g. the Ermakov
// auxiliary pair (rho, rho_dot) of the time-dependent oscillator.
struct AuxiliaryState {
  int dim = 0;
  VectorXd initial;  // value at t = 0
  std::function<VectorXd(double t, const VectorXd& aux)> rhs;
};

// A time-dependent Hamiltonian system with its declared first integrals.
struct TDSystem {
  int m = 0;
  ScalarField hamiltonian;              // vertical
  std::vector<ScalarField> integrals;   // size m, vertical
  std::string label;

  // Chart/trace metadata.
  bool separable = true;  // integral k depends on (t, q_k, p_k) only
  std::vector<DegreeHints> degrees;
  AuxiliaryState auxiliary;  // dim == 0 when absent

  const DegreeHints& degree_hints(int k) const {
    static const DegreeHints fallback{};
    if (k < 0 || k >= static_cast<int>(degrees.size())) return fallback;
    return degrees[k];
  }
};

inline void require_system(const TDSystem& sys, const char* where) {
  if (sys.m < 1 || !sys.hamiltonian.valid())
    throw DimensionError(std::string(where) + ": invalid system");
  if (static_cast<int>(sys.integrals.size()) != sys.m)
    throw DimensionError(std::string(where) +
                         ": integral count != degree count");
}

// Evolution vector field gamma_H on V*Q: dt = 1, dq = dH/dp, dp = -dH/dq.
inline TangentVector gamma_h(const TDSystem& sys, const PhasePoint& x) {
  require_system(sys, "gamma_h");
  require_finite(x, "gamma_h");
  const Gradient g = sys.hamiltonian.gradient(x);
  TangentVector v{1.0, g.dp, -g.dq};
  if (!all_finite(v.dq) || !all_finite(v.dp))
    throw NumericError("gamma_h: non-finite gradient");
  return v;
}

// Autonomous lift H* = p0 + H on T*Q. Vanishes on the image of the canonical
// section p0 = -H, and dH*/dp0 == 1 identically.
inline ScalarField lift_hamiltonian(const TDSystem& sys) {
  require_system(sys, "lift_hamiltonian");
  const ScalarField h = sys.hamiltonian;
  return ScalarField::extended(
      sys.m, [h](const ExtendedPoint& x) { return x.p0 + h(x); },
      [h](const ExtendedPoint& x) {
        Gradient g = h.gradient(x);
        g.dp0 = 1.0;
        return g;
      });
}

// Hamiltonian vector field of H* on T*Q. Its (dt, dq, dp) part coincides
// with gamma_h at the projected point; dp0 = -dH/dt.
inline ExtendedTangent gamma_t(const TDSystem& sys, const ExtendedPoint& x) {
  require_system(sys, "gamma_t");
  require_finite(x, "gamma_t");
  const Gradient g = sys.hamiltonian.gradient(x);
  ExtendedTangent v{1.0, g.dp, -g.dq, -g.dt};
  if (!all_finite(v.dq) || !all_finite(v.dp) || !std::isfinite(v.dp0))
    throw NumericError("gamma_t: non-finite gradient");
  return v;
}

// Section h_r of the bundle zeta: p0 = -H + r, so H* == r on its image.
inline ExtendedPoint section_h_r(const TDSystem& sys, double r,
                                 const PhasePoint& x) {
  require_system(sys, "section_h_r");
  require_finite(x, "section_h_r");
  return extend(x, -sys.hamiltonian(x) + r);
}

}  // namespace liouville
