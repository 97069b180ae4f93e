#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "liouville/flow.hpp"
#include "liouville/report.hpp"
#include "liouville/sampling.hpp"
#include "liouville/system.hpp"

namespace liouville {

// Chart image of a phase point: time, actions, angles (each in [0, 2pi)).
struct ChartPoint {
  double t = 0.0;
  VectorXd actions;
  VectorXd angles;
};

// A smooth function of the m action variables with exact gradient, e.g. the
// target Hamiltonian H(I) of a chart shift.
struct ActionFunction {
  int m = 0;
  std::function<double(const VectorXd&)> value;
  std::function<VectorXd(const VectorXd&)> grad;

  static ActionFunction zero(int m) {
    return {m, [](const VectorXd&) { return 0.0; },
            [m](const VectorXd&) { return VectorXd::Zero(m); }};
  }
};

// Level <-> action relation of one frozen-time degree of freedom, sampled on
// a level grid. Actions are strictly monotone in level away from critical
// sets, which the chart inversion relies on.
struct ActionProfile {
  ScalarField slice;  // 1-DOF, t frozen
  std::vector<double> levels;
  std::vector<double> actions;
  std::vector<double> periods;
};

// Controls for level-curve tracing. The raw action/period operations run one
// adaptive pass that traces the curve and accumulates the loop integral
// together, so the quadrature error inherits the ODE tolerance.
struct LoopControl {
  double tol = 1e-11;
  double max_parameter = 100.0;  // period search cap
  int max_steps = 2000000;
  double q_center = 0.0;         // angle-origin axis reference
  double scan_limit = 64.0;      // turning-point search span from center

  static LoopControl with_tol(double t) {
    LoopControl lc;
    lc.tol = t;
    return lc;
  }
};

// Restrict a vertical field to one degree of freedom at a fixed time; the
// other coordinates are pinned at the anchor. Only meaningful when the field
// actually depends on the chosen degree alone (separable systems).
ScalarField freeze_degree(const ScalarField& F, double t,
                          const PhasePoint& anchor, int degree);

// (1/2pi) * loop integral of p dq over the closed level curve
// {F(t, q, p) = level} of a 1-DOF field, traced by the Hamiltonian flow of F.
double action_integral(const ScalarField& F, double t, double level,
                       double quad_tol, const LoopControl& lc = {});

// Smallest tau > 0 returning the level-curve flow to its start point.
double period(const ScalarField& F, double t, double level, double tol,
              const LoopControl& lc = {});

ActionProfile build_profile(const ScalarField& slice_field, double t,
                            const std::vector<double>& levels,
                            double quad_tol, const LoopControl& lc = {});

// Invertible map between (t, q, p) and (t, I, phi). Charts come in three
// kinds: the initial-data chart built from the t = 0 slice, shifted charts
// phi -> phi + t*dH/dI realizing a prescribed H(I), and the one-parameter
// canonical transformation with time as the sole non-compact coordinate.
class ActionAngleChart {
 public:
  enum class Kind { initial_data, shifted, retrivialized };

  Kind kind() const;
  int dim() const;
  const SampleRegion& domain() const;
  const ActionFunction& effective_hamiltonian() const;
  const std::vector<ActionProfile>& profiles() const;

  ChartPoint forward(const PhasePoint& x) const;
  PhasePoint inverse(const ChartPoint& c) const;

  // Cheap domain predicate used to sample points where forward is defined.
  bool in_domain(const PhasePoint& x) const;

  // Vet a level of one degree against the chart window and separatrix
  // guards, then measure its action and period on the frozen trace grid.
  struct LevelInfo {
    double level;
    double action;
    double period;
  };
  LevelInfo level_diagnostics(int degree, double level) const;

  struct Impl;
  explicit ActionAngleChart(std::shared_ptr<const Impl> impl)
      : impl_(std::move(impl)) {}
  const std::shared_ptr<const Impl>& impl() const { return impl_; }

 private:
  std::shared_ptr<const Impl> impl_;
};

// Build the chart whose coordinates are constant along trajectories: project
// to the t = 0 fibre, then take per-degree action-angle coordinates of the
// restricted integrals. Requires compact level curves on every degree.
//
// Chart evaluations use fixed-step internals (step sizes frozen at build
// time) so forward/inverse are smooth functions of the input at the scale of
// the finite-difference probes used in canonicity checks; ctl only governs
// the construction-time calibration passes.
ActionAngleChart build_initial_data_chart(const TDSystem& sys,
                                          const SampleRegion& region,
                                          const StepControl& ctl);

// New chart with I = I_bar, phi = phi_bar + t * dH/dI(I_bar); in it the
// dynamics realize Idot = 0, phidot = dH/dI.
ActionAngleChart shift_chart(const ActionAngleChart& chart,
                             const ActionFunction& H_of_I);

// Pass to another trivialization of the annulus: the canonical map
// I'_a = I_a - F_a(I), phi'^i = phi^i + x^a dF_a/dI_i, specialized to the
// single non-compact coordinate x^0 = t. The displaced action I_0 is
// tracked implicitly through the effective Hamiltonian.
ActionAngleChart retrivialize_chart(const ActionAngleChart& chart,
                                    const ActionFunction& F0);

// Unit-adapter copy with scaled actions and angles. Scaling only one of the
// two breaks canonicity, which tests exploit as a planted defect.
ActionAngleChart rescale_chart(const ActionAngleChart& chart,
                               double action_scale, double angle_scale);

// Verify {phi^i, I_j} = delta^i_j, {I,I} = 0, {phi,phi} = 0 through
// finite-difference Jacobians of forward (central differences with one
// Richardson step at h = 1e-6).
VerifyReport check_canonicity(const ActionAngleChart& chart,
                              const SampleRegion& region, double tol);

// Check that pulled-back invariants depend on the actions only: numerical
// d/dphi of each first integral (and of the Hamiltonian when it is itself
// autonomous) stays below 1e-5. Shifted charts additionally get their
// dynamics checked against the dH/dI frequencies.
VerifyReport hamiltonian_in_chart(const TDSystem& sys,
                                  const ActionAngleChart& chart,
                                  const SampleRegion& region);

// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace liouville
