#pragma once

#include <optional>
#include <string>
#include <vector>

#include "liouville/ode.hpp"
#include "liouville/system.hpp"

namespace liouville {

// Sampled trajectory of gamma_H. Points are strictly monotone in t (increasing
// or decreasing depending on the run direction); the first point is the
// requested initial condition bit-exactly. aux carries any co-integrated
// auxiliary state, index-aligned with points.
struct Trajectory {
  std::vector<PhasePoint> points;
  std::vector<VectorXd> aux;
  std::string system_label;
  OdeStats stats;

  const PhasePoint& front() const { return points.front(); }
  const PhasePoint& back() const { return points.back(); }
};

Trajectory integrate(const TDSystem& sys, const PhasePoint& x0,
                     double t_target, const StepControl& ctl);

struct ProjectionResult {
  PhasePoint point;  // on the t = 0 fibre
  // || flow-forward(point) - x ||_inf, reported rather than silently
  // absorbed; absent when the caller opted out of the extra solve.
  std::optional<double> round_trip_error;
};

// Project x to the t = 0 fibre along the trajectory through it. Points
// already on the fibre are returned as-is with no integration.
ProjectionResult initial_data_projection(const TDSystem& sys,
                                         const PhasePoint& x,
                                         const StepControl& ctl,
                                         bool report_round_trip = true);

// Flow of the vertical Hamiltonian vector field of F inside the fixed-time
// slice through x; t is held constant and F is conserved along its own flow.
PhasePoint slice_flow(const ScalarField& F, const PhasePoint& x, double tau,
                      const StepControl& ctl);

// Auxiliary state of the system at time t (solved from its t = 0 seed).
VectorXd auxiliary_at(const TDSystem& sys, double t, const StepControl& ctl);

}  // namespace liouville
