#include "liouville/flow.hpp"

#include <cmath>
#include <string>

namespace liouville {

namespace {

// State layout for time integration: [q(m); p(m); aux].
VectorXd pack(const PhasePoint& x, const VectorXd& aux) {
  const int m = x.dim();
  VectorXd y(2 * m + aux.size());
  y.head(m) = x.q;
  y.segment(m, m) = x.p;
  if (aux.size() > 0) y.tail(aux.size()) = aux;
  return y;
}

PhasePoint unpack(double t, const VectorXd& y, int m) {
  return PhasePoint(t, y.head(m), y.segment(m, m));
}

OdeRhs hamiltonian_rhs(const TDSystem& sys) {
  const int m = sys.m;
  const ScalarField h = sys.hamiltonian;
  const AuxiliaryState aux = sys.auxiliary;
  return [m, h, aux](double t, const VectorXd& y) -> VectorXd {
    const Gradient g = h.gradient(unpack(t, y, m));
    VectorXd dy(y.size());
    dy.head(m) = g.dp;
    dy.segment(m, m) = -g.dq;
    if (aux.dim > 0) dy.tail(aux.dim) = aux.rhs(t, y.tail(aux.dim));
    return dy;
  };
}

std::string point_brief(const PhasePoint& x) {
  std::string s = "t=" + std::to_string(x.t);
  for (int k = 0; k < x.dim(); ++k)
    s += " q" + std::to_string(k + 1) + "=" + std::to_string(x.q[k]) + " p" +
         std::to_string(k + 1) + "=" + std::to_string(x.p[k]);
  return s;
}

}  // namespace

VectorXd auxiliary_at(const TDSystem& sys, double t, const StepControl& ctl) {
  if (sys.auxiliary.dim == 0) return VectorXd();
  VectorXd a = sys.auxiliary.initial;
  if (t == 0.0) return a;
  const AuxiliaryState& aux = sys.auxiliary;
  integrate_ode([&aux](double s, const VectorXd& y) { return aux.rhs(s, y); },
                0.0, t, a, ctl);
  return a;
}

Trajectory integrate(const TDSystem& sys, const PhasePoint& x0,
                     double t_target, const StepControl& ctl) {
  require_system(sys, "integrate");
  require_finite(x0, "integrate");
  if (!std::isfinite(t_target))
    throw NumericError("integrate: non-finite t_target");
  ctl.validate();

  Trajectory traj;
  traj.system_label = sys.label;
  traj.points.push_back(x0);
  const VectorXd aux0 = auxiliary_at(sys, x0.t, ctl);
  if (aux0.size() > 0) traj.aux.push_back(aux0);
  if (t_target == x0.t) return traj;

  const int m = sys.m;
  VectorXd y = pack(x0, aux0);
  auto record = [&](double t, const VectorXd& state) {
    traj.points.push_back(unpack(t, state, m));
    if (aux0.size() > 0) traj.aux.push_back(state.tail(aux0.size()));
  };
  try {
    traj.stats =
        integrate_ode(hamiltonian_rhs(sys), x0.t, t_target, y, ctl, record);
  } catch (const DivergenceError& e) {
    throw DivergenceError(std::string(e.what()) + "; last good point " +
                          point_brief(traj.back()));
  }
  return traj;
}

ProjectionResult initial_data_projection(const TDSystem& sys,
                                         const PhasePoint& x,
                                         const StepControl& ctl,
                                         bool report_round_trip) {
  require_system(sys, "initial_data_projection");
  require_finite(x, "initial_data_projection");
  if (x.t == 0.0) return {x, report_round_trip ? std::optional(0.0)
                                               : std::nullopt};

  const int m = sys.m;
  VectorXd y = pack(x, auxiliary_at(sys, x.t, ctl));
  try {
    integrate_ode(hamiltonian_rhs(sys), x.t, 0.0, y, ctl);
  } catch (const NumericError& e) {
    throw IncompletenessError(
        std::string("initial_data_projection: trajectory through ") +
        point_brief(x) + " not integrable back to t=0: " + e.what());
  }
  ProjectionResult out{unpack(0.0, y, m), std::nullopt};

  if (report_round_trip) {
    VectorXd z = y;
    integrate_ode(hamiltonian_rhs(sys), 0.0, x.t, z, ctl);
    const PhasePoint back = unpack(x.t, z, m);
    double err = 0.0;
    for (int k = 0; k < m; ++k) {
      err = std::max(err, std::abs(back.q[k] - x.q[k]));
      err = std::max(err, std::abs(back.p[k] - x.p[k]));
    }
    out.round_trip_error = err;
  }
  return out;
}

PhasePoint slice_flow(const ScalarField& F, const PhasePoint& x, double tau,
                      const StepControl& ctl) {
  if (F.arity() != Arity::vertical)
    throw DimensionError("slice_flow: field must be vertical");
  require_finite(x, "slice_flow");
  if (!std::isfinite(tau)) throw NumericError("slice_flow: non-finite tau");
  if (tau == 0.0) return x;

  const int m = x.dim();
  const double t = x.t;
  auto rhs = [&F, t, m](double, const VectorXd& y) -> VectorXd {
    const Gradient g = F.gradient(PhasePoint(t, y.head(m), y.tail(m)));
    VectorXd dy(2 * m);
    dy.head(m) = g.dp;
    dy.tail(m) = -g.dq;
    return dy;
  };
  VectorXd y(2 * m);
  y.head(m) = x.q;
  y.tail(m) = x.p;
  try {
    integrate_ode(rhs, 0.0, tau, y, ctl);
  } catch (const NumericError& e) {
    throw IncompletenessError(std::string("slice_flow: flow of ") +
                              "the slice field blew up: " + e.what());
  }
  return PhasePoint(t, y.head(m), y.tail(m));
}

}  // namespace liouville
