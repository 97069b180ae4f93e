#include "liouville/actionangle.hpp"

#include <algorithm>
#include <cmath>

#include "liouville/ode.hpp"
#include "liouville/rootfind.hpp"

namespace liouville {

namespace {

// Angle increases along the reverse integral-curve direction of the degree
// field, which is what makes {phi, I} = +1 under the library's bracket sign.
constexpr double kAngleOrientation = -1.0;

constexpr int kProfileNodes = 48;
constexpr int kLoopSubdiv = 2048;     // fixed loop steps per reference period
constexpr double kTimeGrid = 1.0 / 256.0;  // fixed time-flow step inside charts

// 1-DOF view of a vertical field at frozen t.
struct Slice {
  ScalarField f;
  double t = 0.0;

  double value(const Eigen::Vector2d& z) const {
    return f(PhasePoint(t, z[0], z[1]));
  }
  Eigen::Vector2d grad(const Eigen::Vector2d& z) const {
    const Gradient g = f.gradient(PhasePoint(t, z[0], z[1]));
    return {g.dq[0], g.dp[0]};
  }
  Eigen::Vector2d vel(const Eigen::Vector2d& z) const {
    const Gradient g = f.gradient(PhasePoint(t, z[0], z[1]));
    return {g.dp[0], -g.dq[0]};
  }
  // (q, p, sI) with sI' = p * dq/dtau, accumulating the loop integral of p dq.
  OdeRhs rhs3() const {
    const Slice s = *this;
    return [s](double, const VectorXd& y) {
      const Eigen::Vector2d v = s.vel({y[0], y[1]});
      VectorXd dy(3);
      dy << v[0], v[1], y[1] * v[0];
      return dy;
    };
  }
  OdeRhs rhs2() const {
    const Slice s = *this;
    return [s](double, const VectorXd& y) {
      const Eigen::Vector2d v = s.vel({y[0], y[1]});
      VectorXd dy(2);
      dy << v[0], v[1];
      return dy;
    };
  }
};

void check_regular(const Slice& s, const Eigen::Vector2d& z0) {
  const double gn = s.grad(z0).norm();
  if (gn < 1e-10 * (1.0 + z0.norm()))
    throw SeparatrixError(
        "critical point on level curve (separatrix); action-angle chart "
        "breaks down here");
}

// Largest-q... in practice nearest-right intersection of {F(.,0) = level}
// with the half-axis q > center. For connected well curves this is the
// rightmost turning point of the component through the start point; scanning
// further would hop to disconnected components of periodic potentials.
double turning_point(const Slice& s, double level, const LoopControl& lc) {
  auto g = [&](double q) { return s.value({q, 0.0}) - level; };
  if (g(lc.q_center) == 0.0) return lc.q_center;
  double width = 1.0;
  while (width <= lc.scan_limit) {
    const int n = 512;
    double prev_q = lc.q_center;
    double prev_g = g(prev_q);
    for (int i = 1; i <= n; ++i) {
      const double qi = lc.q_center + width * double(i) / double(n);
      const double gi = g(qi);
      if (gi == 0.0) return qi;
      if (prev_g * gi < 0.0)
        return brent_root(g, prev_q, qi, 1e-14 * std::max(1.0, std::abs(qi)));
      prev_q = qi;
      prev_g = gi;
    }
    width *= 2.0;
  }
  throw NonCompactError(
      "non-compact or empty level set: no turning point right of the "
      "center within the scan limit");
}

struct LoopScan {
  double period = 0.0;
  double action = 0.0;
};

// Integrate the 3-state rhs from (a, ya) to tau with a handful of rk4
// substeps; used to refine section crossings smoothly inside one step.
VectorXd partial_state(const OdeRhs& rhs, const VectorXd& ya, double a,
                       double tau) {
  const int nsub = 8;
  VectorXd y = ya;
  const double h = (tau - a) / nsub;
  if (h == 0.0) return y;
  for (int i = 0; i < nsub; ++i) y = rk4_step(rhs, a + i * h, y, h);
  return y;
}

struct SectionEvent {
  double tau;
  VectorXd state;
};

SectionEvent refine_crossing(const OdeRhs& rhs, const VectorXd& ya, double a,
                             double b, const Eigen::Vector2d& n,
                             const Eigen::Vector2d& z_ref) {
  auto gap = [&](double tau) {
    const VectorXd y = partial_state(rhs, ya, a, tau);
    return n.dot(Eigen::Vector2d(y[0], y[1]) - z_ref);
  };
  const double tau =
      brent_root(gap, a, b, 1e-15 * std::max(1.0, std::abs(b)));
  return {tau, partial_state(rhs, ya, a, tau)};
}

double escape_radius(const Eigen::Vector2d& z0) {
  return 100.0 * (1.0 + z0.norm());
}

// Shared adaptive pass: trace the level curve by its own Hamiltonian flow
// and accumulate the loop integral alongside, so the quadrature error
// inherits the ODE tolerance.
LoopScan trace_loop_adaptive(const Slice& s, const Eigen::Vector2d& z0,
                             double tol, const LoopControl& lc) {
  check_regular(s, z0);
  const Eigen::Vector2d n = s.vel(z0).normalized();
  const double escape = escape_radius(z0);
  const OdeRhs rhs = s.rhs3();

  AdaptiveStepper st(rhs, tol, tol);
  VectorXd y0(3);
  y0 << z0[0], z0[1], 0.0;
  st.start(0.0, y0);

  bool below = false;
  for (long steps = 0; steps < lc.max_steps; ++steps) {
    const Eigen::Vector2d z(st.y()[0], st.y()[1]);
    const double speed = std::max(s.vel(z).norm(), 1e-12);
    st.step(0.25 * (1.0 + z.norm()) / speed);
    const Eigen::Vector2d z2(st.y()[0], st.y()[1]);
    if (z2.norm() > escape)
      throw NonCompactError(
          "level-curve flow escaped to large amplitude: level set "
          "non-compact");
    const double sv = n.dot(z2 - z0);
    if (!below) {
      if (sv < 0.0) below = true;
    } else if (sv >= 0.0) {
      const SectionEvent ev =
          refine_crossing(rhs, st.prev_y(), st.prev_s(), st.s(), n, z0);
      return {ev.tau, ev.state[2] / two_pi()};
    }
    if (st.s() > lc.max_parameter)
      throw PeriodNotFoundError(
          "no closed-orbit return within the parameter cap " +
          format_double(lc.max_parameter));
  }
  throw PeriodNotFoundError("loop tracing exceeded the step budget");
}

// Fixed-step variant used inside charts: with the step frozen per degree the
// traced quantities are smooth functions of the start point, which the
// finite-difference canonicity Jacobians require.
LoopScan trace_loop_fixed(const Slice& s, const Eigen::Vector2d& z0, double h,
                          const LoopControl& lc) {
  check_regular(s, z0);
  const Eigen::Vector2d n = s.vel(z0).normalized();
  const double escape = escape_radius(z0);
  const OdeRhs rhs = s.rhs3();

  VectorXd y(3);
  y << z0[0], z0[1], 0.0;
  double tau = 0.0;
  bool below = false;
  const long cap = static_cast<long>(lc.max_parameter / h) + 2;
  for (long k = 0; k < cap; ++k) {
    const VectorXd y2 = rk4_step(rhs, tau, y, h);
    const Eigen::Vector2d z2(y2[0], y2[1]);
    if (!all_finite(y2) || z2.norm() > escape)
      throw NonCompactError(
          "level-curve flow escaped to large amplitude: level set "
          "non-compact");
    const double sv = n.dot(z2 - z0);
    if (!below) {
      if (sv < 0.0) below = true;
    } else if (sv >= 0.0) {
      const SectionEvent ev = refine_crossing(rhs, y, tau, tau + h, n, z0);
      return {ev.tau, ev.state[2] / two_pi()};
    }
    y = y2;
    tau += h;
  }
  throw PeriodNotFoundError("loop did not close within the parameter cap");
}

// One fixed-step pass from the reference point measuring both the flow
// parameter to the target and the full return period. The angle is the
// ratio of the two, so the normalization is exactly consistent between
// forward and inverse evaluations of the chart.
struct AngleScan {
  double tau_target = -1.0;
  double period = -1.0;
};

AngleScan angle_scan_fixed(const Slice& s, const Eigen::Vector2d& ref,
                           const Eigen::Vector2d& target, double h,
                           double cap) {
  check_regular(s, ref);
  const Eigen::Vector2d n0 = s.vel(ref).normalized();
  const bool at_ref =
      (ref - target).norm() < 1e-12 * (1.0 + target.norm());
  Eigen::Vector2d nt = n0;
  if (!at_ref) {
    check_regular(s, target);
    nt = s.vel(target).normalized();
  }
  const OdeRhs rhs = s.rhs2();

  AngleScan out;
  if (at_ref) out.tau_target = 0.0;
  VectorXd y(2);
  y << ref[0], ref[1];
  double tau = 0.0;
  bool below0 = false;
  bool below_t = !at_ref && nt.dot(ref - target) < 0.0;
  while (tau < cap) {
    const VectorXd y2 = rk4_step(rhs, tau, y, h);
    const Eigen::Vector2d z2(y2[0], y2[1]);
    if (out.tau_target < 0.0) {
      const double sv = nt.dot(z2 - target);
      if (!below_t) {
        if (sv < 0.0) below_t = true;
      } else if (sv >= 0.0) {
        out.tau_target = refine_crossing(rhs, y, tau, tau + h, nt, target).tau;
      }
    }
    if (out.period < 0.0) {
      const double sv = n0.dot(z2 - ref);
      if (!below0) {
        if (sv < 0.0) below0 = true;
      } else if (sv >= 0.0) {
        out.period = refine_crossing(rhs, y, tau, tau + h, n0, ref).tau;
      }
    }
    if (out.tau_target >= 0.0 && out.period >= 0.0) return out;
    y = y2;
    tau += h;
  }
  throw ChartDomainError("angle location failed: target not reached");
}

Eigen::Vector2d flow_fixed(const Slice& s, const Eigen::Vector2d& z,
                           double tau, double h) {
  if (tau == 0.0) return z;
  const OdeRhs rhs = s.rhs2();
  const long n = std::max<long>(1, (long)std::ceil(std::abs(tau) / h));
  const double step = tau / double(n);
  VectorXd y(2);
  y << z[0], z[1];
  for (long k = 0; k < n; ++k) y = rk4_step(rhs, k * step, y, step);
  return {y[0], y[1]};
}

// Cubic Hermite interpolation on a sorted node grid; extrapolates with the
// boundary segments (callers keep arguments near the grid).
struct Hermite {
  std::vector<double> x, y, d;

  int segment(double xi) const {
    int lo = 0, hi = static_cast<int>(x.size()) - 1;
    while (hi - lo > 1) {
      const int mid = (lo + hi) / 2;
      (x[mid] <= xi ? lo : hi) = mid;
    }
    return lo;
  }

  double eval(double xi) const {
    const int k = segment(xi);
    const double w = x[k + 1] - x[k];
    const double u = (xi - x[k]) / w;
    const double h00 = (1 + 2 * u) * (1 - u) * (1 - u);
    const double h10 = u * (1 - u) * (1 - u);
    const double h01 = u * u * (3 - 2 * u);
    const double h11 = u * u * (u - 1);
    return h00 * y[k] + h10 * w * d[k] + h01 * y[k + 1] + h11 * w * d[k + 1];
  }

  // Invert a strictly monotone interpolant.
  double invert(double target, const char* what) const {
    const double slack = 1e-7 * (1.0 + std::abs(target));
    double lo = y.front(), hi = y.back();
    if (lo > hi) std::swap(lo, hi);
    if (target < lo - slack || target > hi + slack)
      throw ChartDomainError(std::string(what) +
                             " outside the chart profile range");
    const double clamped = std::clamp(target, lo, hi);
    auto g = [&](double xi) { return eval(xi) - clamped; };
    return brent_root(g, x.front(), x.back(),
                      1e-15 * std::max(1.0, std::abs(x.back())));
  }
};

Slice make_slice(const ScalarField& F, double t) {
  if (F.arity() != Arity::vertical)
    throw DimensionError("action-angle operations need a vertical field");
  if (F.dim() != 1)
    throw DimensionError("action-angle operations act on 1-DOF fields");
  return Slice{F, t};
}

}  // namespace

ScalarField freeze_degree(const ScalarField& F, double t,
                          const PhasePoint& anchor, int degree) {
  if (F.arity() != Arity::vertical)
    throw DimensionError("freeze_degree: field must be vertical");
  if (degree < 0 || degree >= F.dim())
    throw DimensionError("freeze_degree: degree out of range");
  const int k = degree;
  const PhasePoint base(t, anchor.q, anchor.p);
  auto embed = [base, k](const ExtendedPoint& z) {
    PhasePoint full = base;
    full.q[k] = z.q[0];
    full.p[k] = z.p[0];
    return full;
  };
  auto eval = [F, embed](const ExtendedPoint& z) { return F(embed(z)); };
  auto grad = [F, embed, k](const ExtendedPoint& z) {
    const Gradient g = F.gradient(embed(z));
    Gradient out{0.0, VectorXd::Zero(1), VectorXd::Zero(1), 0.0};
    out.dq[0] = g.dq[k];
    out.dp[0] = g.dp[k];
    return out;
  };
  return ScalarField::vertical(1, std::move(eval), std::move(grad));
}

double action_integral(const ScalarField& F, double t, double level,
                       double quad_tol, const LoopControl& lc) {
  if (!(quad_tol > 0.0)) throw ConfigError("action_integral: quad_tol <= 0");
  const Slice s = make_slice(F, t);
  const double qt = turning_point(s, level, lc);
  const LoopScan scan = trace_loop_adaptive(s, {qt, 0.0}, quad_tol, lc);
  if (!(scan.action > 0.0))
    throw NumericError("action_integral: loop integral came out non-positive");
  return scan.action;
}

double period(const ScalarField& F, double t, double level, double tol,
              const LoopControl& lc) {
  if (!(tol > 0.0)) throw ConfigError("period: tol <= 0");
  const Slice s = make_slice(F, t);
  const double qt = turning_point(s, level, lc);
  return trace_loop_adaptive(s, {qt, 0.0}, tol, lc).period;
}

ActionProfile build_profile(const ScalarField& slice_field, double t,
                            const std::vector<double>& levels,
                            double quad_tol, const LoopControl& lc) {
  ActionProfile prof;
  prof.slice = slice_field;
  const Slice s = make_slice(slice_field, t);
  for (const double level : levels) {
    const double qt = turning_point(s, level, lc);
    const LoopScan scan = trace_loop_adaptive(s, {qt, 0.0}, quad_tol, lc);
    prof.levels.push_back(level);
    prof.actions.push_back(scan.action);
    prof.periods.push_back(scan.period);
  }
  return prof;
}

// ---------------------------------------------------------------------------
// Charts
// ---------------------------------------------------------------------------

namespace {

struct DegreeChart {
  Slice slice;            // degree integral on the t = 0 fibre
  DegreeHints hints;
  double lo = 0.0, hi = 0.0;  // level window
  double h_loop = 0.0;        // frozen trace step
  Hermite action_of_level;
  Hermite period_of_level;
  Hermite turning_of_level;
  ActionProfile profile;

  void vet_level(double level) const {
    const double guard = 1e-3;
    for (const double crit : hints.separatrix_levels) {
      if (std::abs(level - crit) <= guard * std::max(1.0, std::abs(crit)))
        throw SeparatrixError("level " + format_double(level) +
                              " within the separatrix guard band of " +
                              format_double(crit));
      if (level > crit)
        throw NonCompactError("level " + format_double(level) +
                              " above the separatrix: level set non-compact");
    }
    const double slack = 1e-6 * (1.0 + std::abs(hi));
    if (level < lo - slack || level > hi + slack)
      throw ChartDomainError("level " + format_double(level) +
                             " outside the chart window [" +
                             format_double(lo) + ", " + format_double(hi) +
                             "]");
  }

  double turning(double level) const {
    // Interpolated seed plus two Newton polish steps; smooth in the level.
    double q = turning_of_level.eval(level);
    for (int it = 0; it < 2; ++it) {
      const Eigen::Vector2d z(q, 0.0);
      const double fq = slice.grad(z)[0];
      q -= (slice.value(z) - level) / fq;
    }
    return q;
  }
};

OdeRhs time_flow_rhs(const ScalarField& hamiltonian, int m) {
  return [hamiltonian, m](double t, const VectorXd& y) {
    const Gradient g =
        hamiltonian.gradient(PhasePoint(t, y.head(m), y.tail(m)));
    VectorXd dy(2 * m);
    dy.head(m) = g.dp;
    dy.tail(m) = -g.dq;
    return dy;
  };
}

PhasePoint time_flow_fixed(const ScalarField& hamiltonian, const PhasePoint& x,
                           double t_to) {
  if (t_to == x.t) return x;
  const int m = x.dim();
  const OdeRhs rhs = time_flow_rhs(hamiltonian, m);
  const long n =
      std::max<long>(1, (long)std::ceil(std::abs(t_to - x.t) / kTimeGrid));
  const double h = (t_to - x.t) / double(n);
  VectorXd y(2 * m);
  y.head(m) = x.q;
  y.tail(m) = x.p;
  for (long k = 0; k < n; ++k) {
    y = rk4_step(rhs, x.t + k * h, y, h);
    if (!all_finite(y))
      throw IncompletenessError("chart time flow left the finite domain");
  }
  return PhasePoint(t_to, y.head(m), y.tail(m));
}

}  // namespace

struct ActionAngleChart::Impl {
  enum class Mode { root, shift, rescale };

  Kind kind = Kind::initial_data;
  Mode mode = Mode::root;
  int m = 0;
  SampleRegion region;
  ActionFunction eff_h;
  std::vector<ActionProfile> profile_view;

  // initial-data payload
  TDSystem sys;
  std::vector<DegreeChart> degs;

  // shifted / retrivialized payload
  std::shared_ptr<const Impl> base;
  ActionFunction shift;

  // rescale payload (unit adapters; breaks canonicity unless reciprocal)
  double action_scale = 1.0;
  double angle_scale = 1.0;

  ChartPoint forward(const PhasePoint& x) const {
    if (mode == Mode::rescale) {
      ChartPoint c = base->forward(x);
      for (int k = 0; k < m; ++k) {
        c.actions[k] *= action_scale;
        c.angles[k] = wrap_angle(c.angles[k] * angle_scale);
      }
      return c;
    }
    if (mode == Mode::shift) {
      ChartPoint c = base->forward(x);
      const VectorXd g = shift.grad(c.actions);
      for (int k = 0; k < m; ++k)
        c.angles[k] = wrap_angle(c.angles[k] + x.t * g[k]);
      return c;
    }
    require_finite(x, "ActionAngleChart::forward");
    if (x.dim() != m)
      throw DimensionError("ActionAngleChart::forward: dimension mismatch");
    const PhasePoint x0 =
        (x.t == 0.0) ? x : time_flow_fixed(sys.hamiltonian, x, 0.0);
    ChartPoint c;
    c.t = x.t;
    c.actions.resize(m);
    c.angles.resize(m);
    for (int k = 0; k < m; ++k) {
      const DegreeChart& dc = degs[k];
      const Eigen::Vector2d z(x0.q[k], x0.p[k]);
      const double level = dc.slice.value(z);
      dc.vet_level(level);
      const double cap = 2.5 * dc.period_of_level.eval(level);
      const Eigen::Vector2d ref(dc.turning(level), 0.0);
      const AngleScan scan = angle_scan_fixed(dc.slice, ref, z, dc.h_loop, cap);
      c.actions[k] = dc.action_of_level.eval(level);
      c.angles[k] =
          wrap_angle(kAngleOrientation * two_pi() * scan.tau_target /
                     scan.period);
    }
    return c;
  }

  PhasePoint inverse(const ChartPoint& c) const {
    if (static_cast<int>(c.actions.size()) != m ||
        static_cast<int>(c.angles.size()) != m)
      throw DimensionError("ActionAngleChart::inverse: dimension mismatch");
    if (mode == Mode::rescale) {
      ChartPoint b = c;
      for (int k = 0; k < m; ++k) {
        b.actions[k] /= action_scale;
        b.angles[k] = wrap_angle(c.angles[k] / angle_scale);
      }
      return base->inverse(b);
    }
    if (mode == Mode::shift) {
      ChartPoint b = c;
      const VectorXd g = shift.grad(c.actions);
      for (int k = 0; k < m; ++k)
        b.angles[k] = wrap_angle(c.angles[k] - c.t * g[k]);
      return base->inverse(b);
    }
    PhasePoint x0(0.0, VectorXd::Zero(m), VectorXd::Zero(m));
    for (int k = 0; k < m; ++k) {
      const DegreeChart& dc = degs[k];
      const double level = dc.action_of_level.invert(c.actions[k], "action");
      dc.vet_level(level);
      const Eigen::Vector2d ref(dc.turning(level), 0.0);
      // Measure the period on this level with the same machinery forward
      // uses, so the angle normalization cancels exactly in round trips.
      LoopControl lc;
      lc.q_center = dc.hints.center;
      const double T = trace_loop_fixed(dc.slice, ref, dc.h_loop, lc).period;
      const double tau =
          kAngleOrientation * wrap_angle(c.angles[k]) / two_pi() * T;
      const Eigen::Vector2d z = flow_fixed(dc.slice, ref, tau, dc.h_loop);
      x0.q[k] = z[0];
      x0.p[k] = z[1];
    }
    if (c.t == 0.0) return x0;
    return time_flow_fixed(sys.hamiltonian, x0, c.t);
  }

  bool in_domain(const PhasePoint& x) const {
    if (mode != Mode::root) return base->in_domain(x);
    if (x.dim() != m || !is_finite(x)) return false;
    for (int k = 0; k < m; ++k) {
      // First integrals are constant along the projection flow, so the
      // slice level at t = 0 can be read off directly at x.
      const double level = sys.integrals[k](x);
      const double pad = 0.02 * (degs[k].hi - degs[k].lo);
      if (level < degs[k].lo + pad || level > degs[k].hi - pad) return false;
    }
    return true;
  }
};

ActionAngleChart::Kind ActionAngleChart::kind() const { return impl_->kind; }
int ActionAngleChart::dim() const { return impl_->m; }
const SampleRegion& ActionAngleChart::domain() const { return impl_->region; }
const ActionFunction& ActionAngleChart::effective_hamiltonian() const {
  return impl_->eff_h;
}
const std::vector<ActionProfile>& ActionAngleChart::profiles() const {
  return impl_->profile_view;
}
ChartPoint ActionAngleChart::forward(const PhasePoint& x) const {
  return impl_->forward(x);
}
PhasePoint ActionAngleChart::inverse(const ChartPoint& c) const {
  return impl_->inverse(c);
}
bool ActionAngleChart::in_domain(const PhasePoint& x) const {
  return impl_->in_domain(x);
}

ActionAngleChart::LevelInfo ActionAngleChart::level_diagnostics(
    int degree, double level) const {
  const Impl* root = impl_.get();
  while (root->mode != Impl::Mode::root) root = root->base.get();
  if (degree < 0 || degree >= root->m)
    throw DimensionError("level_diagnostics: degree out of range");
  const DegreeChart& dc = root->degs[degree];
  dc.vet_level(level);
  LoopControl lc;
  lc.q_center = dc.hints.center;
  const Eigen::Vector2d ref(dc.turning(level), 0.0);
  const LoopScan scan = trace_loop_fixed(dc.slice, ref, dc.h_loop, lc);
  return {level, scan.action, scan.period};
}

ActionAngleChart build_initial_data_chart(const TDSystem& sys,
                                          const SampleRegion& region,
                                          const StepControl& ctl) {
  require_system(sys, "build_initial_data_chart");
  region.validate();
  if (region.dim() != sys.m)
    throw DimensionError("build_initial_data_chart: region dimension "
                         "mismatch");
  if (sys.m > 1 && !sys.separable)
    throw ChartDomainError(
        "multi-degree chart construction requires a separable system");
  ctl.validate();

  auto impl = std::make_shared<ActionAngleChart::Impl>();
  impl->kind = ActionAngleChart::Kind::initial_data;
  impl->m = sys.m;
  impl->region = region;
  impl->eff_h = ActionFunction::zero(sys.m);
  impl->sys = sys;

  PhasePoint anchor(0.0, VectorXd::Zero(sys.m), VectorXd::Zero(sys.m));
  for (int k = 0; k < sys.m; ++k) {
    anchor.q[k] = 0.5 * (region.q_box[k][0] + region.q_box[k][1]);
    anchor.p[k] = 0.5 * (region.p_box[k][0] + region.p_box[k][1]);
  }

  const double calib_tol =
      std::min(1e-10, ctl.method == StepControl::Method::rk45_adaptive
                          ? ctl.abs_tol
                          : 1e-10);

  for (int k = 0; k < sys.m; ++k) {
    DegreeChart dc;
    dc.hints = sys.degree_hints(k);
    if (!dc.hints.compact_slices)
      throw NonCompactError("degree " + std::to_string(k + 1) +
                            " has non-compact level sets: no action-angle "
                            "chart exists");
    dc.slice.f = freeze_degree(sys.integrals[k], 0.0, anchor, k);
    dc.slice.t = 0.0;

    if (sys.m > 1) {
      // Separability spot check: the integral must not see other degrees.
      const Gradient g = sys.integrals[k].gradient(anchor);
      for (int j = 0; j < sys.m; ++j) {
        if (j == k) continue;
        if (std::abs(g.dq[j]) > 1e-9 || std::abs(g.dp[j]) > 1e-9)
          throw ChartDomainError(
              "integral " + std::to_string(k + 1) +
              " depends on degree " + std::to_string(j + 1) +
              ": system is not separable as declared");
      }
    }

    // Observed level range over the degree's box on the t = 0 slice.
    double lo_obs = std::numeric_limits<double>::infinity();
    double hi_obs = -lo_obs;
    const int grid = 9;
    for (int i = 0; i < grid; ++i)
      for (int j = 0; j < grid; ++j) {
        const double q = region.q_box[k][0] +
                         (region.q_box[k][1] - region.q_box[k][0]) * i /
                             double(grid - 1);
        const double p = region.p_box[k][0] +
                         (region.p_box[k][1] - region.p_box[k][0]) * j /
                             double(grid - 1);
        const double v = dc.slice.value({q, p});
        lo_obs = std::min(lo_obs, v);
        hi_obs = std::max(hi_obs, v);
      }
    dc.lo = std::max(lo_obs, dc.hints.level_min);
    dc.hi = std::min(hi_obs, dc.hints.level_max);
    for (const double crit : dc.hints.separatrix_levels) {
      const double guard = 1e-3 * std::max(1.0, std::abs(crit));
      if (dc.hi > crit - guard) dc.hi = crit - guard;
    }
    if (!(dc.hi > dc.lo + 1e-9))
      throw ChartDomainError("degree " + std::to_string(k + 1) +
                             ": empty level window over the region");

    LoopControl lc;
    lc.q_center = dc.hints.center;

    // Calibrate the frozen trace step from the mid-window period.
    const double mid = 0.5 * (dc.lo + dc.hi);
    const double q_mid = turning_point(dc.slice, mid, lc);
    const LoopScan mid_scan =
        trace_loop_adaptive(dc.slice, {q_mid, 0.0}, calib_tol, lc);
    dc.h_loop = mid_scan.period / double(kLoopSubdiv);

    dc.profile.slice = dc.slice.f;
    for (int i = 0; i < kProfileNodes; ++i) {
      const double level =
          dc.lo + (dc.hi - dc.lo) * double(i) / double(kProfileNodes - 1);
      const double qt = turning_point(dc.slice, level, lc);
      const LoopScan scan = trace_loop_fixed(dc.slice, {qt, 0.0}, dc.h_loop, lc);
      dc.profile.levels.push_back(level);
      dc.profile.actions.push_back(scan.action);
      dc.profile.periods.push_back(scan.period);
      dc.turning_of_level.x.push_back(level);
      dc.turning_of_level.y.push_back(qt);
      // dq/dlevel = 1 / dF/dq at the turning point
      dc.turning_of_level.d.push_back(1.0 /
                                      dc.slice.grad({qt, 0.0})[0]);
    }
    for (int i = 1; i < kProfileNodes; ++i)
      if (!(dc.profile.actions[i] > dc.profile.actions[i - 1]))
        throw ChartDomainError(
            "degree " + std::to_string(k + 1) +
            ": action is not strictly increasing across the level window");

    dc.action_of_level.x = dc.profile.levels;
    dc.action_of_level.y = dc.profile.actions;
    for (const double T : dc.profile.periods)
      dc.action_of_level.d.push_back(T / two_pi());

    dc.period_of_level.x = dc.profile.levels;
    dc.period_of_level.y = dc.profile.periods;
    // centered-difference slopes, one-sided at the ends
    const auto& lv = dc.profile.levels;
    const auto& pd = dc.profile.periods;
    for (int i = 0; i < kProfileNodes; ++i) {
      const int a = std::max(0, i - 1), b = std::min(kProfileNodes - 1, i + 1);
      dc.period_of_level.d.push_back((pd[b] - pd[a]) / (lv[b] - lv[a]));
    }

    impl->profile_view.push_back(dc.profile);
    impl->degs.push_back(std::move(dc));
  }

  return ActionAngleChart(impl);
}

namespace {

ActionFunction compose_sum(const ActionFunction& a, const ActionFunction& b) {
  ActionFunction out;
  out.m = a.m;
  out.value = [a, b](const VectorXd& I) { return a.value(I) + b.value(I); };
  out.grad = [a, b](const VectorXd& I) {
    return (a.grad(I) + b.grad(I)).eval();
  };
  return out;
}

std::shared_ptr<const ActionAngleChart::Impl> shifted_impl(
    const ActionAngleChart& chart, const ActionFunction& H,
    ActionAngleChart::Kind kind, const char* where) {
  if (H.m != chart.dim())
    throw DimensionError(std::string(where) + ": H(I) dimension mismatch");
  if (!H.value || !H.grad)
    throw ConfigError(std::string(where) + ": H(I) must provide a gradient");
  auto impl = std::make_shared<ActionAngleChart::Impl>();
  impl->kind = kind;
  impl->mode = ActionAngleChart::Impl::Mode::shift;
  impl->m = chart.dim();
  impl->region = chart.domain();
  impl->profile_view = chart.profiles();
  impl->base = chart.impl();
  impl->shift = H;
  impl->eff_h = compose_sum(chart.effective_hamiltonian(), H);
  return impl;
}

}  // namespace

ActionAngleChart shift_chart(const ActionAngleChart& chart,
                             const ActionFunction& H_of_I) {
  if (chart.kind() != ActionAngleChart::Kind::initial_data)
    throw ChartDomainError("shift_chart: base chart must be an initial-data "
                           "chart");
  return ActionAngleChart(shifted_impl(chart, H_of_I,
                                       ActionAngleChart::Kind::shifted,
                                       "shift_chart"));
}

ActionAngleChart retrivialize_chart(const ActionAngleChart& chart,
                                    const ActionFunction& F0) {
  // One non-compact coordinate x^0 = t; the displaced action I'_0 = I_0 - F0
  // shows up only through the effective Hamiltonian bookkeeping.
  return ActionAngleChart(shifted_impl(chart, F0,
                                       ActionAngleChart::Kind::retrivialized,
                                       "retrivialize_chart"));
}

ActionAngleChart rescale_chart(const ActionAngleChart& chart,
                               double action_scale, double angle_scale) {
  if (!(action_scale != 0.0) || !(angle_scale != 0.0))
    throw ConfigError("rescale_chart: scales must be nonzero");
  auto impl = std::make_shared<ActionAngleChart::Impl>();
  impl->kind = chart.kind();
  impl->mode = ActionAngleChart::Impl::Mode::rescale;
  impl->m = chart.dim();
  impl->region = chart.domain();
  impl->profile_view = chart.profiles();
  impl->base = chart.impl();
  impl->eff_h = chart.effective_hamiltonian();
  impl->action_scale = action_scale;
  impl->angle_scale = angle_scale;
  return ActionAngleChart(impl);
}

// ---------------------------------------------------------------------------
// Chart verification
// ---------------------------------------------------------------------------

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw DimensionError("fit_slope: need matching series of length >= 2");
  const double n = double(x.size());
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxy / sxx;
}

namespace {

// Central differences with one Richardson step at h = 1e-6; the column for
// input coordinate c holds d(I, phi)/dz_c. Angle differences are taken mod
// 2*pi.
VectorXd jac_column(const ActionAngleChart& chart, const PhasePoint& x, int c,
                    double h) {
  const int m = chart.dim();
  auto probe = [&](double step) {
    PhasePoint xp = x, xm = x;
    if (c < m) {
      xp.q[c] += step;
      xm.q[c] -= step;
    } else {
      xp.p[c - m] += step;
      xm.p[c - m] -= step;
    }
    const ChartPoint cp = chart.forward(xp);
    const ChartPoint cm = chart.forward(xm);
    VectorXd col(2 * m);
    for (int r = 0; r < m; ++r)
      col[r] = (cp.actions[r] - cm.actions[r]) / (2.0 * step);
    for (int r = 0; r < m; ++r)
      col[m + r] = angle_diff(cp.angles[r], cm.angles[r]) / (2.0 * step);
    return col;
  };
  const VectorXd d1 = probe(h);
  const VectorXd d2 = probe(0.5 * h);
  return (4.0 * d2 - d1) / 3.0;
}

}  // namespace

VerifyReport check_canonicity(const ActionAngleChart& chart,
                              const SampleRegion& region, double tol) {
  region.validate();
  const int m = chart.dim();
  RegionSampler sampler(region,
                        [&](const PhasePoint& x) { return chart.in_domain(x); });
  VerifyReport rep;
  rep.check_name = "canonicity";
  rep.tolerance = tol;
  rep.samples = region.count;
  rep.seed = region.seed;
  double worst = -1.0;
  for (int i = 0; i < region.count; ++i) {
    const PhasePoint x = sampler.next();
    Eigen::MatrixXd jac(2 * m, 2 * m);
    for (int c = 0; c < 2 * m; ++c) jac.col(c) = jac_column(chart, x, c, 1e-6);
    // {u, v} = u_p . v_q - u_q . v_p on each pair of chart functions
    auto bracket = [&](int row_u, int row_v) {
      const auto uq = jac.row(row_u).segment(0, m);
      const auto up = jac.row(row_u).segment(m, m);
      const auto vq = jac.row(row_v).segment(0, m);
      const auto vp = jac.row(row_v).segment(m, m);
      return up.dot(vq) - uq.dot(vp);
    };
    double r = 0.0;
    for (int i1 = 0; i1 < m; ++i1)
      for (int j = 0; j < m; ++j) {
        const double phi_i = bracket(m + i1, j) - (i1 == j ? 1.0 : 0.0);
        r = std::max(r, std::abs(phi_i));
        r = std::max(r, std::abs(bracket(i1, j)));          // {I, I}
        r = std::max(r, std::abs(bracket(m + i1, m + j)));  // {phi, phi}
      }
    if (r > worst) {
      worst = r;
      rep.worst_point = x;
    }
  }
  rep.max_residual = std::max(worst, 0.0);
  rep.pass = rep.max_residual <= tol;
  return rep;
}

VerifyReport hamiltonian_in_chart(const TDSystem& sys,
                                  const ActionAngleChart& chart,
                                  const SampleRegion& region) {
  require_system(sys, "hamiltonian_in_chart");
  region.validate();
  const double tol = 1e-5;
  const int m = chart.dim();

  RegionSampler sampler(region,
                        [&](const PhasePoint& x) { return chart.in_domain(x); });
  std::vector<PhasePoint> samples = sampler.take(region.count);

  // The Hamiltonian itself is only a first integral when autonomous; for
  // genuinely time-dependent systems the constant effective Hamiltonian is
  // what the chart realizes, so only the F_k pullbacks are probed.
  bool autonomous = true;
  for (int i = 0; i < std::min<int>(5, samples.size()); ++i)
    if (std::abs(sys.hamiltonian.gradient(samples[i]).dt) > 1e-12)
      autonomous = false;
  std::vector<ScalarField> fields = sys.integrals;
  if (autonomous) fields.push_back(sys.hamiltonian);

  VerifyReport rep;
  rep.check_name = "hamiltonian_in_chart";
  rep.tolerance = tol;
  rep.samples = region.count;
  rep.seed = region.seed;

  const double h = 1e-4;
  double worst = -1.0;
  for (const PhasePoint& x : samples) {
    const ChartPoint c = chart.forward(x);
    double r = 0.0;
    for (const ScalarField& G : fields) {
      for (int i = 0; i < m; ++i) {
        ChartPoint cp = c, cm = c;
        cp.angles[i] = wrap_angle(c.angles[i] + h);
        cm.angles[i] = wrap_angle(c.angles[i] - h);
        const double d =
            (G(chart.inverse(cp)) - G(chart.inverse(cm))) / (2.0 * h);
        r = std::max(r, std::abs(d));
      }
    }
    if (r > worst) {
      worst = r;
      rep.worst_point = x;
    }
  }
  rep.extra.emplace_back("max_dphi_derivative", std::max(worst, 0.0));

  double combined = std::max(worst, 0.0);
  if (chart.kind() != ActionAngleChart::Kind::initial_data) {
    // Dynamics check: along a real trajectory the shifted angles advance at
    // the dH/dI rates and the actions stay put.
    const StepControl fine = StepControl::rk45(1e-12, 1e-12);
    PhasePoint x = samples.front();
    const ChartPoint c0 = chart.forward(x);
    const VectorXd rates = chart.effective_hamiltonian().grad(c0.actions);
    std::vector<double> ts;
    std::vector<std::vector<double>> phis(m);
    VectorXd unwrapped = c0.angles;
    ChartPoint prev = c0;
    double idot_drift = 0.0;
    const int steps = 25;
    const double dt = 0.2;
    ts.push_back(x.t);
    for (int i = 0; i < m; ++i) phis[i].push_back(unwrapped[i]);
    for (int k = 1; k <= steps; ++k) {
      const Trajectory leg = integrate(sys, x, x.t + dt, fine);
      x = leg.back();
      const ChartPoint c = chart.forward(x);
      idot_drift = std::max(
          idot_drift, (c.actions - c0.actions).cwiseAbs().maxCoeff());
      for (int i = 0; i < m; ++i) {
        unwrapped[i] += angle_diff(c.angles[i], prev.angles[i]);
        phis[i].push_back(unwrapped[i]);
      }
      prev = c;
      ts.push_back(x.t);
    }
    double slope_err = 0.0;
    for (int i = 0; i < m; ++i)
      slope_err =
          std::max(slope_err, std::abs(fit_slope(ts, phis[i]) - rates[i]));
    rep.extra.emplace_back("action_drift", idot_drift);
    rep.extra.emplace_back("angle_rate_error", slope_err);
    combined = std::max({combined, idot_drift, slope_err});
  }

  rep.max_residual = combined;
  rep.pass = rep.max_residual <= tol;
  return rep;
}

}  // namespace liouville
