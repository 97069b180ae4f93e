#include "liouville/systems.hpp"

#include <cmath>

#include "liouville/ode.hpp"

namespace liouville {

double OmegaSq::value(double t) const { return w0sq + a * std::sin(b * t); }
double OmegaSq::derivative(double t) const {
  return a * b * std::cos(b * t);
}

ErmakovRho::ErmakovRho(OmegaSq w) : w_(w) {
  rho0_ = std::pow(w.value(0.0), -0.25);
}

Eigen::Vector2d ErmakovRho::at(double t) const {
  Eigen::Vector2d y(rho0_, 0.0);
  if (t == 0.0) return y;
  const OmegaSq w = w_;
  auto rhs = [&w](double s, const Eigen::Vector2d& u) {
    const double r = u[0];
    return Eigen::Vector2d(u[1], 1.0 / (r * r * r) - w.value(s) * r);
  };
  auto step = [&](double s, const Eigen::Vector2d& u, double h) {
    const Eigen::Vector2d k1 = rhs(s, u);
    const Eigen::Vector2d k2 = rhs(s + 0.5 * h, u + 0.5 * h * k1);
    const Eigen::Vector2d k3 = rhs(s + 0.5 * h, u + 0.5 * h * k2);
    const Eigen::Vector2d k4 = rhs(s + h, u + h * k3);
    return (u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)).eval();
  };
  constexpr double grid = 1.0 / 1024.0;
  const double dir = t > 0.0 ? 1.0 : -1.0;
  const double span = std::abs(t);
  const long n = static_cast<long>(std::floor(span / grid));
  double s = 0.0;
  for (long i = 0; i < n; ++i, s += grid) y = step(s * dir, y, dir * grid);
  const double rest = span - double(n) * grid;
  if (rest > 0.0) y = step(s * dir, y, dir * rest);
  if (!(y[0] > 0.0) || !std::isfinite(y[0]) || !std::isfinite(y[1]))
    throw NumericError("ErmakovRho: auxiliary solution left the valid range");
  return y;
}

ScalarField ermakov_lewis_field(std::shared_ptr<const ErmakovRho> rho,
                                OmegaSq w) {
  auto eval = [rho](const ExtendedPoint& x) {
    const Eigen::Vector2d r = rho->at(x.t);
    const double u = x.q[0] / r[0];
    const double v = r[0] * x.p[0] - r[1] * x.q[0];
    return 0.5 * (u * u + v * v);
  };
  auto grad = [rho, w](const ExtendedPoint& x) {
    const Eigen::Vector2d rr = rho->at(x.t);
    const double r = rr[0], rd = rr[1];
    const double rdd = 1.0 / (r * r * r) - w.value(x.t) * r;  // Ermakov rhs
    const double A = r * x.p[0] - rd * x.q[0];
    Gradient g{0.0, VectorXd::Zero(1), VectorXd::Zero(1), 0.0};
    g.dq[0] = x.q[0] / (r * r) - rd * A;
    g.dp[0] = r * A;
    g.dt = -x.q[0] * x.q[0] * rd / (r * r * r) + A * (rd * x.p[0] - rdd * x.q[0]);
    return g;
  };
  return ScalarField::vertical(1, std::move(eval), std::move(grad));
}

namespace {

ScalarField quadratic_oscillator_field(int m, std::vector<double> omega_sq) {
  auto eval = [omega_sq](const ExtendedPoint& x) {
    double h = 0.0;
    for (size_t k = 0; k < omega_sq.size(); ++k)
      h += 0.5 * (x.p[k] * x.p[k] + omega_sq[k] * x.q[k] * x.q[k]);
    return h;
  };
  auto grad = [m, omega_sq](const ExtendedPoint& x) {
    Gradient g{0.0, VectorXd::Zero(m), VectorXd::Zero(m), 0.0};
    for (size_t k = 0; k < omega_sq.size(); ++k) {
      g.dq[k] = omega_sq[k] * x.q[k];
      g.dp[k] = x.p[k];
    }
    return g;
  };
  return ScalarField::vertical(m, std::move(eval), std::move(grad));
}

// Energy of a single degree, as a field on the m-DOF space.
ScalarField degree_energy_field(int m, int k, double omega_sq) {
  auto eval = [k, omega_sq](const ExtendedPoint& x) {
    return 0.5 * (x.p[k] * x.p[k] + omega_sq * x.q[k] * x.q[k]);
  };
  auto grad = [m, k, omega_sq](const ExtendedPoint& x) {
    Gradient g{0.0, VectorXd::Zero(m), VectorXd::Zero(m), 0.0};
    g.dq[k] = omega_sq * x.q[k];
    g.dp[k] = x.p[k];
    return g;
  };
  return ScalarField::vertical(m, std::move(eval), std::move(grad));
}

void expect_params(const SystemSpec& spec,
                   std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : spec.params) {
    (void)value;
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) ok = true;
    if (!ok)
      throw ConfigError("system '" + spec.name + "': unknown parameter '" +
                        key + "'");
  }
}

BuiltinSystem make_free_particle(const SystemSpec& spec) {
  expect_params(spec, {"m"});
  const double md = spec.param("m", 1.0);
  const int m = static_cast<int>(md);
  if (m < 1 || double(m) != md)
    throw ConfigError("free_particle: m must be a positive integer");

  BuiltinSystem b;
  b.system.m = m;
  b.system.label = "free_particle(" + std::to_string(m) + ")";
  auto eval = [](const ExtendedPoint& x) { return 0.5 * x.p.squaredNorm(); };
  auto grad = [m](const ExtendedPoint& x) {
    return Gradient{0.0, VectorXd::Zero(m), x.p, 0.0};
  };
  b.system.hamiltonian = ScalarField::vertical(m, eval, grad);
  for (int k = 0; k < m; ++k) b.system.integrals.push_back(coord_p(m, k));
  b.system.separable = true;
  b.system.degrees.assign(m, DegreeHints{});
  for (auto& d : b.system.degrees) d.compact_slices = false;
  b.default_region = SampleRegion::cube(m, 0.0, 2.0, 1.0, 1.0);
  b.default_x0 = PhasePoint(0.0, VectorXd::Zero(m), VectorXd::Ones(m));
  return b;
}

BuiltinSystem make_harmonic(const SystemSpec& spec) {
  expect_params(spec, {"omega"});
  const double omega = spec.param("omega", 1.0);
  if (!(omega > 0.0)) throw ConfigError("harmonic: omega must be > 0");

  BuiltinSystem b;
  b.system.m = 1;
  b.system.label = "harmonic(omega=" + std::to_string(omega) + ")";
  b.system.hamiltonian = quadratic_oscillator_field(1, {omega * omega});
  b.system.integrals.push_back(b.system.hamiltonian);
  DegreeHints d;
  d.level_min = 0.05;
  b.system.degrees = {d};
  b.default_region = SampleRegion::cube(1, 0.0, 2.0, 1.2, 1.2);
  b.default_x0 = PhasePoint(0.0, 1.0, 0.0);
  return b;
}

BuiltinSystem make_pendulum(const SystemSpec& spec) {
  expect_params(spec, {});
  BuiltinSystem b;
  b.system.m = 1;
  b.system.label = "pendulum";
  auto eval = [](const ExtendedPoint& x) {
    return 0.5 * x.p[0] * x.p[0] - std::cos(x.q[0]);
  };
  auto grad = [](const ExtendedPoint& x) {
    Gradient g{0.0, VectorXd::Zero(1), VectorXd::Zero(1), 0.0};
    g.dq[0] = std::sin(x.q[0]);
    g.dp[0] = x.p[0];
    return g;
  };
  b.system.hamiltonian = ScalarField::vertical(1, eval, grad);
  b.system.integrals.push_back(b.system.hamiltonian);
  DegreeHints d;
  d.separatrix_levels = {1.0};
  // Default well window: inside the separatrix with padding, away from the
  // center at level -1.
  d.level_min = -0.95;
  d.level_max = -0.1;
  b.system.degrees = {d};
  b.default_region = SampleRegion::cube(1, 0.0, 2.0, 2.5, 1.2);
  b.default_x0 = PhasePoint(0.0, 1.0, 0.0);
  return b;
}

BuiltinSystem make_td_oscillator(const SystemSpec& spec) {
  expect_params(spec, {"omega0_sq", "a", "b"});
  OmegaSq w;
  w.w0sq = spec.param("omega0_sq", 1.0);
  w.a = spec.param("a", 0.1);
  w.b = spec.param("b", 1.0);
  if (!(w.w0sq > 0.0))
    throw ConfigError("td_oscillator: omega0_sq must be > 0");
  if (!(std::abs(w.a) < w.w0sq))
    throw ConfigError("td_oscillator: need |a| < omega0_sq");

  BuiltinSystem b;
  b.system.m = 1;
  b.system.label = "td_oscillator(w0sq=" + std::to_string(w.w0sq) +
                   ",a=" + std::to_string(w.a) + ",b=" + std::to_string(w.b) +
                   ")";
  auto eval = [w](const ExtendedPoint& x) {
    return 0.5 * (x.p[0] * x.p[0] + w.value(x.t) * x.q[0] * x.q[0]);
  };
  auto grad = [w](const ExtendedPoint& x) {
    Gradient g{0.0, VectorXd::Zero(1), VectorXd::Zero(1), 0.0};
    g.dq[0] = w.value(x.t) * x.q[0];
    g.dp[0] = x.p[0];
    g.dt = 0.5 * x.q[0] * x.q[0] * w.derivative(x.t);
    return g;
  };
  b.system.hamiltonian = ScalarField::vertical(1, eval, grad);
  auto rho = std::make_shared<const ErmakovRho>(w);
  b.system.integrals.push_back(ermakov_lewis_field(rho, w));
  DegreeHints d;
  d.level_min = 0.05;
  b.system.degrees = {d};
  // Co-integrate (rho, rho') with trajectories under the same step control.
  b.system.auxiliary.dim = 2;
  b.system.auxiliary.initial = (VectorXd(2) << rho->rho0(), 0.0).finished();
  b.system.auxiliary.rhs = [w](double t, const VectorXd& u) {
    VectorXd du(2);
    du[0] = u[1];
    du[1] = 1.0 / (u[0] * u[0] * u[0]) - w.value(t) * u[0];
    return du;
  };
  b.default_region = SampleRegion::cube(1, 0.0, 2.0, 1.2, 1.2);
  b.default_x0 = PhasePoint(0.0, 1.0, 0.0);
  return b;
}

BuiltinSystem make_separable_2dof(const SystemSpec& spec) {
  expect_params(spec, {"omega1", "omega2"});
  const double w1 = spec.param("omega1", 1.0);
  const double w2 = spec.param("omega2", 2.0);
  if (!(w1 > 0.0) || !(w2 > 0.0))
    throw ConfigError("separable_2dof: frequencies must be > 0");

  BuiltinSystem b;
  b.system.m = 2;
  b.system.label = "separable_2dof(" + std::to_string(w1) + "," +
                   std::to_string(w2) + ")";
  b.system.hamiltonian =
      quadratic_oscillator_field(2, {w1 * w1, w2 * w2});
  b.system.integrals.push_back(degree_energy_field(2, 0, w1 * w1));
  b.system.integrals.push_back(degree_energy_field(2, 1, w2 * w2));
  DegreeHints d;
  d.level_min = 0.05;
  b.system.degrees = {d, d};
  b.default_region = SampleRegion::cube(2, 0.0, 2.0, 1.2, 1.2);
  b.default_x0 =
      PhasePoint(0.0, (VectorXd(2) << 1.0, 0.8).finished(), VectorXd::Zero(2));
  return b;
}

// Deliberately non-involutive "integrals": q1 and p1 on a 2-DOF free
// particle. Exercises the failure paths of the verification suite.
BuiltinSystem make_adversarial_pair(const SystemSpec& spec) {
  expect_params(spec, {});
  BuiltinSystem b = make_free_particle({"free_particle", {{"m", 2.0}}});
  b.system.label = "adversarial_pair";
  b.system.integrals.clear();
  b.system.integrals.push_back(coord_q(2, 0));
  b.system.integrals.push_back(coord_p(2, 0));
  b.system.separable = false;
  b.is_cis = false;
  return b;
}

}  // namespace

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names = {
      "free_particle", "harmonic",        "pendulum",
      "td_oscillator", "separable_2dof", "adversarial_pair"};
  return names;
}

BuiltinSystem make_builtin(const SystemSpec& spec) {
  if (spec.name == "free_particle") return make_free_particle(spec);
  if (spec.name == "harmonic") return make_harmonic(spec);
  if (spec.name == "pendulum") return make_pendulum(spec);
  if (spec.name == "td_oscillator") return make_td_oscillator(spec);
  if (spec.name == "separable_2dof") return make_separable_2dof(spec);
  if (spec.name == "adversarial_pair") return make_adversarial_pair(spec);
  throw ConfigError("unknown system '" + spec.name + "'");
}

}  // namespace liouville
