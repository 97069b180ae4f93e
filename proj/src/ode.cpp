#include "liouville/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace liouville {

VectorXd rk4_step(const OdeRhs& f, double s, const VectorXd& y, double h) {
  const VectorXd k1 = f(s, y);
  const VectorXd k2 = f(s + 0.5 * h, y + 0.5 * h * k1);
  const VectorXd k3 = f(s + 0.5 * h, y + 0.5 * h * k2);
  const VectorXd k4 = f(s + h, y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

struct Dopri5Step {
  VectorXd y;       // 5th-order result
  double err_norm;  // scaled sup-norm of the embedded error estimate
};

Dopri5Step dopri5_step(const OdeRhs& f, double s, const VectorXd& y, double h,
                       double abs_tol, double rel_tol) {
  const VectorXd k1 = f(s, y);
  const VectorXd k2 = f(s + c2 * h, y + h * (a21 * k1));
  const VectorXd k3 = f(s + c3 * h, y + h * (a31 * k1 + a32 * k2));
  const VectorXd k4 = f(s + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
  const VectorXd k5 =
      f(s + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
  const VectorXd k6 = f(
      s + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
  VectorXd y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
  const VectorXd k7 = f(s + h, y5);
  const VectorXd err =
      h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

  double norm = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double scale =
        abs_tol + rel_tol * std::max(std::abs(y[i]), std::abs(y5[i]));
    norm = std::max(norm, std::abs(err[i]) / scale);
  }
  return {std::move(y5), norm};
}

double initial_step(const OdeRhs& f, double s0, const VectorXd& y0,
                    double span, double abs_tol, double rel_tol) {
  const VectorXd f0 = f(s0, y0);
  double d0 = 0.0, d1 = 0.0;
  for (Eigen::Index i = 0; i < y0.size(); ++i) {
    const double sc = abs_tol + rel_tol * std::abs(y0[i]);
    d0 = std::max(d0, std::abs(y0[i]) / sc);
    d1 = std::max(d1, std::abs(f0[i]) / sc);
  }
  double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  return std::min(h, span);
}

void check_state(double s, const VectorXd& y) {
  if (!std::isfinite(s) || !all_finite(y))
    throw NumericError("integration produced a non-finite state at s=" +
                       std::to_string(s));
}

}  // namespace

AdaptiveStepper::AdaptiveStepper(OdeRhs f, double abs_tol, double rel_tol)
    : f_(std::move(f)), abs_tol_(abs_tol), rel_tol_(rel_tol) {}

void AdaptiveStepper::start(double s0, VectorXd y0) {
  s_ = prev_s_ = s0;
  y_ = prev_y_ = std::move(y0);
  h_ = initial_step(f_, s0, y_, std::numeric_limits<double>::infinity(),
                    abs_tol_, rel_tol_);
  attempts_ = 0;
}

double AdaptiveStepper::step(double h_cap) {
  double h = std::min(h_, h_cap);
  for (;;) {
    if (++attempts_ > 100000000L)
      throw DivergenceError("AdaptiveStepper: attempt budget exhausted");
    const Dopri5Step trial = dopri5_step(f_, s_, y_, h, abs_tol_, rel_tol_);
    if (trial.err_norm <= 1.0) {
      prev_s_ = s_;
      prev_y_ = y_;
      s_ += h;
      y_ = trial.y;
      check_state(s_, y_);
      const double grow =
          (trial.err_norm == 0.0)
              ? 5.0
              : std::clamp(0.9 * std::pow(trial.err_norm, -0.2), 0.2, 5.0);
      h_ = h * grow;
      return h;
    }
    h *= std::max(0.1, 0.9 * std::pow(trial.err_norm, -0.2));
    if (!(h > 0.0) || s_ + h == s_)
      throw NumericError("AdaptiveStepper: step size underflow at s=" +
                         std::to_string(s_));
  }
}

OdeStats integrate_ode(const OdeRhs& f, double s0, double s1, VectorXd& y,
                       const StepControl& ctl, const StepObserver& obs) {
  ctl.validate();
  if (!std::isfinite(s0) || !std::isfinite(s1))
    throw NumericError("integrate_ode: non-finite interval");
  if (!all_finite(y)) throw NumericError("integrate_ode: non-finite state");

  OdeStats stats;
  if (s1 == s0) return stats;

  const double dir = (s1 > s0) ? 1.0 : -1.0;
  const double span = std::abs(s1 - s0);
  // Work in sigma >= 0 along the (possibly negated) field.
  auto g = [&](double sigma, const VectorXd& u) -> VectorXd {
    return dir * f(s0 + dir * sigma, u);
  };

  if (ctl.method == StepControl::Method::rk4) {
    const long n = std::max<long>(1, static_cast<long>(std::ceil(
                                         span / ctl.step - 1e-12)));
    if (n > ctl.max_steps)
      throw DivergenceError("rk4: needs " + std::to_string(n) +
                            " steps > max_steps");
    const double h = span / double(n);
    double sigma = 0.0;
    for (long i = 0; i < n; ++i) {
      y = rk4_step(g, sigma, y, h);
      sigma = (i + 1 == n) ? span : sigma + h;
      check_state(sigma, y);
      ++stats.steps;
      stats.max_step = std::max(stats.max_step, h);
      if (obs) obs(s0 + dir * sigma, y);
    }
    return stats;
  }

  double sigma = 0.0;
  double h = initial_step(g, 0.0, y, span, ctl.abs_tol, ctl.rel_tol);
  while (sigma < span) {
    if (stats.steps >= ctl.max_steps)
      throw DivergenceError("rk45: max_steps exceeded at s=" +
                            std::to_string(s0 + dir * sigma));
    bool last = false;
    if (sigma + h >= span) {
      h = span - sigma;
      last = true;
    }
    const Dopri5Step trial =
        dopri5_step(g, sigma, y, h, ctl.abs_tol, ctl.rel_tol);
    ++stats.steps;
    if (trial.err_norm <= 1.0) {
      y = trial.y;
      sigma = last ? span : sigma + h;
      check_state(sigma, y);
      stats.max_step = std::max(stats.max_step, h);
      stats.est_error += trial.err_norm * ctl.abs_tol;
      if (obs) obs(s0 + dir * sigma, y);
      const double grow =
          (trial.err_norm == 0.0)
              ? 5.0
              : std::clamp(0.9 * std::pow(trial.err_norm, -0.2), 0.2, 5.0);
      h *= grow;
    } else {
      h *= std::max(0.1, 0.9 * std::pow(trial.err_norm, -0.2));
      if (!(h > 0.0) || sigma + h == sigma)
        throw NumericError("rk45: step size underflow at s=" +
                           std::to_string(s0 + dir * sigma));
    }
  }
  return stats;
}

}  // namespace liouville
