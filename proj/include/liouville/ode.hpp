#pragma once

#include <functional>

#include "liouville/errors.hpp"
#include "liouville/phase.hpp"

namespace liouville {

// Two integrators only: fixed-step rk4 for deterministic, test-friendly runs
// and adaptive rk45 (Dormand-Prince) as the accuracy workhorse. Trajectories
// here are short and verification-grade, so adaptive error control matters
// more than long-time structure preservation.
struct StepControl {
  enum class Method { rk4, rk45_adaptive };

  Method method = Method::rk45_adaptive;
  double step = 1e-2;       // rk4 only
  double abs_tol = 1e-10;   // rk45 only
  double rel_tol = 1e-10;   // rk45 only
  int max_steps = 1000000;

  static StepControl rk4(double step, int max_steps = 1000000) {
    StepControl c;
    c.method = Method::rk4;
    c.step = step;
    c.max_steps = max_steps;
    return c;
  }
  static StepControl rk45(double abs_tol, double rel_tol,
                          int max_steps = 1000000) {
    StepControl c;
    c.method = Method::rk45_adaptive;
    c.abs_tol = abs_tol;
    c.rel_tol = rel_tol;
    c.max_steps = max_steps;
    return c;
  }

  void validate() const {
    if (max_steps < 1) throw ConfigError("StepControl: max_steps must be >= 1");
    if (method == Method::rk4) {
      if (!(step > 0.0)) throw ConfigError("StepControl: step must be > 0");
    } else {
      if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
        throw ConfigError("StepControl: tolerances must be > 0");
    }
  }
};

using OdeRhs = std::function<VectorXd(double s, const VectorXd& y)>;
using StepObserver = std::function<void(double s, const VectorXd& y)>;

struct OdeStats {
  long steps = 0;
  double max_step = 0.0;
  double est_error = 0.0;  // accumulated local error estimates (rk45)
};

VectorXd rk4_step(const OdeRhs& f, double s, const VectorXd& y, double h);

// Integrate y' = f(s, y) from s0 to s1 (either direction; backward runs
// negate the field rather than reversing arrays, keeping step control
// symmetric). The observer fires at every accepted step, endpoints excluded
// at the start and included at the end; the final s equals s1 exactly.
OdeStats integrate_ode(const OdeRhs& f, double s0, double s1, VectorXd& y,
                       const StepControl& ctl, const StepObserver& obs = {});

// Step-at-a-time adaptive rk45 driver for event detection: callers watch the
// state after each accepted step and refine inside [prev_s, s] themselves.
// Only advances in increasing s.
class AdaptiveStepper {
 public:
  AdaptiveStepper(OdeRhs f, double abs_tol, double rel_tol);

  void start(double s0, VectorXd y0);
  // Take one accepted step of size <= h_cap; returns the size taken.
  double step(double h_cap);

  double s() const { return s_; }
  const VectorXd& y() const { return y_; }
  double prev_s() const { return prev_s_; }
  const VectorXd& prev_y() const { return prev_y_; }
  long attempts() const { return attempts_; }

 private:
  OdeRhs f_;
  double abs_tol_, rel_tol_;
  double s_ = 0.0, prev_s_ = 0.0;
  VectorXd y_, prev_y_;
  double h_ = 0.0;
  long attempts_ = 0;
};

}  // namespace liouville
