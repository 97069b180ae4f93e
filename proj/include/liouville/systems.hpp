#pragma once

#include <Eigen/Core>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "liouville/sampling.hpp"
#include "liouville/system.hpp"

namespace liouville {

// Named system selection, as used by the CLI configuration.
struct SystemSpec {
  std::string name;
  std::map<std::string, double> params;

  double param(const std::string& key, double fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  }
};

struct BuiltinSystem {
  TDSystem system;
  SampleRegion default_region;
  PhasePoint default_x0;
  bool is_cis = true;  // the adversarial plant is deliberately not one
};

// Frequency-squared family omega^2(t) = w0sq + a*sin(b*t). Restricting to
// this family with |a| < w0sq keeps the Ermakov auxiliary function bounded
// and positive.
struct OmegaSq {
  double w0sq = 1.0;
  double a = 0.0;
  double b = 1.0;

  double value(double t) const;
  double derivative(double t) const;
};

// Solution of the Ermakov equation rho'' + omega^2(t) rho = rho^-3 seeded at
// rho(0) = omega(0)^(-1/2), rho'(0) = 0. Evaluated on a fixed fine RK4 grid
// so the map t -> (rho, rho') is deterministic and smooth at the scale of
// finite-difference probes.
class ErmakovRho {
 public:
  explicit ErmakovRho(OmegaSq w);
  Eigen::Vector2d at(double t) const;  // (rho, rho_dot)
  double rho0() const { return rho0_; }

 private:
  OmegaSq w_;
  double rho0_;
};

// Exact invariant of the time-dependent oscillator,
// F = [ (q/rho)^2 + (rho p - rho' q)^2 ] / 2.
ScalarField ermakov_lewis_field(std::shared_ptr<const ErmakovRho> rho,
                                OmegaSq w);

const std::vector<std::string>& builtin_names();

// Built-ins: free_particle(m), harmonic(omega), pendulum,
// td_oscillator(omega0_sq, a, b), separable_2dof(omega1, omega2), and the
// planted adversarial_pair whose declared "integrals" are q1, p1.
BuiltinSystem make_builtin(const SystemSpec& spec);

inline TDSystem make_system(const SystemSpec& spec) {
  return make_builtin(spec).system;
}

}  // namespace liouville
