#include "liouville/systems.hpp"

#include <random>

#include "doctest.h"
#include "liouville/flow.hpp"
#include "test_util.hpp"

using namespace liouville;

TEST_CASE("system construction validates names and parameters") {
  CHECK_THROWS_AS(make_system({"kepler", {}}), ConfigError);
  CHECK_THROWS_AS(make_system({"harmonic", {{"omega", 0.0}}}), ConfigError);
  CHECK_THROWS_AS(make_system({"harmonic", {{"omeg", 1.0}}}), ConfigError);
  CHECK_THROWS_AS(make_system({"free_particle", {{"m", 1.5}}}), ConfigError);
  CHECK_THROWS_AS(make_system({"free_particle", {{"m", 0.0}}}), ConfigError);
  CHECK_THROWS_AS(
      make_system({"td_oscillator", {{"omega0_sq", 1.0}, {"a", 1.0}}}),
      ConfigError);
  CHECK_THROWS_AS(make_system({"separable_2dof", {{"omega1", -1.0}}}),
                  ConfigError);
}

TEST_CASE("built-in inventory and degree counts") {
  CHECK(make_system({"harmonic", {}}).m == 1);
  CHECK(make_system({"pendulum", {}}).m == 1);
  CHECK(make_system({"td_oscillator", {}}).m == 1);
  CHECK(make_system({"separable_2dof", {}}).m == 2);
  CHECK(make_system({"free_particle", {{"m", 3.0}}}).m == 3);
  for (const std::string& name : builtin_names())
    CHECK_NOTHROW(make_builtin({name, {}}));
}

TEST_CASE("integral count always matches the degree count") {
  for (const std::string& name : builtin_names()) {
    const TDSystem sys = make_system({name, {}});
    CHECK(static_cast<int>(sys.integrals.size()) == sys.m);
    CHECK(static_cast<int>(sys.degrees.size()) == sys.m);
  }
}

TEST_CASE("analytic gradients of every built-in pass the FD contract") {
  std::mt19937_64 rng(2026);
  for (const std::string& name : builtin_names()) {
    const TDSystem sys = make_system({name, {}});
    CAPTURE(name);
    for (int i = 0; i < 50; ++i) {
      PhasePoint x = testutil::random_point(sys.m, rng, 1.1);
      x.t = testutil::uniform(rng, 0.0, 3.0);
      CHECK(testutil::grad_fd_error(sys.hamiltonian, x, 1e-5) < 1e-6);
      for (const ScalarField& F : sys.integrals)
        CHECK(testutil::grad_fd_error(F, x, 1e-5) < 1e-6);
    }
  }
}

TEST_CASE("Ermakov auxiliary solution") {
  SUBCASE("constant frequency pins rho at omega^(-1/2)") {
    const ErmakovRho rho(OmegaSq{4.0, 0.0, 1.0});
    const double expected = std::pow(4.0, -0.25);
    for (double t : {0.0, 0.37, 1.0, 5.0, -2.0}) {
      const Eigen::Vector2d r = rho.at(t);
      CHECK(r[0] == doctest::Approx(expected).epsilon(1e-10));
      CHECK(std::abs(r[1]) < 1e-10);
    }
  }
  SUBCASE("solves the Ermakov equation along the modulated family") {
    const OmegaSq w{1.0, 0.1, 1.0};
    const ErmakovRho rho(w);
    // second difference approximates rho'' = rho^-3 - omega^2 rho
    const double t = 1.3, h = 1e-4;
    const double rdd =
        (rho.at(t + h)[0] - 2.0 * rho.at(t)[0] + rho.at(t - h)[0]) / (h * h);
    const double r = rho.at(t)[0];
    CHECK(rdd == doctest::Approx(1.0 / (r * r * r) - w.value(t) * r)
                     .epsilon(1e-5));
  }
}

TEST_CASE("Ermakov-Lewis invariant is constant along td oscillator runs") {
  const BuiltinSystem b = make_builtin({"td_oscillator", {}});
  const Trajectory traj = integrate(b.system, PhasePoint(0.0, 0.6, 0.4), 8.0,
                                    StepControl::rk45(1e-10, 1e-10));
  const ScalarField& F = b.system.integrals[0];
  const double f0 = F(traj.front());
  for (size_t i = 0; i < traj.points.size(); i += 7)
    CHECK(F(traj.points[i]) == doctest::Approx(f0).epsilon(1e-7));
}

TEST_CASE("compactness declarations gate chart eligibility") {
  CHECK_FALSE(
      make_system({"free_particle", {{"m", 1.0}}}).degrees[0].compact_slices);
  CHECK(make_system({"harmonic", {}}).degrees[0].compact_slices);
  CHECK(make_system({"pendulum", {}}).degrees[0].separatrix_levels ==
        std::vector<double>{1.0});
}

TEST_CASE("default regions are valid and centered on the systems") {
  for (const std::string& name : builtin_names()) {
    const BuiltinSystem b = make_builtin({name, {}});
    CHECK_NOTHROW(b.default_region.validate());
    CHECK(b.default_region.dim() == b.system.m);
    CHECK(b.default_x0.dim() == b.system.m);
  }
}
