#include "liouville/flow.hpp"

#include <random>
#include <sstream>

#include "doctest.h"
#include "liouville/csv.hpp"
#include "liouville/systems.hpp"
#include "test_util.hpp"

using namespace liouville;

namespace {
const double kPi = 3.14159265358979323846;
}

TEST_CASE("free particle under fixed-step rk4 is exact") {
  const TDSystem sys = make_system({"free_particle", {{"m", 1.0}}});
  const Trajectory traj =
      integrate(sys, PhasePoint(0.0, 0.0, 3.0), 1.0, StepControl::rk4(0.01));
  CHECK(traj.back().t == 1.0);
  CHECK(std::abs(traj.back().q[0] - 3.0) < 1e-12);
  CHECK(std::abs(traj.back().p[0] - 3.0) < 1e-12);
  CHECK(traj.points.size() == 101);
}

TEST_CASE("harmonic oscillator returns after one period") {
  const TDSystem sys = make_system({"harmonic", {{"omega", 1.0}}});
  const Trajectory traj = integrate(sys, PhasePoint(0.0, 1.0, 0.0), 2.0 * kPi,
                                    StepControl::rk45(1e-10, 1e-10));
  CHECK(traj.back().t == 2.0 * kPi);
  CHECK(std::abs(traj.back().q[0] - 1.0) < 1e-8);
  CHECK(std::abs(traj.back().p[0]) < 1e-8);
}

TEST_CASE("zero-length integration returns the initial point bit-exactly") {
  const TDSystem sys = make_system({"harmonic", {}});
  const PhasePoint x0(0.7, 0.3, -0.2);
  const Trajectory traj = integrate(sys, x0, 0.7, StepControl::rk45(1e-10, 1e-10));
  CHECK(traj.points.size() == 1);
  CHECK(traj.front().t == x0.t);
  CHECK(traj.front().q[0] == x0.q[0]);
  CHECK(traj.front().p[0] == x0.p[0]);
}

TEST_CASE("trajectories are strictly monotone in t, both directions") {
  const TDSystem sys = make_system({"pendulum", {}});
  for (double target : {3.0, -3.0}) {
    const Trajectory traj = integrate(sys, PhasePoint(0.0, 1.0, 0.0), target,
                                      StepControl::rk45(1e-10, 1e-10));
    for (size_t i = 1; i < traj.points.size(); ++i) {
      if (target > 0)
        CHECK(traj.points[i].t > traj.points[i - 1].t);
      else
        CHECK(traj.points[i].t < traj.points[i - 1].t);
    }
    CHECK(traj.back().t == target);
  }
}

TEST_CASE("flow composition agrees with the one-shot run") {
  const TDSystem sys = make_system({"td_oscillator", {}});
  const StepControl ctl = StepControl::rk45(1e-10, 1e-10);
  const PhasePoint x0(0.0, 1.0, 0.0);
  const Trajectory leg1 = integrate(sys, x0, 4.0, ctl);
  const Trajectory leg2 = integrate(sys, leg1.back(), 7.0, ctl);
  const Trajectory direct = integrate(sys, x0, 7.0, ctl);
  CHECK(std::abs(leg2.back().q[0] - direct.back().q[0]) < 1e-8);
  CHECK(std::abs(leg2.back().p[0] - direct.back().p[0]) < 1e-8);
}

TEST_CASE("initial_data_projection: free particle closed form") {
  const TDSystem sys = make_system({"free_particle", {{"m", 1.0}}});
  const ProjectionResult pr = initial_data_projection(
      sys, PhasePoint(1.0, 1.0, 1.0), StepControl::rk45(1e-12, 1e-12));
  CHECK(pr.point.t == 0.0);
  CHECK(std::abs(pr.point.q[0]) < 1e-12);  // q - p t
  CHECK(std::abs(pr.point.p[0] - 1.0) < 1e-12);
  CHECK(*pr.round_trip_error < 1e-11);
}

TEST_CASE("initial_data_projection is the identity on the t = 0 fibre") {
  const TDSystem sys = make_system({"pendulum", {}});
  const PhasePoint x(0.0, 0.9, -0.3);
  const ProjectionResult pr =
      initial_data_projection(sys, x, StepControl::rk45(1e-10, 1e-10));
  CHECK(pr.point.t == x.t);
  CHECK(pr.point.q[0] == x.q[0]);
  CHECK(pr.point.p[0] == x.p[0]);
  CHECK(*pr.round_trip_error == 0.0);
}

TEST_CASE("initial_data_projection round trip on the td oscillator") {
  const TDSystem sys = make_system({"td_oscillator", {}});
  const StepControl ctl = StepControl::rk45(1e-11, 1e-11);
  const Trajectory traj = integrate(sys, PhasePoint(0.0, 1.0, 0.0), 2.0, ctl);
  const ProjectionResult pr = initial_data_projection(sys, traj.back(), ctl);
  CHECK(*pr.round_trip_error < 1e-9);
}

TEST_CASE("projection is constant along a trajectory") {
  const TDSystem sys = make_system({"td_oscillator", {}});
  const StepControl ctl = StepControl::rk45(1e-11, 1e-11);
  const Trajectory traj = integrate(sys, PhasePoint(0.0, 0.8, 0.2), 5.0, ctl);
  const PhasePoint a =
      initial_data_projection(sys, traj.points[traj.points.size() / 2], ctl, false)
          .point;
  const PhasePoint b = initial_data_projection(sys, traj.back(), ctl, false).point;
  CHECK(std::abs(a.q[0] - b.q[0]) < 1e-8);
  CHECK(std::abs(a.p[0] - b.p[0]) < 1e-8);
}

TEST_CASE("slice_flow conserves its own field and freezes time") {
  const ScalarField f =
      make_vertical_field(1, [](auto, const auto& q, const auto& p) {
        return 0.5 * (q[0] * q[0] + p[0] * p[0]);
      });
  const PhasePoint x(1.7, 1.0, 0.0);
  const StepControl ctl = StepControl::rk45(1e-10, 1e-10);

  SUBCASE("full circle returns") {
    const PhasePoint y = slice_flow(f, x, 2.0 * kPi, ctl);
    CHECK(y.t == x.t);
    CHECK(std::abs(y.q[0] - 1.0) < 1e-8);
    CHECK(std::abs(y.p[0]) < 1e-8);
  }
  SUBCASE("tau = 0 is the identity") {
    const PhasePoint y = slice_flow(f, x, 0.0, ctl);
    CHECK(y.q[0] == x.q[0]);
    CHECK(y.p[0] == x.p[0]);
  }
  SUBCASE("field value is conserved along the flow") {
    const PhasePoint y = slice_flow(f, x, 1.234, ctl);
    CHECK(std::abs(f(y) - f(x)) < 1e-9);
  }
}

TEST_CASE("slice_flow of the momentum translates q") {
  const PhasePoint y = slice_flow(coord_p(1, 0), PhasePoint(0.3, 0.0, 1.0), 1.0,
                                  StepControl::rk45(1e-10, 1e-10));
  CHECK(y.t == 0.3);
  CHECK(std::abs(y.q[0] - 1.0) < 1e-12);
  CHECK(std::abs(y.p[0] - 1.0) < 1e-12);
}

TEST_CASE("first integrals are conserved over [0, 10]") {
  const StepControl ctl = StepControl::rk45(1e-10, 1e-10);
  for (const char* name : {"harmonic", "pendulum", "td_oscillator"}) {
    const BuiltinSystem b = make_builtin({name, {}});
    const Trajectory traj = integrate(b.system, b.default_x0, 10.0, ctl);
    for (const ScalarField& F : b.system.integrals) {
      const double f0 = F(traj.front());
      double drift = 0.0;
      for (const PhasePoint& x : traj.points)
        drift = std::max(drift, std::abs(F(x) - f0));
      CAPTURE(name);
      CHECK(drift < 1e-6);
    }
  }
}

TEST_CASE("the lift along a section keeps H* pinned at r") {
  const BuiltinSystem b = make_builtin({"td_oscillator", {}});
  const ScalarField h_star = lift_hamiltonian(b.system);
  const Trajectory traj = integrate(b.system, b.default_x0, 10.0,
                                    StepControl::rk45(1e-10, 1e-10));
  for (double r : {0.0, 0.25}) {
    double drift = 0.0;
    for (const PhasePoint& x : traj.points)
      drift = std::max(drift,
                       std::abs(h_star(section_h_r(b.system, r, x)) - r));
    CHECK(drift < 1e-6);
  }
}

TEST_CASE("td oscillator co-integrates its auxiliary pair") {
  const BuiltinSystem b = make_builtin({"td_oscillator", {}});
  const StepControl ctl = StepControl::rk45(1e-10, 1e-10);
  const Trajectory traj = integrate(b.system, b.default_x0, 5.0, ctl);
  REQUIRE(traj.aux.size() == traj.points.size());
  const ErmakovRho rho(OmegaSq{1.0, 0.1, 1.0});
  const Eigen::Vector2d expected = rho.at(5.0);
  CHECK(std::abs(traj.aux.back()[0] - expected[0]) < 1e-8);
  CHECK(std::abs(traj.aux.back()[1] - expected[1]) < 1e-8);
}

TEST_CASE("integration failures carry the documented error types") {
  SUBCASE("step budget exhaustion reports the last good point") {
    const TDSystem sys = make_system({"harmonic", {}});
    StepControl tiny = StepControl::rk45(1e-10, 1e-10, 5);
    CHECK_THROWS_AS(integrate(sys, PhasePoint(0.0, 1.0, 0.0), 10.0, tiny),
                    DivergenceError);
    try {
      integrate(sys, PhasePoint(0.0, 1.0, 0.0), 10.0, tiny);
    } catch (const DivergenceError& e) {
      CHECK(std::string(e.what()).find("last good point") != std::string::npos);
    }
  }
  SUBCASE("finite-time blow-up raises a numeric error") {
    TDSystem sys;
    sys.m = 1;
    sys.label = "quartic hill";
    sys.hamiltonian =
        make_vertical_field(1, [](auto, const auto& q, const auto& p) {
          return 0.5 * p[0] * p[0] - 0.25 * q[0] * q[0] * q[0] * q[0];
        });
    sys.integrals = {sys.hamiltonian};
    CHECK_THROWS_AS(integrate(sys, PhasePoint(0.0, 1.0, 2.0), 50.0,
                              StepControl::rk45(1e-8, 1e-8, 100000)),
                    NumericError);
  }
  SUBCASE("backward incompleteness surfaces through the projection") {
    TDSystem sys;
    sys.m = 1;
    sys.label = "quartic hill";
    sys.hamiltonian =
        make_vertical_field(1, [](auto, const auto& q, const auto& p) {
          return 0.5 * p[0] * p[0] - 0.25 * q[0] * q[0] * q[0] * q[0];
        });
    sys.integrals = {sys.hamiltonian};
    // the hill escape happens in finite time either way in t
    CHECK_THROWS_AS(initial_data_projection(sys, PhasePoint(40.0, 1.0, 2.0),
                                            StepControl::rk45(1e-8, 1e-8, 50000)),
                    IncompletenessError);
  }
}

TEST_CASE("step control rejects nonsense parameters") {
  StepControl bad_step = StepControl::rk4(0.0);
  CHECK_THROWS_AS(bad_step.validate(), ConfigError);
  StepControl bad_tol = StepControl::rk45(1e-10, -1.0);
  CHECK_THROWS_AS(bad_tol.validate(), ConfigError);
  StepControl bad_budget = StepControl::rk45(1e-10, 1e-10, 0);
  CHECK_THROWS_AS(bad_budget.validate(), ConfigError);
  const TDSystem sys = make_system({"harmonic", {}});
  CHECK_THROWS_AS(integrate(sys, PhasePoint(0.0, 1.0, 0.0), 1.0, bad_step),
                  ConfigError);
}

TEST_CASE("sample regions validate their boxes") {
  SampleRegion r = SampleRegion::cube(1, 0.0, 1.0, 1.0, 1.0);
  CHECK_NOTHROW(r.validate());
  r.count = 0;
  CHECK_THROWS_AS(RegionSampler{r}, ConfigError);
  r.count = 10;
  r.q_box[0] = {1.0, -1.0};
  CHECK_THROWS_AS(RegionSampler{r}, ConfigError);
}

TEST_CASE("trajectory CSV has the pinned header and survives a round trip") {
  const TDSystem sys = make_system({"separable_2dof", {}});
  const PhasePoint x0(0.0, (VectorXd(2) << 1.0, 0.5).finished(),
                      (VectorXd(2) << 0.0, 0.2).finished());
  const Trajectory traj = integrate(sys, x0, 1.0, StepControl::rk4(0.125));
  std::ostringstream os;
  write_trajectory_csv(os, traj);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  CHECK(header == "t,q1,q2,p1,p2");
  size_t rows = 0;
  std::string line;
  double first_q1 = -1;
  while (std::getline(is, line)) {
    if (rows == 0) {
      const size_t comma = line.find(',');
      first_q1 = std::strtod(line.c_str() + comma + 1, nullptr);
    }
    ++rows;
  }
  CHECK(rows == traj.points.size());
  CHECK(first_q1 == 1.0);  // 17 significant digits reproduce doubles exactly
}
