// Acceptance suite: one line per criterion, each pinned to its stated
// tolerance. Exits nonzero if any criterion fails.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "liouville/actionangle.hpp"
#include "liouville/bracket.hpp"
#include "liouville/csv.hpp"
#include "liouville/systems.hpp"
#include "liouville/verify.hpp"
#include "test_util.hpp"

using namespace liouville;
using testutil::Poly;

namespace {

namespace fs = std::filesystem;
const double kPi = 3.14159265358979323846;

int g_failures = 0;

void criterion(const std::string& name, const std::function<bool()>& body) {
  bool ok = false;
  std::string note;
  try {
    ok = body();
  } catch (const std::exception& e) {
    note = std::string(" (") + e.what() + ")";
  }
  std::printf("[%s] %s%s\n", ok ? "PASS" : "FAIL", name.c_str(), note.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

// --- CLI helpers -----------------------------------------------------------

fs::path work_dir() {
  const fs::path dir = fs::temp_directory_path() / "liouville_acceptance";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

RunResult run_cli(const std::string& args) {
  const fs::path out = work_dir() / "stdout.txt";
  const fs::path err = work_dir() / "stderr.txt";
  const std::string cmd = std::string(LIOUVILLE_CLI_PATH) + " " + args + " >" +
                          out.string() + " 2>" + err.string();
  const int raw = std::system(cmd.c_str());
  return {WEXITSTATUS(raw), slurp(out), slurp(err)};
}

fs::path write_config(const std::string& name, const std::string& body) {
  const fs::path p = work_dir() / name;
  std::ofstream f(p, std::ios::binary);
  f << body;
  return p;
}

// --- shared fixtures -------------------------------------------------------

const std::vector<std::string> kCisNames = {
    "free_particle", "harmonic", "pendulum", "td_oscillator",
    "separable_2dof"};

struct ChartFixture {
  std::string name;
  BuiltinSystem builtin;
  ActionAngleChart chart;
};

std::vector<ChartFixture> chart_fixtures() {
  std::vector<ChartFixture> out;
  const StepControl ctl = StepControl::rk45(1e-10, 1e-10);
  for (const auto& [name, spec] :
       std::vector<std::pair<std::string, SystemSpec>>{
           {"harmonic(1)", {"harmonic", {{"omega", 1.0}}}},
           {"harmonic(2)", {"harmonic", {{"omega", 2.0}}}},
           {"pendulum", {"pendulum", {}}},
           {"separable_2dof(1,2)",
            {"separable_2dof", {{"omega1", 1.0}, {"omega2", 2.0}}}}}) {
    BuiltinSystem b = make_builtin(spec);
    ActionAngleChart chart =
        build_initial_data_chart(b.system, b.default_region, ctl);
    out.push_back({name, std::move(b), std::move(chart)});
  }
  return out;
}

ActionFunction sum_of_actions(int m) {
  return {m, [](const VectorXd& I) { return I.sum(); },
          [m](const VectorXd&) { return VectorXd::Ones(m).eval(); }};
}

double chart_drift(const BuiltinSystem& b, const ActionAngleChart& chart) {
  const StepControl fine = StepControl::rk45(1e-11, 1e-11);
  PhasePoint x = b.default_x0;
  const ChartPoint c0 = chart.forward(x);
  double drift = 0.0;
  for (int leg = 1; leg <= 20; ++leg) {
    x = integrate(b.system, x, 0.5 * leg, fine).back();
    const ChartPoint c = chart.forward(x);
    drift = std::max(drift, (c.actions - c0.actions).cwiseAbs().maxCoeff());
    for (int k = 0; k < b.system.m; ++k)
      drift = std::max(drift, std::abs(angle_diff(c.angles[k], c0.angles[k])));
  }
  return drift;
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");

  criterion("bracket laws (V and T) at 100 random points, residual < 1e-9",
            [] {
    std::mt19937_64 rng(42);
    const int m = 2;
    for (int trial = 0; trial < 100; ++trial) {
      const Poly pf = testutil::random_poly(2 * m + 1, 3, rng);
      const Poly pg = testutil::random_poly(2 * m + 1, 3, rng);
      const Poly ph = testutil::random_poly(2 * m + 1, 3, rng);
      const ScalarField f = testutil::poly_field_v(pf, m);
      const ScalarField g = testutil::poly_field_v(pg, m);
      const ScalarField h = testutil::poly_field_v(ph, m);
      const PhasePoint x = testutil::random_point(m, rng);
      if (std::abs(poisson_v(f, g, x) + poisson_v(g, f, x)) >= 1e-9)
        return false;
      if (std::abs(poisson_v(f, g * h, x) - poisson_v(f, g, x) * h(x) -
                   g(x) * poisson_v(f, h, x)) >= 1e-9)
        return false;
      const ScalarField gh =
          testutil::poly_field_v(poisson_poly_v(pg, ph, m), m);
      const ScalarField hf =
          testutil::poly_field_v(poisson_poly_v(ph, pf, m), m);
      const ScalarField fg =
          testutil::poly_field_v(poisson_poly_v(pf, pg, m), m);
      if (std::abs(poisson_v(f, gh, x) + poisson_v(g, hf, x) +
                   poisson_v(h, fg, x)) >= 1e-9)
        return false;

      // extended bracket on the same draw, with p0 dependence added
      const Poly qf = testutil::random_poly(2 * m + 2, 3, rng);
      const Poly qg = testutil::random_poly(2 * m + 2, 3, rng);
      const Poly qh = testutil::random_poly(2 * m + 2, 3, rng);
      const ScalarField F = testutil::poly_field_t(qf, m);
      const ScalarField G = testutil::poly_field_t(qg, m);
      const ScalarField H = testutil::poly_field_t(qh, m);
      const ExtendedPoint X = testutil::random_extended(m, rng);
      if (std::abs(poisson_t(F, G, X) + poisson_t(G, F, X)) >= 1e-9)
        return false;
      if (std::abs(poisson_t(F, G * H, X) - poisson_t(F, G, X) * H(X) -
                   G(X) * poisson_t(F, H, X)) >= 1e-9)
        return false;
      const ScalarField GH =
          testutil::poly_field_t(poisson_poly_t(qg, qh, m), m);
      const ScalarField HF =
          testutil::poly_field_t(poisson_poly_t(qh, qf, m), m);
      const ScalarField FG =
          testutil::poly_field_t(poisson_poly_t(qf, qg, m), m);
      if (std::abs(poisson_t(F, GH, X) + poisson_t(G, HF, X) +
                   poisson_t(H, FG, X)) >= 1e-9)
        return false;
    }
    return true;
  });

  criterion(
      "autonomous lift: lifted brackets and projection residual < 1e-9 at "
      "200 samples on every built-in CIS",
      [] {
        for (const std::string& name : kCisNames) {
          const BuiltinSystem b = make_builtin({name, {}});
          SampleRegion region = b.default_region;
          region.count = 200;
          region.seed = 42;
          if (!check_lifted_involution(b.system, region, 1e-9).pass)
            return false;
          if (!check_projection(b.system, region, 1e-9).pass) return false;
        }
        return true;
      });

  criterion(
      "conservation: Ermakov-Lewis drift < 1e-6 over [0,10]; harmonic "
      "energy drift < 1e-8 over one period",
      [] {
        const StepControl ctl = StepControl::rk45(1e-10, 1e-10);
        const BuiltinSystem td = make_builtin(
            {"td_oscillator", {{"omega0_sq", 1.0}, {"a", 0.1}, {"b", 1.0}}});
        const Trajectory ttraj = integrate(td.system, td.default_x0, 10.0, ctl);
        if (!check_conservation(ttraj, td.system.integrals[0], 1e-6).pass)
          return false;
        const BuiltinSystem hb = make_builtin({"harmonic", {}});
        const Trajectory htraj =
            integrate(hb.system, hb.default_x0, 2.0 * kPi, ctl);
        return check_conservation(htraj, hb.system.hamiltonian, 1e-8).pass;
      });

  criterion(
      "action oracle: harmonic actions match E/omega to 1e-8 at 5 levels "
      "for omega in {1, 2}; pendulum deep-well action within 2%",
      [] {
        for (double omega : {1.0, 2.0}) {
          const double w2 = omega * omega;
          const ScalarField f = make_vertical_field(
              1, [w2](auto, const auto& q, const auto& p) {
                return 0.5 * (p[0] * p[0] + w2 * q[0] * q[0]);
              });
          for (double level : {0.1, 0.3, 0.5, 0.8, 1.2})
            if (std::abs(action_integral(f, 0.0, level, 1e-11) -
                         level / omega) >= 1e-8)
              return false;
        }
        const ScalarField pend = make_vertical_field(
            1, [](auto, const auto& q, const auto& p) {
              using std::cos;
              return 0.5 * p[0] * p[0] - cos(q[0]);
            });
        const double action = action_integral(pend, 0.0, -0.99, 1e-11);
        return std::abs(action - 0.01) / 0.01 < 0.02;
      });

  {
    std::vector<ChartFixture> fixtures;
    bool built = true;
    try {
      fixtures = chart_fixtures();
    } catch (const std::exception& e) {
      built = false;
      std::printf("[FAIL] chart construction (%s)\n", e.what());
      g_failures++;
    }

    if (built) {
      criterion(
          "canonicity: {phi,I}=1, {I,I}=0, {phi,phi}=0 within 1e-5 at 50 "
          "points, initial-data and shifted charts on all four systems",
          [&] {
            for (const ChartFixture& fx : fixtures) {
              SampleRegion region = fx.builtin.default_region;
              region.count = 50;
              region.seed = 42;
              if (!check_canonicity(fx.chart, region, 1e-5).pass) return false;
              const ActionAngleChart shifted =
                  shift_chart(fx.chart, sum_of_actions(fx.builtin.system.m));
              if (!check_canonicity(shifted, region, 1e-5).pass) return false;
            }
            return true;
          });

      criterion(
          "initial-data coordinates stay constant along trajectories "
          "(drift < 1e-5 over [0, 10])",
          [&] {
            for (const ChartFixture& fx : fixtures)
              if (chart_drift(fx.builtin, fx.chart) >= 1e-5) return false;
            // the genuinely time-dependent case
            const BuiltinSystem td = make_builtin({"td_oscillator", {}});
            const ActionAngleChart chart = build_initial_data_chart(
                td.system, td.default_region, StepControl::rk45(1e-10, 1e-10));
            return chart_drift(td, chart) < 1e-5;
          });

      criterion(
          "H(I) realization: shifted harmonic(1) rates 1 +- 1e-5 with "
          "action drift < 1e-5; 2-DOF Hamiltonian pulls back to I1 + 2 I2",
          [&] {
            const ChartFixture& h1 = fixtures[0];
            const ActionAngleChart shifted =
                shift_chart(h1.chart, sum_of_actions(1));
            const StepControl fine = StepControl::rk45(1e-11, 1e-11);
            PhasePoint x = h1.builtin.default_x0;
            ChartPoint prev = shifted.forward(x);
            const double i0 = prev.actions[0];
            std::vector<double> ts{0.0}, phis{prev.angles[0]};
            double unwrapped = prev.angles[0];
            double idrift = 0.0;
            for (int leg = 1; leg <= 20; ++leg) {
              x = integrate(h1.builtin.system, x, 0.5 * leg, fine).back();
              const ChartPoint c = shifted.forward(x);
              idrift = std::max(idrift, std::abs(c.actions[0] - i0));
              unwrapped += angle_diff(c.angles[0], prev.angles[0]);
              prev = c;
              ts.push_back(x.t);
              phis.push_back(unwrapped);
            }
            if (std::abs(fit_slope(ts, phis) - 1.0) >= 1e-5) return false;
            if (idrift >= 1e-5) return false;

            const ChartFixture& d2 = fixtures[3];
            RegionSampler sampler(d2.builtin.default_region,
                                  [&](const PhasePoint& y) {
                                    return d2.chart.in_domain(y);
                                  });
            for (int i = 0; i < 30; ++i) {
              const PhasePoint y = sampler.next();
              const ChartPoint c = d2.chart.forward(y);
              if (std::abs(d2.builtin.system.hamiltonian(y) -
                           (c.actions[0] + 2.0 * c.actions[1])) >= 1e-5)
                return false;
            }
            return true;
          });

      criterion(
          "action-only dependence: d/dphi of pulled-back H and F_k < 1e-5 "
          "on all eligible charts",
          [&] {
            for (const ChartFixture& fx : fixtures) {
              SampleRegion region = fx.builtin.default_region;
              region.count = 25;
              if (!hamiltonian_in_chart(fx.builtin.system, fx.chart, region)
                       .pass)
                return false;
            }
            const ChartFixture& h1 = fixtures[0];
            SampleRegion region = h1.builtin.default_region;
            region.count = 25;
            const ActionAngleChart shifted =
                shift_chart(h1.chart, sum_of_actions(1));
            return hamiltonian_in_chart(h1.builtin.system, shifted, region)
                .pass;
          });
    } else {
      for (int i = 0; i < 4; ++i) g_failures++;
      std::printf(
          "[FAIL] canonicity / constancy / H(I) realization / action-only "
          "dependence skipped: charts unavailable\n");
    }
  }

  criterion(
      "failure modes: free-particle chart exits 3 non-compact; pendulum "
      "level 0.9999 exits 3 separatrix; planted pair fails involution",
      [] {
        const fs::path free_cfg = write_config("free.conf",
                                               "system.name = free_particle\n"
                                               "system.m = 1\n");
        const RunResult r1 =
            run_cli("chart --config " + free_cfg.string() + " --out " +
                    (work_dir() / "free_out").string());
        if (r1.code != 3) return false;
        if (r1.err.find("non-compact") == std::string::npos) return false;

        const fs::path pend_cfg = write_config(
            "pend.conf",
            "system.name = pendulum\n"
            "region.count = 10\n"
            "chart.levels = [0.9999]\n"
            "trajectory.x0 = [0, 1, 0]\n"
            "trajectory.t_target = 1\n");
        const RunResult r2 =
            run_cli("chart --config " + pend_cfg.string() + " --out " +
                    (work_dir() / "pend_out").string());
        if (r2.code != 3) return false;
        if (r2.err.find("separatrix") == std::string::npos) return false;

        const BuiltinSystem adv = make_builtin({"adversarial_pair", {}});
        return !check_involution(adv.system, adv.default_region, 1e-9).pass;
      });

  criterion(
      "determinism: identical config and seed give byte-identical reports "
      "and CSVs",
      [] {
        const fs::path cfg = write_config(
            "det.conf",
            "system.name = td_oscillator\n"
            "region.count = 60\n"
            "region.seed = 42\n"
            "trajectory.x0 = [0, 1, 0]\n"
            "trajectory.t_target = 10\n");
        const fs::path out1 = work_dir() / "det1";
        const fs::path out2 = work_dir() / "det2";
        if (run_cli("verify --config " + cfg.string() + " --out " +
                    out1.string())
                .code != 0)
          return false;
        if (run_cli("verify --config " + cfg.string() + " --out " +
                    out2.string())
                .code != 0)
          return false;
        if (slurp(out1 / "verify_report.txt") !=
            slurp(out2 / "verify_report.txt"))
          return false;
        if (run_cli("simulate --config " + cfg.string() + " --out " +
                    out1.string())
                .code != 0)
          return false;
        if (run_cli("simulate --config " + cfg.string() + " --out " +
                    out2.string())
                .code != 0)
          return false;
        return slurp(out1 / "trajectory.csv") == slurp(out2 / "trajectory.csv");
      });

  if (g_failures == 0) {
    std::printf("all criteria passed\n");
    return 0;
  }
  std::printf("%d criteria failed\n", g_failures);
  return 1;
}
