// Command-line front end: simulate | verify | chart | transform.
//
// Exit codes, stable across releases:
//   0  success, all checks passed
//   1  configuration or expression parse error
//   2  verification failure or numeric failure
//   3  chart ineligibility (non-compact level sets, separatrix guard)

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "liouville/actionangle.hpp"
#include "liouville/configfile.hpp"
#include "liouville/csv.hpp"
#include "liouville/expr.hpp"
#include "liouville/verify.hpp"

namespace {

using namespace liouville;

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
};

RunConfig load_config(const CommonArgs& args) {
  ConfigFile cfg = ConfigFile::parse_file(args.config_path);
  for (const std::string& fragment : args.overrides)
    cfg.set_override(fragment);
  RunConfig rc = load_run_config(cfg);
  if (args.seed) rc.region.seed = *args.seed;
  if (args.out_dir) rc.out_dir = *args.out_dir;
  return rc;
}

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write output file '" + path.string() + "'");
  out << body;
}

std::filesystem::path out_path(const RunConfig& rc, const std::string& name) {
  std::filesystem::create_directories(rc.out_dir);
  return std::filesystem::path(rc.out_dir) / name;
}

int report_outcome(const std::vector<VerifyReport>& reports,
                   const RunConfig& rc, const std::string& file_name) {
  std::string body = "system: " + rc.builtin.system.label + "\n";
  body += "seed: " + std::to_string(rc.region.seed) + "\n\n";
  for (const VerifyReport& rep : reports) body += rep.block() + "\n";
  for (const VerifyReport& rep : reports) body += rep.summary_line() + "\n";
  write_file(out_path(rc, file_name), body);
  std::cout << body;
  for (const VerifyReport& rep : reports)
    if (!rep.pass) return 2;
  return 0;
}

int run_simulate(const CommonArgs& args) {
  RunConfig rc = load_config(args);
  const Trajectory traj =
      integrate(rc.builtin.system, rc.x0, rc.t_target, rc.step);
  std::ostringstream csv;
  write_trajectory_csv(csv, traj);
  const auto path = out_path(rc, "trajectory.csv");
  write_file(path, csv.str());
  std::cout << "SIMULATE " << rc.builtin.system.label
            << " points=" << traj.points.size()
            << " final_t=" << format_double(traj.back().t)
            << " csv=" << path.string() << "\n";
  return 0;
}

int run_verify(const CommonArgs& args) {
  RunConfig rc = load_config(args);
  const TDSystem& sys = rc.builtin.system;
  std::vector<VerifyReport> reports;
  reports.push_back(check_involution(sys, rc.region, 1e-9));
  reports.push_back(check_first_integrals(sys, rc.region, 1e-8));
  reports.push_back(check_independence(sys, rc.region, 1e-6));
  reports.push_back(check_projection(sys, rc.region, 1e-12));
  reports.push_back(check_lifted_involution(sys, rc.region, 1e-9));
  const Trajectory traj = integrate(sys, rc.x0, rc.t_target, rc.step);
  for (int k = 0; k < sys.m; ++k) {
    VerifyReport rep = check_conservation(traj, sys.integrals[k], 1e-6);
    rep.check_name = "conservation_F" + std::to_string(k + 1);
    reports.push_back(std::move(rep));
  }
  return report_outcome(reports, rc, "verify_report.txt");
}

SampleRegion capped(const SampleRegion& region, int cap) {
  SampleRegion r = region;
  r.count = std::min(r.count, cap);
  return r;
}

int run_chart(const CommonArgs& args) {
  RunConfig rc = load_config(args);
  const TDSystem& sys = rc.builtin.system;
  const ActionAngleChart chart =
      build_initial_data_chart(sys, rc.region, rc.step);

  const Trajectory traj = integrate(sys, rc.x0, rc.t_target, rc.step);
  std::ostringstream tcsv, ccsv;
  write_trajectory_csv(tcsv, traj);
  write_chart_csv(ccsv, traj, chart);
  write_file(out_path(rc, "trajectory.csv"), tcsv.str());
  write_file(out_path(rc, "chart.csv"), ccsv.str());

  for (const double level : rc.chart_levels) {
    const auto info = chart.level_diagnostics(0, level);
    std::cout << "LEVEL " << format_double(info.level)
              << " action=" << format_double(info.action)
              << " period=" << format_double(info.period) << "\n";
  }

  const SampleRegion check_region = capped(rc.region, 50);
  std::vector<VerifyReport> reports;
  reports.push_back(check_canonicity(chart, check_region, 1e-5));
  reports.push_back(hamiltonian_in_chart(sys, chart, check_region));
  return report_outcome(reports, rc, "chart_report.txt");
}

int run_transform(const CommonArgs& args) {
  RunConfig rc = load_config(args);
  const TDSystem& sys = rc.builtin.system;
  if (rc.h_of_i.empty())
    throw ConfigError("transform requires transform.h_of_i");
  const ActionFunction h = compile_action_function(rc.h_of_i, sys.m);

  const ActionAngleChart base =
      build_initial_data_chart(sys, rc.region, rc.step);
  const ActionAngleChart chart = shift_chart(base, h);

  // Sample the shifted coordinates along one trajectory and fit the rates.
  const int legs = 25;
  const double dt = (rc.t_target - rc.x0.t) / legs;
  PhasePoint x = rc.x0;
  ChartPoint prev = chart.forward(x);
  const VectorXd rates = h.grad(prev.actions);
  VectorXd unwrapped = prev.angles;
  std::vector<double> ts{x.t};
  std::vector<std::vector<double>> phis(sys.m);
  for (int k = 0; k < sys.m; ++k) phis[k].push_back(unwrapped[k]);
  double idrift = 0.0;
  const VectorXd i0 = prev.actions;
  for (int leg = 1; leg <= legs; ++leg) {
    x = integrate(sys, x, rc.x0.t + leg * dt, rc.step).back();
    const ChartPoint c = chart.forward(x);
    idrift = std::max(idrift, (c.actions - i0).cwiseAbs().maxCoeff());
    for (int k = 0; k < sys.m; ++k) {
      unwrapped[k] += angle_diff(c.angles[k], prev.angles[k]);
      phis[k].push_back(unwrapped[k]);
    }
    prev = c;
    ts.push_back(x.t);
  }
  double slope_err = 0.0;
  for (int k = 0; k < sys.m; ++k) {
    const double slope = fit_slope(ts, phis[k]);
    std::cout << "RATE phi" << k + 1 << " fitted=" << format_double(slope)
              << " expected=" << format_double(rates[k]) << "\n";
    slope_err = std::max(slope_err, std::abs(slope - rates[k]));
  }

  VerifyReport rate_rep;
  rate_rep.check_name = "transform_rates";
  rate_rep.max_residual = std::max(slope_err, idrift);
  rate_rep.tolerance = 1e-5;
  rate_rep.samples = legs + 1;
  rate_rep.seed = rc.region.seed;
  rate_rep.pass = rate_rep.max_residual <= rate_rep.tolerance;
  rate_rep.extra.emplace_back("angle_rate_error", slope_err);
  rate_rep.extra.emplace_back("action_drift", idrift);

  const SampleRegion check_region = capped(rc.region, 50);
  std::vector<VerifyReport> reports;
  reports.push_back(std::move(rate_rep));
  reports.push_back(check_canonicity(chart, check_region, 1e-5));
  return report_outcome(reports, rc, "transform_report.txt");
}

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "configuration file")
      ->required();
  cmd->add_option("--set", args.overrides,
                  "override a config entry, e.g. --set \"region.seed = 7\"");
  cmd->add_option("--seed", args.seed, "override region.seed");
  cmd->add_option("--out", args.out_dir, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"time-dependent completely integrable systems toolkit"};
  app.require_subcommand(1);

  CommonArgs args;
  CLI::App* simulate = app.add_subcommand("simulate", "integrate a trajectory");
  CLI::App* verify = app.add_subcommand("verify", "run the CIS checks");
  CLI::App* chart = app.add_subcommand("chart", "build an initial-data chart");
  CLI::App* transform =
      app.add_subcommand("transform", "shift a chart to realize H(I)");
  for (CLI::App* cmd : {simulate, verify, chart, transform})
    add_common(cmd, args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (simulate->parsed()) return run_simulate(args);
    if (verify->parsed()) return run_verify(args);
    if (chart->parsed()) return run_chart(args);
    if (transform->parsed()) return run_transform(args);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const NonCompactError& e) {
    std::cerr << "chart ineligible (non-compact): " << e.what() << "\n";
    return 3;
  } catch (const SeparatrixError& e) {
    std::cerr << "chart ineligible (separatrix): " << e.what() << "\n";
    return 3;
  } catch (const ChartDomainError& e) {
    std::cerr << "chart domain error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
