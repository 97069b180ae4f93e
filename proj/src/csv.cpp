#include "liouville/csv.hpp"

#include "liouville/report.hpp"

namespace liouville {

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  if (traj.points.empty()) throw DimensionError("CSV export: empty trajectory");
  const int m = traj.points.front().dim();
  os << "t";
  for (int k = 1; k <= m; ++k) os << ",q" << k;
  for (int k = 1; k <= m; ++k) os << ",p" << k;
  os << "\n";
  for (const PhasePoint& x : traj.points) {
    os << format_double(x.t);
    for (int k = 0; k < m; ++k) os << "," << format_double(x.q[k]);
    for (int k = 0; k < m; ++k) os << "," << format_double(x.p[k]);
    os << "\n";
  }
}

void write_chart_csv(std::ostream& os, const Trajectory& traj,
                     const ActionAngleChart& chart) {
  if (traj.points.empty()) throw DimensionError("CSV export: empty trajectory");
  const int m = chart.dim();
  os << "t";
  for (int k = 1; k <= m; ++k) os << ",I" << k;
  for (int k = 1; k <= m; ++k) os << ",phi" << k;
  os << "\n";
  for (const PhasePoint& x : traj.points) {
    const ChartPoint c = chart.forward(x);
    os << format_double(c.t);
    for (int k = 0; k < m; ++k) os << "," << format_double(c.actions[k]);
    for (int k = 0; k < m; ++k) os << "," << format_double(c.angles[k]);
    os << "\n";
  }
}

}  // namespace liouville
