#pragma once

#include <ostream>

#include "liouville/actionangle.hpp"
#include "liouville/flow.hpp"

namespace liouville {

// Trajectory rows `t,q1..qm,p1..pm`, one per accepted step, 17 significant
// digits.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

// Chart rows `t,I1..Im,phi1..phim` aligned with the trajectory rows for
// joint analysis.
void write_chart_csv(std::ostream& os, const Trajectory& traj,
                     const ActionAngleChart& chart);

}  // namespace liouville
