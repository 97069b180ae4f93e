#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "liouville/phase.hpp"

namespace liouville {

// Pinned number formatting for reports and CSV: 17 significant digits,
// locale-independent, so identical runs produce identical bytes.
std::string format_double(double v);

std::string format_point(const PhasePoint& x);

// Result of one sampling-based check. pass <=> max_residual <= tolerance;
// worst_point makes failures reproducible one-liners.
struct VerifyReport {
  std::string check_name;
  double max_residual = 0.0;
  PhasePoint worst_point;
  bool pass = false;
  double tolerance = 0.0;
  int samples = 0;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, double>> extra;

  // One block of `key: value` lines.
  std::string block() const;
  // Machine-readable: "CHECK <name> PASS|FAIL <max_residual> <tolerance>".
  std::string summary_line() const;
};

}  // namespace liouville
