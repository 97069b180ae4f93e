#include "liouville/report.hpp"

#include <cstdio>

namespace liouville {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_point(const PhasePoint& x) {
  std::string s = "t=" + format_double(x.t);
  for (int k = 0; k < x.dim(); ++k)
    s += " q" + std::to_string(k + 1) + "=" + format_double(x.q[k]);
  for (int k = 0; k < x.dim(); ++k)
    s += " p" + std::to_string(k + 1) + "=" + format_double(x.p[k]);
  return s;
}

std::string VerifyReport::block() const {
  std::string s;
  s += "check: " + check_name + "\n";
  s += "samples: " + std::to_string(samples) + "\n";
  s += "seed: " + std::to_string(seed) + "\n";
  s += "tolerance: " + format_double(tolerance) + "\n";
  s += "max_residual: " + format_double(max_residual) + "\n";
  if (worst_point.dim() > 0)
    s += "worst_point: " + format_point(worst_point) + "\n";
  for (const auto& [key, value] : extra)
    s += key + ": " + format_double(value) + "\n";
  s += std::string("result: ") + (pass ? "PASS" : "FAIL") + "\n";
  return s;
}

std::string VerifyReport::summary_line() const {
  return "CHECK " + check_name + (pass ? " PASS " : " FAIL ") +
         format_double(max_residual) + " " + format_double(tolerance);
}

}  // namespace liouville
