#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "liouville/ode.hpp"
#include "liouville/sampling.hpp"
#include "liouville/systems.hpp"

namespace liouville {

// Flat dotted-key configuration text: one `key = value` per line, `#`
// comments, values are numbers, quoted/bare strings, or numeric lists in
// brackets. CI-friendly and diffable; flags override file entries.
class ConfigFile {
 public:
  struct Value {
    enum class Type { number, text, list };
    Type type = Type::number;
    double num = 0.0;
    std::string text;
    std::vector<double> list;
    int line = 0;
  };

  static ConfigFile parse_string(const std::string& content);
  static ConfigFile parse_file(const std::string& path);

  // Assign or replace one entry from a `key=value` fragment (flag override).
  void set_override(const std::string& fragment);

  bool has(const std::string& key) const;
  double number(const std::string& key, double fallback);
  double require_number(const std::string& key);
  std::string text(const std::string& key, const std::string& fallback);
  std::string require_text(const std::string& key);
  std::vector<double> list(const std::string& key);
  bool consume(const std::string& key);  // mark known without reading

  // Keys present under `prefix.` that have not been read yet.
  std::vector<std::string> unread_with_prefix(const std::string& prefix) const;
  // Throw ConfigError naming the first unread key, if any.
  void reject_unread() const;

 private:
  const Value* find(const std::string& key) const;
  std::map<std::string, Value> entries_;
  std::set<std::string> read_;
};

// Everything a CLI run needs, resolved and validated before any computation.
struct RunConfig {
  SystemSpec spec;
  BuiltinSystem builtin;
  SampleRegion region;
  StepControl step;
  PhasePoint x0;
  double t_target = 10.0;
  std::vector<double> chart_levels;
  std::string h_of_i;
  std::string out_dir = ".";
};

RunConfig load_run_config(ConfigFile& cfg);

}  // namespace liouville
