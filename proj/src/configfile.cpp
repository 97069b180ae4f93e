#include "liouville/configfile.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace liouville {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace((unsigned char)s[a])) ++a;
  while (b > a && std::isspace((unsigned char)s[b - 1])) --b;
  return s.substr(a, b - a);
}

bool parse_number(const std::string& s, double& out) {
  try {
    size_t used = 0;
    out = std::stod(s, &used);
    return used == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

ConfigFile::Value parse_value(const std::string& raw, int line) {
  ConfigFile::Value v;
  v.line = line;
  const std::string s = trim(raw);
  if (s.empty())
    throw ConfigError("config line " + std::to_string(line) + ": empty value");
  if (s.front() == '[') {
    if (s.back() != ']')
      throw ConfigError("config line " + std::to_string(line) +
                        ": unterminated list");
    v.type = ConfigFile::Value::Type::list;
    std::string inner = s.substr(1, s.size() - 2);
    std::stringstream ss(inner);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const std::string it = trim(item);
      if (it.empty())
        throw ConfigError("config line " + std::to_string(line) +
                          ": empty list item");
      double num;
      if (!parse_number(it, num))
        throw ConfigError("config line " + std::to_string(line) +
                          ": list item '" + it + "' is not a number");
      v.list.push_back(num);
    }
    return v;
  }
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"')
      throw ConfigError("config line " + std::to_string(line) +
                        ": unterminated string");
    v.type = ConfigFile::Value::Type::text;
    v.text = s.substr(1, s.size() - 2);
    return v;
  }
  if (parse_number(s, v.num)) {
    v.type = ConfigFile::Value::Type::number;
    return v;
  }
  v.type = ConfigFile::Value::Type::text;
  v.text = s;
  return v;
}

void insert_line(std::map<std::string, ConfigFile::Value>& entries,
                 const std::string& line_text, int line_no) {
  // strip comment (quotes respected)
  std::string line;
  bool quoted = false;
  for (char c : line_text) {
    if (c == '"') quoted = !quoted;
    if (c == '#' && !quoted) break;
    line += c;
  }
  line = trim(line);
  if (line.empty()) return;
  const size_t eq = line.find('=');
  if (eq == std::string::npos)
    throw ConfigError("config line " + std::to_string(line_no) +
                      ": expected 'key = value'");
  const std::string key = trim(line.substr(0, eq));
  if (key.empty())
    throw ConfigError("config line " + std::to_string(line_no) +
                      ": missing key");
  for (char c : key)
    if (!std::isalnum((unsigned char)c) && c != '.' && c != '_')
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": bad character in key '" + key + "'");
  entries[key] = parse_value(line.substr(eq + 1), line_no);
}

}  // namespace

ConfigFile ConfigFile::parse_string(const std::string& content) {
  ConfigFile cfg;
  std::stringstream ss(content);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) insert_line(cfg.entries_, line, ++line_no);
  return cfg;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str());
}

void ConfigFile::set_override(const std::string& fragment) {
  insert_line(entries_, fragment, 0);
}

const ConfigFile::Value* ConfigFile::find(const std::string& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

bool ConfigFile::has(const std::string& key) const {
  return find(key) != nullptr;
}

double ConfigFile::number(const std::string& key, double fallback) {
  const Value* v = find(key);
  if (!v) return fallback;
  read_.insert(key);
  if (v->type != Value::Type::number)
    throw ConfigError("config key '" + key + "' must be a number");
  return v->num;
}

double ConfigFile::require_number(const std::string& key) {
  if (!has(key)) throw ConfigError("missing required config key '" + key + "'");
  return number(key, 0.0);
}

std::string ConfigFile::text(const std::string& key,
                             const std::string& fallback) {
  const Value* v = find(key);
  if (!v) return fallback;
  read_.insert(key);
  if (v->type != Value::Type::text)
    throw ConfigError("config key '" + key + "' must be a string");
  return v->text;
}

std::string ConfigFile::require_text(const std::string& key) {
  if (!has(key)) throw ConfigError("missing required config key '" + key + "'");
  return text(key, "");
}

std::vector<double> ConfigFile::list(const std::string& key) {
  const Value* v = find(key);
  if (!v) return {};
  read_.insert(key);
  if (v->type != Value::Type::list)
    throw ConfigError("config key '" + key + "' must be a list");
  return v->list;
}

bool ConfigFile::consume(const std::string& key) {
  if (!has(key)) return false;
  read_.insert(key);
  return true;
}

std::vector<std::string> ConfigFile::unread_with_prefix(
    const std::string& prefix) const {
  std::vector<std::string> out;
  for (const auto& [key, value] : entries_) {
    (void)value;
    if (key.rfind(prefix, 0) == 0 && !read_.count(key)) out.push_back(key);
  }
  return out;
}

void ConfigFile::reject_unread() const {
  for (const auto& [key, value] : entries_)
    if (!read_.count(key))
      throw ConfigError("unknown config key '" + key + "' (line " +
                        std::to_string(value.line) + ")");
}

RunConfig load_run_config(ConfigFile& cfg) {
  RunConfig rc;

  rc.spec.name = cfg.require_text("system.name");
  for (const std::string& key : cfg.unread_with_prefix("system.")) {
    const std::string param = key.substr(std::string("system.").size());
    rc.spec.params[param] = cfg.require_number(key);
  }
  rc.builtin = make_builtin(rc.spec);
  const int m = rc.builtin.system.m;

  rc.region = rc.builtin.default_region;
  if (cfg.has("region.t")) {
    const auto t = cfg.list("region.t");
    if (t.size() != 2) throw ConfigError("region.t must be [lo, hi]");
    rc.region.t_range = {t[0], t[1]};
  }
  for (int k = 1; k <= m; ++k) {
    const std::string qk = "region.q" + std::to_string(k);
    const std::string pk = "region.p" + std::to_string(k);
    if (cfg.has(qk)) {
      const auto b = cfg.list(qk);
      if (b.size() != 2) throw ConfigError(qk + " must be [lo, hi]");
      rc.region.q_box[k - 1] = {b[0], b[1]};
    }
    if (cfg.has(pk)) {
      const auto b = cfg.list(pk);
      if (b.size() != 2) throw ConfigError(pk + " must be [lo, hi]");
      rc.region.p_box[k - 1] = {b[0], b[1]};
    }
  }
  rc.region.count = static_cast<int>(cfg.number("region.count", rc.region.count));
  rc.region.seed =
      static_cast<std::uint64_t>(cfg.number("region.seed", double(rc.region.seed)));
  rc.region.validate();

  const std::string method = cfg.text("step.method", "rk45");
  if (method == "rk4")
    rc.step = StepControl::rk4(cfg.number("step.step", 0.01));
  else if (method == "rk45")
    rc.step = StepControl::rk45(cfg.number("step.abs_tol", 1e-10),
                                cfg.number("step.rel_tol", 1e-10));
  else
    throw ConfigError("step.method must be 'rk4' or 'rk45'");
  cfg.consume("step.step");
  cfg.consume("step.abs_tol");
  cfg.consume("step.rel_tol");
  rc.step.max_steps =
      static_cast<int>(cfg.number("step.max_steps", rc.step.max_steps));
  rc.step.validate();

  rc.x0 = rc.builtin.default_x0;
  if (cfg.has("trajectory.x0")) {
    const auto v = cfg.list("trajectory.x0");
    if (static_cast<int>(v.size()) != 1 + 2 * m)
      throw ConfigError("trajectory.x0 must be [t, q1..qm, p1..pm] (" +
                        std::to_string(1 + 2 * m) + " numbers)");
    rc.x0.t = v[0];
    rc.x0.q.resize(m);
    rc.x0.p.resize(m);
    for (int k = 0; k < m; ++k) {
      rc.x0.q[k] = v[1 + k];
      rc.x0.p[k] = v[1 + m + k];
    }
  }
  rc.t_target = cfg.number("trajectory.t_target", 10.0);

  rc.chart_levels = cfg.list("chart.levels");
  rc.h_of_i = cfg.text("transform.h_of_i", "");
  rc.out_dir = cfg.text("out.dir", ".");

  cfg.reject_unread();
  return rc;
}

}  // namespace liouville
