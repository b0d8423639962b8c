#include "aqc/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "aqc/catalog.hpp"
#include "aqc/errors.hpp"

namespace aqc {

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"", {"command", "seed", "output"}},
      {"operator",
       {"name", "gap_threshold", "x_samples", "lambda_deterministic", "lambda_random"}},
      {"density", {"name"}},
      {"envelope",
       {"x0", "u0", "xi", "xi_grid", "ladder", "random_starts", "max_iterations", "tolerance",
        "start_amplitude", "biconjugate", "slice_points"}},
      {"prop22", {"qs", "ensemble", "ladder", "eta", "k_ref"}},
      {"decompose", {"grid", "q", "labels", "kind", "eta", "s"}},
      {"relax",
       {"grid", "x0", "u", "v", "r_ladder", "m_ladder", "mu", "quadrature", "cell_ladder",
        "random_starts", "admissibility_threshold"}},
      {"oracle", {"xi_grid", "slice_points", "ladder", "random_starts"}},
  };
  return keys;
}

const std::set<std::string>& known_commands() {
  static const std::set<std::string> cmds = {"check-rank",     "envelope", "relax",
                                             "verify-prop22",  "decompose", "oracle-compare"};
  return cmds;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

}  // namespace

bool RunConfig::has(const std::string& section, const std::string& key) const {
  auto it = sections.find(section);
  return it != sections.end() && it->second.count(key) > 0;
}

std::string RunConfig::get(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
  auto it = sections.find(section);
  if (it == sections.end()) return fallback;
  auto kt = it->second.find(key);
  return kt == it->second.end() ? fallback : kt->second;
}

double RunConfig::get_double(const std::string& section, const std::string& key,
                             double fallback) const {
  const std::string s = get(section, key, "");
  if (s.empty()) return fallback;
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw ConfigError("[" + section + "] " + key + ": not a number: '" + s + "'");
  }
}

int RunConfig::get_int(const std::string& section, const std::string& key, int fallback) const {
  const std::string s = get(section, key, "");
  if (s.empty()) return fallback;
  try {
    return std::stoi(s);
  } catch (const std::exception&) {
    throw ConfigError("[" + section + "] " + key + ": not an integer: '" + s + "'");
  }
}

std::vector<double> RunConfig::get_doubles(const std::string& section, const std::string& key,
                                           const std::vector<double>& fallback) const {
  const std::string s = get(section, key, "");
  if (s.empty()) return fallback;
  std::vector<double> out;
  for (const auto& item : split(s, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("[" + section + "] " + key + ": not a number: '" + item + "'");
    }
  }
  return out;
}

std::vector<int> RunConfig::get_ints(const std::string& section, const std::string& key,
                                     const std::vector<int>& fallback) const {
  const std::string s = get(section, key, "");
  if (s.empty()) return fallback;
  std::vector<int> out;
  for (const auto& item : split(s, ',')) {
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw ConfigError("[" + section + "] " + key + ": not an integer: '" + item + "'");
    }
  }
  return out;
}

Eigen::VectorXd RunConfig::get_vector(const std::string& section, const std::string& key,
                                      const Eigen::VectorXd& fallback) const {
  const std::string s = get(section, key, "");
  if (s.empty()) return fallback;
  const auto items = get_doubles(section, key, {});
  Eigen::VectorXd v(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) v[i] = items[i];
  return v;
}

std::string RunConfig::canonical() const {
  // The artifact location is deliberately not part of the canonical form:
  // identical runs stay byte-identical wherever they are written.
  std::ostringstream os;
  os << "command=" << command << " seed=" << seed;
  for (const auto& [name, kv] : sections) {
    if (name.empty()) continue;
    os << " [" << name << "]";
    for (const auto& [k, v] : kv) os << " " << k << "=" << v;
  }
  return os.str();
}

RunConfig parse_config(const std::string& text) {
  RunConfig config;
  std::vector<std::string> errors;
  std::istringstream is(text);
  std::string line, section;
  int line_no = 0;

  while (std::getline(is, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        errors.push_back("line " + std::to_string(line_no) + ": unterminated section header");
        continue;
      }
      section = trim(t.substr(1, t.size() - 2));
      if (!known_keys().count(section))
        errors.push_back("line " + std::to_string(line_no) + ": unknown section [" + section +
                         "]");
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(line_no) + ": expected 'key = value'");
      continue;
    }
    const std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    const auto hash = value.find('#');
    if (hash != std::string::npos) value = trim(value.substr(0, hash));
    const auto ks = known_keys().find(section);
    if (ks != known_keys().end() && !ks->second.count(key)) {
      errors.push_back("line " + std::to_string(line_no) + ": unknown key '" + key +
                       "' in section [" + section + "]");
      continue;
    }
    config.sections[section][key] = value;
  }

  // top-level fields
  if (config.has("", "command")) {
    config.command = config.get("", "command", "");
    if (!known_commands().count(config.command))
      errors.push_back("unknown command '" + config.command + "'");
  }
  if (config.has("", "output")) config.output_dir = config.get("", "output", "out");
  if (!config.has("", "seed")) {
    errors.push_back("missing mandatory 'seed'");
  } else {
    try {
      config.seed = std::stoull(config.get("", "seed", "0"));
    } catch (const std::exception&) {
      errors.push_back("seed: not an unsigned integer");
    }
  }

  // label resolution
  if (config.has("operator", "name")) {
    try {
      make_operator(config.get("operator", "name", ""));
    } catch (const ConfigError& e) {
      errors.push_back(e.what());
    }
  }
  if (config.has("density", "name")) {
    try {
      make_density(config.get("density", "name", ""));
    } catch (const ConfigError& e) {
      errors.push_back(e.what());
    }
  }

  if (!errors.empty()) {
    std::string joined;
    for (const auto& e : errors) joined += (joined.empty() ? "" : "\n") + e;
    throw ConfigError(joined);
  }
  return config;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::vector<std::tuple<double, double, int>> parse_axis_specs(const std::string& text) {
  std::vector<std::tuple<double, double, int>> out;
  for (const auto& axis : split(text, ',')) {
    const auto parts = split(axis, ':');
    if (parts.size() != 3) throw ConfigError("axis spec must be lo:hi:count, got '" + axis + "'");
    try {
      out.emplace_back(std::stod(parts[0]), std::stod(parts[1]), std::stoi(parts[2]));
    } catch (const std::exception&) {
      throw ConfigError("malformed axis spec '" + axis + "'");
    }
  }
  return out;
}

}  // namespace aqc
