#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace aqc {

/// Parsed 'key = value' configuration with [section] headers. Unknown keys,
/// unresolvable labels and a missing seed are reported with line numbers.
class RunConfig {
 public:
  std::string command;  // may be empty when supplied on the command line
  std::uint64_t seed = 0;
  std::string output_dir = "out";

  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key,
                  const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  int get_int(const std::string& section, const std::string& key, int fallback) const;
  std::vector<double> get_doubles(const std::string& section, const std::string& key,
                                  const std::vector<double>& fallback) const;
  std::vector<int> get_ints(const std::string& section, const std::string& key,
                            const std::vector<int>& fallback) const;
  Eigen::VectorXd get_vector(const std::string& section, const std::string& key,
                             const Eigen::VectorXd& fallback) const;

  /// Deterministic serialization embedded in every artifact.
  std::string canonical() const;

  std::map<std::string, std::map<std::string, std::string>> sections;
};

/// Parses and validates; throws ConfigError listing every problem with its
/// line number.
RunConfig parse_config(const std::string& text);
RunConfig load_config_file(const std::string& path);

/// 'lo:hi:count' axis specs, comma-separated.
std::vector<std::tuple<double, double, int>> parse_axis_specs(const std::string& text);

}  // namespace aqc
