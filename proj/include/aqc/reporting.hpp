#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "aqc/envelope.hpp"

namespace aqc {

/// Least-squares slope of log(y) against log(x); pairs with y <= 0 are
/// rejected (UsageError) since they carry no rate information.
double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys);

/// Formats a double so that reruns produce byte-identical artifacts.
std::string format_double(double x);

/// Writes a CSV table: '# ' prefixed header lines, one 'column,..' line, rows.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> columns) : columns_(std::move(columns)) {}
  void add_comment(const std::string& line) { comments_.push_back(line); }
  void add_row(const std::vector<std::string>& cells);
  void write(const std::string& path) const;
  std::string to_string() const;

 private:
  std::vector<std::string> comments_;
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

/// Cache of cell-problem solves keyed by the full solve identity. A hit
/// returns the stored result bit-identically; solves derive their RNG stream
/// from the key so cache on/off cannot change any reported value.
class EnvelopeCache {
 public:
  struct Key {
    std::string operator_label;
    std::string density_label;
    Eigen::VectorXd x0, u0, xi;
    int grid_max = 0;
    std::string options_digest;

    std::string canonical() const;  // x0 quantized to 1e-9
  };

  std::optional<EnvelopeResult> find(const Key& key) const;
  void store(const Key& key, const EnvelopeResult& result);
  void purge();
  long long hits() const { return hits_; }
  long long misses() const { return misses_; }

 private:
  mutable std::mutex mutex_;
  std::map<std::string, EnvelopeResult> entries_;
  mutable long long hits_ = 0;
  mutable long long misses_ = 0;
};

/// Digest of the solver options that affect a solve's outcome (seed excluded;
/// the per-solve stream is derived from the key itself).
std::string options_digest(const EnvelopeOptions& opts);

}  // namespace aqc
