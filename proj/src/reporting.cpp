#include "aqc/reporting.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "aqc/errors.hpp"

namespace aqc {

double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw UsageError("loglog_slope: need at least two pairs");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
      throw UsageError("loglog_slope: nonpositive sample");
    const double lx = std::log(xs[i]), ly = std::log(ys[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(xs.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void CsvWriter::add_row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_.size()) throw UsageError("CsvWriter: cell count mismatch");
  rows_.push_back(cells);
}

std::string CsvWriter::to_string() const {
  std::ostringstream os;
  for (const auto& c : comments_) os << "# " << c << "\n";
  for (std::size_t i = 0; i < columns_.size(); ++i) os << (i ? "," : "") << columns_[i];
  os << "\n";
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << "\n";
  }
  return os.str();
}

void CsvWriter::write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("CsvWriter: cannot open " + path);
  out << to_string();
  if (!out) throw IoError("CsvWriter: write failure on " + path);
}

namespace {
std::string quantized(const Eigen::VectorXd& v) {
  std::string s;
  char buf[40];
  for (int i = 0; i < v.size(); ++i) {
    const double q = std::round(v[i] * 1e9) / 1e9;
    std::snprintf(buf, sizeof(buf), "%.9f", q);
    s += buf;
    s += ';';
  }
  return s;
}
}  // namespace

std::string EnvelopeCache::Key::canonical() const {
  std::ostringstream os;
  os << operator_label << '|' << density_label << "|x0=" << quantized(x0)
     << "|u0=" << quantized(u0) << "|xi=" << quantized(xi) << "|G=" << grid_max << '|'
     << options_digest;
  return os.str();
}

std::optional<EnvelopeResult> EnvelopeCache::find(const Key& key) const {
  std::scoped_lock lock(mutex_);
  auto it = entries_.find(key.canonical());
  if (it == entries_.end()) {
    ++misses_;
    return std::nullopt;
  }
  ++hits_;
  return it->second;
}

void EnvelopeCache::store(const Key& key, const EnvelopeResult& result) {
  std::scoped_lock lock(mutex_);
  entries_.emplace(key.canonical(), result);
}

void EnvelopeCache::purge() {
  std::scoped_lock lock(mutex_);
  entries_.clear();
}

std::string options_digest(const EnvelopeOptions& o) {
  std::ostringstream os;
  os << "ladder=";
  for (int g : o.grid_ladder) os << g << '+';
  os << ";starts=" << o.random_starts << ";amp=" << format_double(o.start_amplitude)
     << ";iters=" << o.max_iterations << ";armijo=" << format_double(o.armijo_slope)
     << ";bt=" << format_double(o.backtrack) << ";tol=" << format_double(o.relative_tolerance)
     << ";ldir=" << o.laminate_directions << ";lfrac=" << o.laminate_fractions
     << ";lamp=" << o.laminate_amplitudes << ";lmax=" << format_double(o.laminate_max_amplitude)
     << ";lseeds=" << o.laminate_seeds;
  return os.str();
}

}  // namespace aqc
