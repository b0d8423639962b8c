#include "aqc/torus.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>

namespace aqc {

namespace {

// FFTW plans are not thread-safe to create; cache them per (dims, sign) and
// execute with the new-array interface on caller-owned buffers.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  void execute(const TorusGrid& grid, int sign, std::complex<double>* data) {
    fftw_plan plan = get(grid, sign);
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(data),
                     reinterpret_cast<fftw_complex*>(data));
  }

 private:
  fftw_plan get(const TorusGrid& grid, int sign) {
    std::scoped_lock lock(mutex_);
    auto key = std::make_tuple(grid.dim, grid.points, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    std::vector<std::complex<double>> scratch(grid.cell_count());
    int n[3] = {grid.points, grid.points, grid.points};
    fftw_plan plan = fftw_plan_dft(
        grid.dim, n, reinterpret_cast<fftw_complex*>(scratch.data()),
        reinterpret_cast<fftw_complex*>(scratch.data()), sign,
        FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, plan);
    return plan;
  }

  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

}  // namespace

Eigen::MatrixXcd forward_transform(const TorusGrid& grid, const Eigen::MatrixXd& values) {
  const long long n = grid.cell_count();
  if (values.rows() != n) throw UsageError("forward_transform: row count does not match grid");
  Eigen::MatrixXcd out(n, values.cols());
  std::vector<std::complex<double>> buf(n);
  const double scale = 1.0 / static_cast<double>(n);
  for (int c = 0; c < values.cols(); ++c) {
    for (long long i = 0; i < n; ++i) buf[i] = values(i, c);
    PlanCache::instance().execute(grid, FFTW_FORWARD, buf.data());
    for (long long i = 0; i < n; ++i) out(i, c) = buf[i] * scale;
  }
  return out;
}

Eigen::MatrixXcd inverse_transform(const TorusGrid& grid, const Eigen::MatrixXcd& coeffs) {
  const long long n = grid.cell_count();
  if (coeffs.rows() != n) throw UsageError("inverse_transform: row count does not match grid");
  Eigen::MatrixXcd out(n, coeffs.cols());
  std::vector<std::complex<double>> buf(n);
  for (int c = 0; c < coeffs.cols(); ++c) {
    for (long long i = 0; i < n; ++i) buf[i] = coeffs(i, c);
    PlanCache::instance().execute(grid, FFTW_BACKWARD, buf.data());
    for (long long i = 0; i < n; ++i) out(i, c) = buf[i];
  }
  return out;
}

Eigen::MatrixXcd hermitian_symmetrize(const TorusGrid& grid, const Eigen::MatrixXcd& coeffs) {
  const long long n = grid.cell_count();
  if (coeffs.rows() != n) throw UsageError("hermitian_symmetrize: row count does not match grid");
  Eigen::MatrixXcd out(n, coeffs.cols());
  int idx[3], mirror[3];
  for (long long i = 0; i < n; ++i) {
    grid.unflatten(i, idx);
    for (int a = 0; a < grid.dim; ++a) {
      int k = grid.frequency(idx[a]);
      // -(-G/2) has no slot; the Nyquist index pairs with itself.
      mirror[a] = (idx[a] == grid.points / 2) ? idx[a] : grid.frequency_index(-k);
    }
    const long long j = grid.flatten(mirror);
    out.row(i) = 0.5 * (coeffs.row(i) + coeffs.row(j).conjugate());
  }
  return out;
}

PeriodicField::PeriodicField(const TorusGrid& grid, int components)
    : grid_(grid), components_(components) {
  if (components < 1) throw UsageError("PeriodicField: components must be >= 1");
  values_ = Eigen::MatrixXd::Zero(grid.cell_count(), components);
}

PeriodicField PeriodicField::from_values(const TorusGrid& grid, Eigen::MatrixXd values) {
  if (values.rows() != grid.cell_count())
    throw UsageError("PeriodicField::from_values: row count does not match grid");
  PeriodicField f(grid, static_cast<int>(values.cols()));
  f.values_ = std::move(values);
  return f;
}

PeriodicField PeriodicField::from_spectrum(const TorusGrid& grid, const Eigen::MatrixXcd& coeffs) {
  Eigen::MatrixXcd sym = hermitian_symmetrize(grid, coeffs);
  Eigen::MatrixXcd vals = inverse_transform(grid, sym);
  PeriodicField f(grid, static_cast<int>(coeffs.cols()));
  f.values_ = vals.real();
  f.spectrum_ = std::move(sym);
  f.spectrum_valid_ = true;
  return f;
}

PeriodicField PeriodicField::sample(
    const TorusGrid& grid, int components,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& fn) {
  PeriodicField f(grid, components);
  const long long n = grid.cell_count();
  for (long long i = 0; i < n; ++i) {
    Eigen::VectorXd v = fn(grid.node(i));
    if (v.size() != components) throw UsageError("PeriodicField::sample: component mismatch");
    f.values_.row(i) = v.transpose();
  }
  return f;
}

const Eigen::MatrixXcd& PeriodicField::spectrum() const {
  if (!spectrum_valid_) {
    spectrum_ = forward_transform(grid_, values_);
    spectrum_valid_ = true;
  }
  return spectrum_;
}

PeriodicField PeriodicField::operator+(const PeriodicField& o) const {
  if (!(grid_ == o.grid_) || components_ != o.components_)
    throw UsageError("PeriodicField: operand mismatch");
  return from_values(grid_, values_ + o.values_);
}

PeriodicField PeriodicField::operator-(const PeriodicField& o) const {
  if (!(grid_ == o.grid_) || components_ != o.components_)
    throw UsageError("PeriodicField: operand mismatch");
  return from_values(grid_, values_ - o.values_);
}

PeriodicField PeriodicField::scaled(double s) const { return from_values(grid_, values_ * s); }

void PeriodicField::axpy(double a, const PeriodicField& o) {
  if (!(grid_ == o.grid_) || components_ != o.components_)
    throw UsageError("PeriodicField::axpy: operand mismatch");
  values_ += a * o.values_;
  spectrum_valid_ = false;
}

Eigen::VectorXd PeriodicField::evaluate(const Eigen::VectorXd& x) const {
  if (x.size() != grid_.dim) throw UsageError("PeriodicField::evaluate: dimension mismatch");
  const Eigen::MatrixXcd& sp = spectrum();
  const long long n = grid_.cell_count();
  Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(components_);
  for (long long i = 0; i < n; ++i) {
    const Eigen::VectorXd k = grid_.frequency_vector(i);
    const double phase = 2.0 * M_PI * k.dot(x);
    acc += sp.row(i).transpose() * std::complex<double>(std::cos(phase), std::sin(phase));
  }
  return acc.real();
}

double lq_norm(const PeriodicField& v, double q) {
  if (!(q > 1.0) || !std::isfinite(q)) throw UsageError("lq_norm: exponent must lie in (1, inf)");
  const double vol = v.grid().cell_volume();
  double acc = 0.0;
  for (long long i = 0; i < v.size(); ++i) acc += std::pow(v.values().row(i).norm(), q);
  return std::pow(acc * vol, 1.0 / q);
}

double wm1q_norm(const PeriodicField& v, double q) {
  const Eigen::MatrixXcd& sp = v.spectrum();
  Eigen::MatrixXcd damped(sp.rows(), sp.cols());
  for (long long i = 0; i < sp.rows(); ++i) {
    const double k2 = v.grid().frequency_vector(i).squaredNorm();
    damped.row(i) = sp.row(i) / std::sqrt(1.0 + 4.0 * M_PI * M_PI * k2);
  }
  return lq_norm(PeriodicField::from_spectrum(v.grid(), damped), q);
}

PeriodicField zero_mean(const PeriodicField& v) {
  Eigen::MatrixXd vals = v.values();
  vals.rowwise() -= v.values().colwise().mean();
  return PeriodicField::from_values(v.grid(), std::move(vals));
}

double tail_function(const PeriodicField& v, double q, double M) {
  if (M < 0.0) throw UsageError("tail_function: threshold must be >= 0");
  const double vol = v.grid().cell_volume();
  double acc = 0.0;
  for (long long i = 0; i < v.size(); ++i) {
    const double a = v.values().row(i).norm();
    if (a > M) acc += std::pow(a, q) * vol;
  }
  return acc;
}

PeriodicField spectral_derivative(const PeriodicField& v, int axis) {
  if (axis < 0 || axis >= v.grid().dim) throw UsageError("spectral_derivative: bad axis");
  const Eigen::MatrixXcd& sp = v.spectrum();
  Eigen::MatrixXcd out(sp.rows(), sp.cols());
  int idx[3];
  for (long long i = 0; i < sp.rows(); ++i) {
    v.grid().unflatten(i, idx);
    if (idx[axis] == v.grid().points / 2) {
      out.row(i).setZero();
    } else {
      const double k = v.grid().frequency(idx[axis]);
      out.row(i) = sp.row(i) * std::complex<double>(0.0, 2.0 * M_PI * k);
    }
  }
  return PeriodicField::from_spectrum(v.grid(), out);
}

double sup_norm(const PeriodicField& v) {
  double m = 0.0;
  for (long long i = 0; i < v.size(); ++i) m = std::max(m, v.values().row(i).norm());
  return m;
}

void write_field_csv(std::ostream& os, const PeriodicField& v) {
  os << "# aqc-field N=" << v.grid().dim << " G=" << v.grid().points
     << " d=" << v.components() << "\n";
  char buf[32];
  for (long long i = 0; i < v.size(); ++i) {
    for (int c = 0; c < v.components(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", v.values()(i, c));
      os << (c ? "," : "") << buf;
    }
    os << "\n";
  }
  if (!os) throw IoError("write_field_csv: stream failure");
}

PeriodicField read_field_csv(std::istream& is) {
  std::string line;
  int dim = 0, points = 0, comps = 0;
  // skip leading comments until the header
  while (std::getline(is, line)) {
    if (line.rfind("# aqc-field", 0) == 0) {
      if (std::sscanf(line.c_str(), "# aqc-field N=%d G=%d d=%d", &dim, &points, &comps) != 3)
        throw IoError("read_field_csv: malformed header");
      break;
    }
    if (line.empty() || line[0] == '#') continue;
    throw IoError("read_field_csv: missing aqc-field header");
  }
  if (dim == 0) throw IoError("read_field_csv: missing aqc-field header");
  TorusGrid grid(dim, points);
  Eigen::MatrixXd vals(grid.cell_count(), comps);
  for (long long i = 0; i < grid.cell_count(); ++i) {
    if (!std::getline(is, line)) throw IoError("read_field_csv: truncated data");
    std::stringstream ss(line);
    std::string cell;
    for (int c = 0; c < comps; ++c) {
      if (!std::getline(ss, cell, ',')) throw IoError("read_field_csv: short row");
      vals(i, c) = std::stod(cell);
    }
  }
  return PeriodicField::from_values(grid, std::move(vals));
}

namespace {
constexpr char kFieldMagic[16] = {'a', 'q', 'c', 'f', 'i', 'e', 'l', 'd',
                                  0,   0,   0,   0,   0,   0,   0,   1};
}

void write_field_binary(std::ostream& os, const PeriodicField& v) {
  os.write(kFieldMagic, sizeof(kFieldMagic));
  const std::int64_t meta[3] = {v.grid().dim, v.grid().points, v.components()};
  os.write(reinterpret_cast<const char*>(meta), sizeof(meta));
  for (long long i = 0; i < v.size(); ++i)
    for (int c = 0; c < v.components(); ++c) {
      const double x = v.values()(i, c);
      os.write(reinterpret_cast<const char*>(&x), sizeof(double));
    }
  if (!os) throw IoError("write_field_binary: stream failure");
}

PeriodicField read_field_binary(std::istream& is) {
  char magic[16];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kFieldMagic, sizeof(magic)) != 0)
    throw IoError("read_field_binary: bad magic");
  std::int64_t meta[3];
  is.read(reinterpret_cast<char*>(meta), sizeof(meta));
  if (!is) throw IoError("read_field_binary: truncated header");
  TorusGrid grid(static_cast<int>(meta[0]), static_cast<int>(meta[1]));
  Eigen::MatrixXd vals(grid.cell_count(), static_cast<int>(meta[2]));
  for (long long i = 0; i < vals.rows(); ++i)
    for (int c = 0; c < vals.cols(); ++c) {
      double x;
      is.read(reinterpret_cast<char*>(&x), sizeof(double));
      if (!is) throw IoError("read_field_binary: truncated data");
      vals(i, c) = x;
    }
  return PeriodicField::from_values(grid, std::move(vals));
}

}  // namespace aqc
