#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "aqc/errors.hpp"

namespace aqc {

/// Uniform grid on the unit torus R^N/Z^N with G points per axis.
///
/// Grid nodes sit at x_j = j/G, j = 0..G-1, one fundamental cell per node of
/// volume G^-N. Frequencies run over {-G/2, ..., G/2-1} per axis in standard
/// FFT order.
struct TorusGrid {
  int dim = 2;     // N
  int points = 0;  // G per axis, even, >= 4

  TorusGrid() = default;
  TorusGrid(int dim_, int points_) : dim(dim_), points(points_) {
    if (dim < 1 || dim > 3) throw UsageError("TorusGrid: dim must be 1, 2 or 3");
    if (points < 4 || points % 2 != 0)
      throw UsageError("TorusGrid: points per axis must be even and >= 4");
  }

  long long cell_count() const {
    long long n = 1;
    for (int i = 0; i < dim; ++i) n *= points;
    return n;
  }
  double cell_volume() const { return 1.0 / static_cast<double>(cell_count()); }

  // flat index <-> per-axis indices (row-major, axis 0 slowest)
  void unflatten(long long idx, int* out) const {
    for (int a = dim - 1; a >= 0; --a) {
      out[a] = static_cast<int>(idx % points);
      idx /= points;
    }
  }
  long long flatten(const int* idx) const {
    long long f = 0;
    for (int a = 0; a < dim; ++a) f = f * points + idx[a];
    return f;
  }

  /// Signed integer frequency of a per-axis index.
  int frequency(int axis_index) const {
    return axis_index < points / 2 ? axis_index : axis_index - points;
  }
  /// Per-axis index storing a signed frequency.
  int frequency_index(int k) const { return k >= 0 ? k : k + points; }

  Eigen::VectorXd node(long long idx) const {
    Eigen::VectorXd x(dim);
    int ax[3];
    unflatten(idx, ax);
    for (int a = 0; a < dim; ++a) x[a] = static_cast<double>(ax[a]) / points;
    return x;
  }
  Eigen::VectorXd frequency_vector(long long idx) const {
    Eigen::VectorXd k(dim);
    int ax[3];
    unflatten(idx, ax);
    for (int a = 0; a < dim; ++a) k[a] = frequency(ax[a]);
    return k;
  }

  bool operator==(const TorusGrid& o) const { return dim == o.dim && points == o.points; }
};

/// Wrap a displacement to the symmetric fundamental domain [-1/2, 1/2)^N.
inline double wrap_periodic(double t) {
  t -= std::floor(t + 0.5);
  return t;
}

/// Real d-component field sampled on a TorusGrid, with a lazily computed
/// spectral representation.
///
/// values: (G^N) x d, row i = field at grid.node(i).
/// spectrum: (G^N) x d complex, coefficient of e^{2 pi i k.x} at the node whose
/// frequency_vector is k; normalized so that values = sum_k spectrum * e^{...}.
class PeriodicField {
 public:
  PeriodicField() = default;
  PeriodicField(const TorusGrid& grid, int components);

  static PeriodicField from_values(const TorusGrid& grid, Eigen::MatrixXd values);
  /// Hermitian-symmetrizes the coefficients, then inverse transforms.
  static PeriodicField from_spectrum(const TorusGrid& grid, const Eigen::MatrixXcd& coeffs);
  /// Samples fn at each grid node (fn: x in [0,1)^N -> R^d).
  static PeriodicField sample(const TorusGrid& grid, int components,
                              const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& fn);

  const TorusGrid& grid() const { return grid_; }
  int components() const { return components_; }
  long long size() const { return values_.rows(); }

  const Eigen::MatrixXd& values() const { return values_; }
  Eigen::MatrixXd& mutable_values() {
    spectrum_valid_ = false;
    return values_;
  }

  /// Forward transform, cached.
  const Eigen::MatrixXcd& spectrum() const;

  Eigen::VectorXd mean() const { return values_.colwise().mean().transpose(); }

  PeriodicField operator+(const PeriodicField& o) const;
  PeriodicField operator-(const PeriodicField& o) const;
  PeriodicField scaled(double s) const;
  void axpy(double a, const PeriodicField& o);  // this += a * o

  /// Exact trigonometric evaluation at an arbitrary point (used to resample
  /// a field onto another lattice).
  Eigen::VectorXd evaluate(const Eigen::VectorXd& x) const;

 private:
  TorusGrid grid_;
  int components_ = 0;
  Eigen::MatrixXd values_;
  mutable Eigen::MatrixXcd spectrum_;
  mutable bool spectrum_valid_ = false;
};

// --- transforms -------------------------------------------------------------

/// Forward DFT of one component column: values -> coefficients (normalized).
Eigen::MatrixXcd forward_transform(const TorusGrid& grid, const Eigen::MatrixXd& values);
/// Inverse DFT: coefficients -> complex values (imaginary parts ~ 0 for
/// Hermitian input).
Eigen::MatrixXcd inverse_transform(const TorusGrid& grid, const Eigen::MatrixXcd& coeffs);
/// Enforce spectrum(-k) = conj(spectrum(k)); self-paired Nyquist rows are made
/// real.
Eigen::MatrixXcd hermitian_symmetrize(const TorusGrid& grid, const Eigen::MatrixXcd& coeffs);

// --- norms and gauges --------------------------------------------------------

/// (sum_cells |v|^q cellvol)^{1/q}; |v| is the Euclidean norm per cell.
/// Requires q in (1, inf).
double lq_norm(const PeriodicField& v, double q);

/// Negative-order Sobolev surrogate: L^q norm of the field whose spectrum is
/// v_hat(k) / (1 + 4 pi^2 |k|^2)^{1/2}. Equivalent norm on the torus; only
/// ratios and trends across refinements are meaningful.
double wm1q_norm(const PeriodicField& v, double q);

/// Remove the k = 0 coefficient (cell mean).
PeriodicField zero_mean(const PeriodicField& v);

/// sum over cells with |v| > M of |v|^q cellvol. Nonincreasing in M.
double tail_function(const PeriodicField& v, double q, double M);

/// Spectral partial derivative along axis. The self-paired Nyquist frequency
/// carries no usable sign and is dropped.
PeriodicField spectral_derivative(const PeriodicField& v, int axis);

/// max_cells |v(cell)| (Euclidean norm per cell).
double sup_norm(const PeriodicField& v);

// --- serialization -----------------------------------------------------------

/// CSV dump: '# aqc-field N=<dim> G=<points> d=<components>' header line, then
/// one row per cell in flat order. Extra '# ' lines may precede the header.
void write_field_csv(std::ostream& os, const PeriodicField& v);
PeriodicField read_field_csv(std::istream& is);

/// Flat binary dump: 16-byte magic "aqcfield\0\0\0\0\0\0\0\1",
/// three int64 (N, G, d), then values row-major as float64.
void write_field_binary(std::ostream& os, const PeriodicField& v);
PeriodicField read_field_binary(std::istream& is);

}  // namespace aqc
