#include "aqc/afree.hpp"

#include <cmath>
#include <sstream>

namespace aqc {

namespace {

// Self-paired -G/2 rows alias their mirror frequency; no per-slot projector
// can preserve realness and 0-homogeneity there, so the discrete space lives
// on the open band |k_a| < G/2 and these rows are annihilated.
bool has_nyquist_component(const TorusGrid& grid, long long flat) {
  int idx[3];
  grid.unflatten(flat, idx);
  for (int a = 0; a < grid.dim; ++a)
    if (idx[a] == grid.points / 2) return true;
  return false;
}

}  // namespace

AFreeTestSpace::AFreeTestSpace(const CoefficientField& coeffs, const Eigen::VectorXd& x0,
                               const TorusGrid& grid, int rank)
    : frozen_(coeffs, x0, rank), grid_(grid) {
  const long long n = grid.cell_count();
  const int d = coeffs.dims().field_dim;
  projectors_.resize(n);
  for (long long i = 0; i < n; ++i) {
    const Eigen::VectorXd k = grid.frequency_vector(i);
    if (k.squaredNorm() == 0.0 || has_nyquist_component(grid, i)) {
      projectors_[i] = Eigen::MatrixXd::Zero(d, d);
      continue;
    }
    try {
      // 0-homogeneity: evaluate on the unit sphere for scale-independent cutoffs.
      projectors_[i] = frozen_.projector(k / k.norm());
    } catch (const RankViolationError&) {
      std::ostringstream msg;
      msg << "build_test_space: rank violation at frequency (";
      for (int a = 0; a < grid.dim; ++a) msg << (a ? "," : "") << k[a];
      msg << ")";
      throw RankViolationError(msg.str());
    }
  }
}

AFreeTestSpace build_test_space(const CoefficientField& coeffs, const Eigen::VectorXd& x0,
                                const TorusGrid& grid) {
  // Consensus rank from generic directions; every grid frequency is then
  // checked during table construction.
  return AFreeTestSpace(coeffs, x0, grid, freeze_certified(coeffs, x0).rank());
}

long long AFreeTestSpace::dimension() const {
  double acc = 0.0;
  for (long long i = 0; i < grid_.cell_count(); ++i) acc += projectors_[i].trace();
  return std::llround(acc);
}

PeriodicField project_afree(const AFreeTestSpace& space, const PeriodicField& w) {
  if (!(w.grid() == space.grid())) throw UsageError("project_afree: grid mismatch");
  if (w.components() != space.frozen().dims().field_dim)
    throw UsageError("project_afree: component mismatch");
  const Eigen::MatrixXcd& sp = w.spectrum();
  Eigen::MatrixXcd out(sp.rows(), sp.cols());
  for (long long i = 0; i < sp.rows(); ++i)
    out.row(i) = (space.projectors_[i] * sp.row(i).transpose()).transpose();
  return PeriodicField::from_spectrum(space.grid(), out);
}

double constraint_residual(const AFreeTestSpace& space, const PeriodicField& w) {
  if (!(w.grid() == space.grid())) throw UsageError("constraint_residual: grid mismatch");
  const double denom = lq_norm(w, 2.0);
  if (denom == 0.0) return 0.0;
  const Eigen::MatrixXcd& sp = w.spectrum();
  const int l = space.frozen().dims().equation_dim;
  Eigen::MatrixXcd res(sp.rows(), l);
  const std::complex<double> two_pi_i(0.0, 2.0 * M_PI);
  for (long long i = 0; i < sp.rows(); ++i) {
    const Eigen::VectorXd k = space.grid().frequency_vector(i);
    if (k.squaredNorm() == 0.0 || has_nyquist_component(space.grid(), i)) {
      res.row(i).setZero();  // same convention as the spectral derivative
      continue;
    }
    res.row(i) = (space.frozen().matrix(k) * sp.row(i).transpose() * two_pi_i).transpose();
  }
  const PeriodicField residual = PeriodicField::from_spectrum(space.grid(), res);
  return wm1q_norm(residual, 2.0) / denom;
}

}  // namespace aqc
