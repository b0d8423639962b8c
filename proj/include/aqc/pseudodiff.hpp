#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "aqc/densities.hpp"
#include "aqc/symbols.hpp"
#include "aqc/torus.hpp"

namespace aqc {

/// Smooth frequency cutoff: 0 below lo, 1 above hi, quintic smoothstep in
/// between (C2 at the seams, monotone).
struct CutoffChi {
  double lo = 1.0;
  double hi = 2.0;
  double operator()(double t) const;
};

/// Spatial window eta: [0,1]-valued, either identically 1 or a C2 radial
/// plateau bump (1 inside `inner`, 0 outside `outer`, periodic distance).
class SpatialWindow {
 public:
  static SpatialWindow one();
  static SpatialWindow bump(Eigen::VectorXd center, double inner = 0.25, double outer = 0.45);

  double operator()(const Eigen::VectorXd& x) const { return eval_(x); }
  bool constant_one() const { return constant_one_; }
  const std::string& label() const { return label_; }

 private:
  SpatialWindow(std::string label, std::function<double(const Eigen::VectorXd&)> eval,
                bool constant_one)
      : label_(std::move(label)), eval_(std::move(eval)), constant_one_(constant_one) {}
  std::string label_;
  std::function<double(const Eigen::VectorXd&)> eval_;
  bool constant_one_;
};

/// Symbol sigma(x, k) for left quantization. `x_independent` enables the
/// Fourier-multiplier fast path; `k_independent` the pointwise one.
struct SymbolFunction {
  std::function<Eigen::MatrixXcd(const Eigen::VectorXd&, const Eigen::VectorXd&)> eval;
  int rows = 0;
  int cols = 0;
  bool x_independent = false;
  bool k_independent = false;
};

/// Left (Kohn-Nirenberg) quantization on the torus:
/// out(x) = Re sum_k sigma(x, k) v_hat(k) e^{2 pi i k.x}.
PeriodicField quantize(const SymbolFunction& sigma, const PeriodicField& v);

/// A v = sum_i A^i(x) d_i v, via spectral derivatives. Identical to
/// quantization of the first-order symbol.
PeriodicField apply_A(const CoefficientField& coeffs, const PeriodicField& v);

/// Approximate projection P_eta with symbol eta^2(x) P(x, k) chi(|k|/k_ref).
/// Precomputes per-frequency projector tables; constant-coefficient operators
/// use a pure multiplier path.
class ApproxProjection {
 public:
  ApproxProjection(const CoefficientField& coeffs, SpatialWindow eta, const TorusGrid& grid,
                   double k_ref = 1.0, CutoffChi chi = {});

  PeriodicField apply(const PeriodicField& v) const;
  const TorusGrid& grid() const { return grid_; }

 private:
  const CoefficientField* coeffs_;
  SpatialWindow eta_;
  TorusGrid grid_;
  double k_ref_;
  CutoffChi chi_;
  int rank_ = -1;
  std::vector<double> eta_sq_;                  // eta^2 at grid nodes
  std::vector<double> chi_k_;                   // chi(|k|/k_ref) per frequency
  std::vector<Eigen::MatrixXd> multiplier_;     // constant-coefficient path
  std::vector<Eigen::MatrixXd> table_;          // variable path: P at (x_i, k_j), row-major
};

PeriodicField apply_P_eta(const CoefficientField& coeffs, const SpatialWindow& eta,
                          const PeriodicField& v, double k_ref = 1.0);

// --- empirical operator bounds -----------------------------------------------

enum class SpectrumShape { White, Decay, Concentrated };

/// Random unit-norm real field with a prescribed spectral profile.
PeriodicField random_spectrum_field(const TorusGrid& grid, int components, SpectrumShape shape,
                                    std::uint64_t seed);

struct Prop22Row {
  int grid_points = 0;
  double q = 0.0;
  // max over the ensemble of the ratio left/right for each inequality
  double lq_bound = 0.0;         // |P v|_q / |v|_q
  double wm1_bound = 0.0;        // |P v|_{-1,q} / |v|_{-1,q}
  double approx_identity = 0.0;  // |v - P v|_q / (|A_eta v|_{-1,q} + |v|_{-1,q})
  double constraint_bound = 0.0; // |A_eta P v|_{-1,q} / |v|_{-1,q}
};

struct Prop22Report {
  std::string operator_label;
  std::string eta_label;
  std::vector<Prop22Row> rows;  // one per (grid, q)
};

Prop22Report verify_prop22(const CoefficientField& coeffs, const SpatialWindow& eta,
                           const std::vector<double>& qs, int ensemble_size,
                           const std::vector<int>& grid_ladder, std::uint64_t seed);

// --- decomposition into an equiintegrable family ------------------------------

struct DecompositionInput {
  int label = 1;  // index n in the family; drives the truncation quantile
  PeriodicField field;
};

struct DecompositionMemberReport {
  int label = 0;
  double truncation_level = 0.0;
  double lq_before = 0.0, lq_after = 0.0;
  std::vector<double> diff_ls;          // |out - in|_{L^s} per s in s_ladder
  std::vector<double> tails_before;     // tail at each M in m_ladder
  std::vector<double> tails_after;
  double residual_input = 0.0;     // wm1q of A v
  double residual_truncated = 0.0; // wm1q of A (truncated v)
  double residual_output = 0.0;    // wm1q of A v~
  double mean_error = 0.0;
};

struct DecompositionResult {
  std::vector<PeriodicField> fields;
  double pooled_median = 0.0;        // median of nonzero |values| over the ensemble
  std::vector<double> m_ladder;      // tail gauge levels (multiples of pooled_median)
  std::vector<double> s_ladder;
  std::vector<DecompositionMemberReport> members;
};

/// Truncate at level median(|v_n|) + quantile_{1-1/n}(|v_n|), restore
/// approximate A-freeness with P_eta, then restore the prescribed mean.
/// Never throws on a poor outcome; the report carries the verdict data.
DecompositionResult decompose_equiintegrable(const CoefficientField& coeffs,
                                             const SpatialWindow& eta,
                                             const std::vector<DecompositionInput>& ensemble,
                                             double q, const Eigen::VectorXd& mean_target,
                                             std::vector<double> s_ladder = {});

// --- vanishing perturbations ---------------------------------------------------

/// |Delta_n| = |avg f_n(y, w_n) - avg f_n(y, v_n + w_n)| per member. The
/// density's x slot receives the grid node y; u is frozen at zero. Growth
/// against C (1 + |xi|^q) is spot-checked first (UsageError on violation).
std::vector<double> perturbation_differences(const std::vector<const EnergyDensity*>& densities,
                                             const std::vector<PeriodicField>& w,
                                             const std::vector<PeriodicField>& v, double q);

}  // namespace aqc
