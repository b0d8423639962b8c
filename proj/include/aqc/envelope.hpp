#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aqc/afree.hpp"
#include "aqc/densities.hpp"
#include "aqc/symbols.hpp"
#include "aqc/torus.hpp"

namespace aqc {

struct EnvelopeOptions {
  std::vector<int> grid_ladder{8, 16, 32};
  int random_starts = 4;
  double start_amplitude = 1.0;
  int max_iterations = 2000;
  double armijo_slope = 1e-4;
  double backtrack = 0.5;
  double relative_tolerance = 1e-8;
  std::uint64_t seed = 1;
  // laminate scan
  int laminate_directions = 48;
  int laminate_fractions = 16;
  int laminate_amplitudes = 129;       // odd; grid symmetric in [-max, max]
  double laminate_max_amplitude = 4.0;
  int laminate_seeds = 3;
};

/// One frozen-coefficient cell problem: minimize the cell average of
/// f(x0, u0, xi + w(y)) over mean-zero A(x0)-free periodic fields w.
struct EnvelopeQuery {
  const EnergyDensity* density = nullptr;
  const CoefficientField* coeffs = nullptr;
  Eigen::VectorXd x0;
  Eigen::VectorXd u0;
  Eigen::VectorXd xi;
  EnvelopeOptions options;
};

struct StartRecord {
  std::string kind;  // "zero", "random#", "laminate#", "warm"
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct RungRecord {
  int grid_points = 0;
  double value = 0.0;
  std::vector<StartRecord> starts;
};

struct LaminateChoice {
  Eigen::VectorXd direction;   // unit vector
  Eigen::VectorXi int_direction;  // integer representative; zero if none
  Eigen::VectorXd kernel_vector;
  double fraction = 0.5;   // theta
  double amplitude = 0.0;  // t
  double value = 0.0;
};

struct LaminateBound {
  double value = 0.0;
  std::vector<LaminateChoice> best;  // ascending by value; integer-direction entries first
};

struct EnvelopeResult {
  double value = 0.0;
  PeriodicField minimizer;
  std::vector<RungRecord> ladder;
  LaminateBound laminate;
  bool converged = false;
};

/// Cell average of f(x0, u0, xi + w(y)).
double cell_energy(const EnergyDensity& f, const Eigen::VectorXd& x0, const Eigen::VectorXd& u0,
                   const Eigen::VectorXd& xi, const PeriodicField& w);

/// First-order laminate upper bound: min over sampled directions lambda,
/// kernel vectors a, volume fractions theta and amplitudes t of
///   theta f(xi + (1-theta) t a) + (1-theta) f(xi - theta t a).
LaminateBound laminate_upper_bound(const FrozenSymbol& frozen, const EnergyDensity& f,
                                   const Eigen::VectorXd& u0, const Eigen::VectorXd& xi,
                                   const EnvelopeOptions& options);

/// Projected-gradient multi-start solve over the grid ladder. The reported
/// value is an upper bound on the infimum by construction.
EnvelopeResult minimize_cell(const EnvelopeQuery& query);

/// Spectral zero-padding onto a finer grid (Nyquist band dropped).
PeriodicField spectral_upsample(const PeriodicField& v, const TorusGrid& fine);

/// Periodic square-wave laminate a * s(k . y) with mean-zero profile
/// s = (1-theta) t on a theta fraction of the period, -theta t elsewhere.
PeriodicField laminate_field(const TorusGrid& grid, const Eigen::VectorXi& k,
                             const Eigen::VectorXd& a, double theta, double t);

// --- discrete convex biconjugate oracle --------------------------------------

/// Uniform product grid on a box in R^d (d = 1 or 2 supported).
struct XiGrid {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
  std::vector<int> n;  // points per axis, each >= 3

  int dim() const { return static_cast<int>(n.size()); }
  long long size() const;
  Eigen::VectorXd point(long long flat) const;
  long long flatten(const std::vector<int>& idx) const;
};

/// Discrete Legendre-Fenchel transform applied twice. Output <= input
/// pointwise and convex along grid lines. dual_points_per_axis <= 0 picks an
/// automatic dual resolution.
Eigen::VectorXd convex_biconjugate(const XiGrid& grid, const Eigen::VectorXd& values,
                                   int dual_points_per_axis = 0);

}  // namespace aqc
