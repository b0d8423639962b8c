#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "aqc/symbols.hpp"
#include "aqc/torus.hpp"

namespace aqc {

/// Discrete frozen-coefficient test space at x0: mean-zero fields whose
/// spectral coefficient at every k != 0 lies in ker A(x0, k).
///
/// Stores one d x d orthogonal projector per nonzero frequency. Projectors
/// are even in k, so projection preserves Hermitian symmetry of real fields.
class AFreeTestSpace {
 public:
  AFreeTestSpace(const CoefficientField& coeffs, const Eigen::VectorXd& x0,
                 const TorusGrid& grid, int rank);

  const TorusGrid& grid() const { return grid_; }
  const FrozenSymbol& frozen() const { return frozen_; }
  const Eigen::VectorXd& point() const { return frozen_.point(); }

  /// Projector at the frequency with flat index idx. Zero at k = 0 and on
  /// rows carrying the self-paired -G/2 frequency (those alias their mirror
  /// and are excluded from the space; the open band |k_a| < G/2 remains).
  const Eigen::MatrixXd& projector(long long idx) const { return projectors_[idx]; }

  /// Number of independent real degrees of freedom = sum of projector ranks,
  /// i.e. (d - r) ((G-1)^N - 1) under constant rank.
  long long dimension() const;

  friend PeriodicField project_afree(const AFreeTestSpace& space, const PeriodicField& w);
  friend double constraint_residual(const AFreeTestSpace& space, const PeriodicField& w);

 private:
  FrozenSymbol frozen_;
  TorusGrid grid_;
  std::vector<Eigen::MatrixXd> projectors_;  // indexed by flat frequency index; identity slot at k=0 unused
};

/// Builds the per-frequency projector table. The frozen symbol's rank is
/// certified over the grid's nonzero frequencies first; a deviation throws
/// RankViolationError with the offending frequency.
AFreeTestSpace build_test_space(const CoefficientField& coeffs, const Eigen::VectorXd& x0,
                                const TorusGrid& grid);

/// Mean removal plus per-frequency kernel projection. Linear, idempotent,
/// self-adjoint and norm-nonincreasing in L^2.
PeriodicField project_afree(const AFreeTestSpace& space, const PeriodicField& w);

/// wm1q_norm at q = 2 of the frozen-coefficient constraint field
/// (2 pi i A(x0, k) w_hat(k) per frequency), normalized by lq_norm(w, 2).
/// Returns 0 for the zero field.
double constraint_residual(const AFreeTestSpace& space, const PeriodicField& w);

}  // namespace aqc
