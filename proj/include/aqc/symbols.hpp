#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "aqc/errors.hpp"

namespace aqc {

/// Dimensions of a first-order operator sum_i A^i(x) d/dx_i acting on
/// d-component fields over R^N with values in R^l.
struct OperatorDims {
  int space_dim = 0;     // N
  int field_dim = 0;     // d
  int equation_dim = 0;  // l
};

/// The coefficient matrices A^i(x) of a first-order operator, together with a
/// Lipschitz bound standing in for the W^{1,inf} norm of the coefficients.
class CoefficientField {
 public:
  using CoeffFn = std::function<std::vector<Eigen::MatrixXd>(const Eigen::VectorXd&)>;

  CoefficientField(std::string label, OperatorDims dims, CoeffFn eval,
                   double lipschitz_bound, bool constant_coefficients);

  const std::string& label() const { return label_; }
  const OperatorDims& dims() const { return dims_; }
  double lipschitz_bound() const { return lipschitz_bound_; }
  bool constant_coefficients() const { return constant_; }

  /// A^1(x), ..., A^N(x); validates matrix shapes.
  std::vector<Eigen::MatrixXd> coefficients(const Eigen::VectorXd& x) const;

  /// sum_i A^i(x) lambda_i. lambda = 0 gives the zero matrix.
  Eigen::MatrixXd symbol(const Eigen::VectorXd& x, const Eigen::VectorXd& lambda) const;

  /// max over sampled pairs of ||A^i(x) - A^i(y)|| / |x - y|; used by the
  /// Lipschitz invariant check.
  double sampled_lipschitz(const std::vector<Eigen::VectorXd>& xs) const;

 private:
  std::string label_;
  OperatorDims dims_;
  CoeffFn eval_;
  double lipschitz_bound_;
  bool constant_;
};

/// Rank threshold: singular values below max(sigma) * sqrt(machine epsilon)
/// count as zero.
int numerical_rank(const Eigen::JacobiSVD<Eigen::MatrixXd>& svd);

/// Orthogonal projector onto ker S, from the right singular vectors past the
/// first `rank`. Throws RankViolationError if the numerical rank of S is not
/// `rank`.
Eigen::MatrixXd kernel_projector(const Eigen::MatrixXd& S, int rank);

/// Moore-Penrose pseudo-inverse S^+ (d x l). Satisfies S^+ S = I - P and
/// S^+ annihilates the orthogonal complement of Range S.
Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& S, int rank);

/// Frozen-coefficient symbol lambda -> A(x0, lambda), with its rank.
class FrozenSymbol {
 public:
  FrozenSymbol(const CoefficientField& coeffs, Eigen::VectorXd x0, int rank);

  const Eigen::VectorXd& point() const { return x0_; }
  int rank() const { return rank_; }
  const OperatorDims& dims() const { return dims_; }

  Eigen::MatrixXd matrix(const Eigen::VectorXd& lambda) const;
  /// P(x0, lambda): projector onto ker A(x0, lambda). Even and 0-homogeneous
  /// in lambda.
  Eigen::MatrixXd projector(const Eigen::VectorXd& lambda) const;
  /// Q(x0, lambda) = pseudo-inverse; (-1)-homogeneous in lambda.
  Eigen::MatrixXd q_operator(const Eigen::VectorXd& lambda) const;
  /// Orthonormal basis of ker A(x0, lambda) (d x (d - rank)).
  Eigen::MatrixXd kernel_basis(const Eigen::VectorXd& lambda) const;

 private:
  Eigen::VectorXd x0_;
  int rank_;
  OperatorDims dims_;
  std::vector<Eigen::MatrixXd> frozen_coeffs_;
};

struct RankWitness {
  Eigen::VectorXd x;
  Eigen::VectorXd lambda;
  int rank = 0;
};

/// Outcome of sampling rank A(x, lambda) over (x, lambda) pairs.
struct RankCertificate {
  int rank = -1;        // consensus rank (mode over samples)
  double min_gap = 0;   // smallest sigma_r / max(sigma_{r+1}, cutoff) over samples
  bool pass = false;
  long long sample_count = 0;
  std::optional<RankWitness> failure;  // first sample deviating from consensus
};

/// Verifies the constant-rank condition over the sample product set.
/// lambda samples must be nonempty and (approximately) unit vectors.
RankCertificate verify_constant_rank(const CoefficientField& coeffs,
                                     const std::vector<Eigen::VectorXd>& x_samples,
                                     const std::vector<Eigen::VectorXd>& lambda_samples,
                                     double gap_threshold);

/// Freezes the symbol at x0 with the rank certified over a direction sample;
/// throws RankViolationError on a failed certificate.
FrozenSymbol freeze_certified(const CoefficientField& coeffs, const Eigen::VectorXd& x0);

/// Deterministic low-discrepancy points on S^{N-1} (golden-angle circle for
/// N = 2, Fibonacci sphere for N = 3, {-1, +1} for N = 1) followed by
/// seeded uniform random directions.
std::vector<Eigen::VectorXd> sphere_samples(int dim, int deterministic_count, int random_count,
                                            std::uint64_t seed);

/// Uniform lattice over the unit torus used as default x samples.
std::vector<Eigen::VectorXd> lattice_samples(int dim, int per_axis);

}  // namespace aqc
