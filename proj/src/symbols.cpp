#include "aqc/symbols.hpp"

#include <cmath>
#include <limits>
#include <map>

#include "aqc/rng.hpp"

namespace aqc {

CoefficientField::CoefficientField(std::string label, OperatorDims dims, CoeffFn eval,
                                   double lipschitz_bound, bool constant_coefficients)
    : label_(std::move(label)),
      dims_(dims),
      eval_(std::move(eval)),
      lipschitz_bound_(lipschitz_bound),
      constant_(constant_coefficients) {
  if (dims_.space_dim < 1 || dims_.field_dim < 1 || dims_.equation_dim < 1)
    throw UsageError("CoefficientField: dimensions must be positive");
}

std::vector<Eigen::MatrixXd> CoefficientField::coefficients(const Eigen::VectorXd& x) const {
  if (x.size() != dims_.space_dim)
    throw ConfigError("CoefficientField '" + label_ + "': point has wrong dimension");
  std::vector<Eigen::MatrixXd> mats = eval_(x);
  if (static_cast<int>(mats.size()) != dims_.space_dim)
    throw ConfigError("CoefficientField '" + label_ + "': coefficient count != space dimension");
  for (const auto& m : mats)
    if (m.rows() != dims_.equation_dim || m.cols() != dims_.field_dim)
      throw ConfigError("CoefficientField '" + label_ + "': coefficient matrix has wrong shape");
  return mats;
}

Eigen::MatrixXd CoefficientField::symbol(const Eigen::VectorXd& x,
                                         const Eigen::VectorXd& lambda) const {
  if (lambda.size() != dims_.space_dim)
    throw UsageError("CoefficientField::symbol: direction has wrong dimension");
  if (!lambda.allFinite()) throw UsageError("CoefficientField::symbol: direction must be finite");
  const auto mats = coefficients(x);
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(dims_.equation_dim, dims_.field_dim);
  for (int i = 0; i < dims_.space_dim; ++i) S += mats[i] * lambda[i];
  return S;
}

double CoefficientField::sampled_lipschitz(const std::vector<Eigen::VectorXd>& xs) const {
  double worst = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto a = coefficients(xs[i]);
    for (std::size_t j = i + 1; j < xs.size(); ++j) {
      const double dist = (xs[i] - xs[j]).norm();
      if (dist < 1e-12) continue;
      const auto b = coefficients(xs[j]);
      for (int m = 0; m < dims_.space_dim; ++m)
        worst = std::max(worst, (a[m] - b[m]).norm() / dist);
    }
  }
  return worst;
}

namespace {
double rank_cutoff(const Eigen::VectorXd& sigma) {
  const double eps = std::numeric_limits<double>::epsilon();
  return sigma.size() ? sigma[0] * std::sqrt(eps) : 0.0;
}
}  // namespace

int numerical_rank(const Eigen::JacobiSVD<Eigen::MatrixXd>& svd) {
  const Eigen::VectorXd& s = svd.singularValues();
  const double cutoff = rank_cutoff(s);
  int r = 0;
  while (r < s.size() && s[r] > cutoff) ++r;
  return r;
}

Eigen::MatrixXd kernel_projector(const Eigen::MatrixXd& S, int rank) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(S, Eigen::ComputeFullV);
  if (numerical_rank(svd) != rank)
    throw RankViolationError("kernel_projector: numerical rank " +
                             std::to_string(numerical_rank(svd)) + " != expected " +
                             std::to_string(rank));
  const int d = static_cast<int>(S.cols());
  const Eigen::MatrixXd V2 = svd.matrixV().rightCols(d - rank);
  return V2 * V2.transpose();
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& S, int rank) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(S, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (numerical_rank(svd) != rank)
    throw RankViolationError("pseudo_inverse: numerical rank " +
                             std::to_string(numerical_rank(svd)) + " != expected " +
                             std::to_string(rank));
  const Eigen::VectorXd& s = svd.singularValues();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(S.cols(), S.rows());
  for (int i = 0; i < rank; ++i)
    out += svd.matrixV().col(i) * svd.matrixU().col(i).transpose() / s[i];
  return out;
}

FrozenSymbol::FrozenSymbol(const CoefficientField& coeffs, Eigen::VectorXd x0, int rank)
    : x0_(std::move(x0)), rank_(rank), dims_(coeffs.dims()) {
  frozen_coeffs_ = coeffs.coefficients(x0_);
}

Eigen::MatrixXd FrozenSymbol::matrix(const Eigen::VectorXd& lambda) const {
  if (lambda.size() != dims_.space_dim)
    throw UsageError("FrozenSymbol::matrix: direction has wrong dimension");
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(dims_.equation_dim, dims_.field_dim);
  for (int i = 0; i < dims_.space_dim; ++i) S += frozen_coeffs_[i] * lambda[i];
  return S;
}

Eigen::MatrixXd FrozenSymbol::projector(const Eigen::VectorXd& lambda) const {
  return kernel_projector(matrix(lambda), rank_);
}

Eigen::MatrixXd FrozenSymbol::q_operator(const Eigen::VectorXd& lambda) const {
  return pseudo_inverse(matrix(lambda), rank_);
}

Eigen::MatrixXd FrozenSymbol::kernel_basis(const Eigen::VectorXd& lambda) const {
  const Eigen::MatrixXd S = matrix(lambda);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(S, Eigen::ComputeFullV);
  if (numerical_rank(svd) != rank_)
    throw RankViolationError("FrozenSymbol::kernel_basis: rank deviates at sampled direction");
  return svd.matrixV().rightCols(dims_.field_dim - rank_);
}

RankCertificate verify_constant_rank(const CoefficientField& coeffs,
                                     const std::vector<Eigen::VectorXd>& x_samples,
                                     const std::vector<Eigen::VectorXd>& lambda_samples,
                                     double gap_threshold) {
  if (x_samples.empty() || lambda_samples.empty())
    throw UsageError("verify_constant_rank: sample sets must be nonempty");
  for (const auto& l : lambda_samples)
    if (std::abs(l.norm() - 1.0) > 1e-8)
      throw UsageError("verify_constant_rank: direction samples must be unit vectors");

  struct Obs {
    int rank;
    double gap;
    Eigen::VectorXd x, lambda;
  };
  std::vector<Obs> obs;
  obs.reserve(x_samples.size() * lambda_samples.size());
  std::map<int, long long> votes;
  for (const auto& x : x_samples) {
    for (const auto& l : lambda_samples) {
      const Eigen::MatrixXd S = coeffs.symbol(x, l);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(S);
      const Eigen::VectorXd& s = svd.singularValues();
      const double cutoff = rank_cutoff(s);
      int r = 0;
      while (r < s.size() && s[r] > cutoff) ++r;
      double gap = std::numeric_limits<double>::infinity();
      if (r > 0) {
        const double below = (r < s.size()) ? std::max(s[r], cutoff) : cutoff;
        gap = (below > 0) ? s[r - 1] / below : std::numeric_limits<double>::infinity();
      }
      obs.push_back({r, gap, x, l});
      ++votes[r];
    }
  }

  int consensus = -1;
  long long best = -1;
  for (const auto& [r, count] : votes)
    if (count > best) {
      best = count;
      consensus = r;
    }

  RankCertificate cert;
  cert.rank = consensus;
  cert.sample_count = static_cast<long long>(obs.size());
  cert.min_gap = std::numeric_limits<double>::infinity();
  cert.pass = true;
  for (const auto& o : obs) {
    if (o.rank != consensus || o.gap < gap_threshold) {
      cert.pass = false;
      if (!cert.failure) cert.failure = RankWitness{o.x, o.lambda, o.rank};
    }
    cert.min_gap = std::min(cert.min_gap, o.gap);
  }
  return cert;
}

FrozenSymbol freeze_certified(const CoefficientField& coeffs, const Eigen::VectorXd& x0) {
  const auto lams = sphere_samples(coeffs.dims().space_dim, 16, 16, 0x5eedULL);
  const RankCertificate cert = verify_constant_rank(coeffs, {x0}, lams, 1e3);
  if (!cert.pass)
    throw RankViolationError("freeze_certified: rank certificate fails at x0 for '" +
                             coeffs.label() + "'");
  return FrozenSymbol(coeffs, x0, cert.rank);
}

std::vector<Eigen::VectorXd> sphere_samples(int dim, int deterministic_count, int random_count,
                                            std::uint64_t seed) {
  std::vector<Eigen::VectorXd> out;
  if (dim == 1) {
    Eigen::VectorXd plus(1), minus(1);
    plus << 1.0;
    minus << -1.0;
    if (deterministic_count > 0) out.push_back(plus);
    if (deterministic_count > 1) out.push_back(minus);
  } else if (dim == 2) {
    const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
    for (int i = 0; i < deterministic_count; ++i) {
      const double theta = 2.0 * M_PI * std::fmod(i * golden, 1.0);
      Eigen::VectorXd v(2);
      v << std::cos(theta), std::sin(theta);
      out.push_back(v);
    }
  } else if (dim == 3) {
    const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
    for (int i = 0; i < deterministic_count; ++i) {
      const double z = 1.0 - 2.0 * (i + 0.5) / deterministic_count;
      const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double theta = 2.0 * M_PI * std::fmod(i * golden, 1.0);
      Eigen::VectorXd v(3);
      v << rho * std::cos(theta), rho * std::sin(theta), z;
      out.push_back(v);
    }
  } else {
    throw UsageError("sphere_samples: dim must be 1, 2 or 3");
  }
  auto rng = make_rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int i = 0; i < random_count; ++i) {
    Eigen::VectorXd v(dim);
    do {
      for (int a = 0; a < dim; ++a) v[a] = gauss(rng);
    } while (v.norm() < 1e-8);
    out.push_back(v / v.norm());
  }
  return out;
}

std::vector<Eigen::VectorXd> lattice_samples(int dim, int per_axis) {
  if (per_axis < 1) throw UsageError("lattice_samples: per_axis must be >= 1");
  std::vector<Eigen::VectorXd> out;
  long long total = 1;
  for (int a = 0; a < dim; ++a) total *= per_axis;
  for (long long i = 0; i < total; ++i) {
    Eigen::VectorXd x(dim);
    long long rem = i;
    for (int a = dim - 1; a >= 0; --a) {
      x[a] = static_cast<double>(rem % per_axis) / per_axis;
      rem /= per_axis;
    }
    out.push_back(x);
  }
  return out;
}

}  // namespace aqc
