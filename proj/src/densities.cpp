#include "aqc/densities.hpp"

#include <cmath>

#include "aqc/errors.hpp"
#include "aqc/rng.hpp"

namespace aqc {

EnergyDensity EnergyDensity::shifted(const Eigen::VectorXd& shift) const {
  ValueFn v = value_;
  GradFn g = grad_;
  Eigen::VectorXd s = shift;
  // Growth constants stay valid up to the shift radius; recompute C crudely so
  // the bound still holds on the shifted arguments.
  GrowthBound gb = growth_;
  gb.C = growth_.C * std::pow(2.0, growth_.q) * (1.0 + std::pow(s.norm(), growth_.q));
  return EnergyDensity(
      label_ + "+shift",
      [v, s](const Eigen::VectorXd& x, const Eigen::VectorXd& u, const Eigen::VectorXd& xi) {
        return v(x, u, s + xi);
      },
      [g, s](const Eigen::VectorXd& x, const Eigen::VectorXd& u, const Eigen::VectorXd& xi) {
        return g(x, u, s + xi);
      },
      gb, convex_);
}

namespace {

Eigen::VectorXd heavy_tailed_vector(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = gauss(rng);
  // radius with a fat tail so large arguments get probed
  const double r = std::pow(unif(rng), -0.35) - 1.0;
  return v * r;
}

}  // namespace

GrowthCheckResult growth_check(const EnergyDensity& f, int sample_count, int space_dim,
                               int u_dim, int xi_dim, std::uint64_t seed) {
  auto rng = make_rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  GrowthCheckResult result;
  result.pass = true;
  const GrowthBound& g = f.growth();
  for (int i = 0; i < sample_count; ++i) {
    Eigen::VectorXd x(space_dim);
    for (int a = 0; a < space_dim; ++a) x[a] = unif(rng);
    const Eigen::VectorXd u = heavy_tailed_vector(rng, u_dim);
    const Eigen::VectorXd xi = heavy_tailed_vector(rng, xi_dim);
    const double value = f(x, u, xi);
    if (value < 0.0) {
      result.pass = false;
      result.worst_ratio = std::numeric_limits<double>::infinity();
      result.witness_xi = xi;
      return result;
    }
    const double bound = g.C * (1.0 + std::pow(u.norm(), g.p) + std::pow(xi.norm(), g.q));
    const double ratio = value / bound;
    if (ratio > result.worst_ratio) {
      result.worst_ratio = ratio;
      result.witness_xi = xi;
    }
  }
  result.pass = result.worst_ratio <= 1.0;
  return result;
}

double gradient_check(const EnergyDensity& f, int sample_count, double h, int space_dim,
                      int u_dim, int xi_dim, std::uint64_t seed) {
  if (!(h > 0.0)) throw UsageError("gradient_check: step must be positive");
  auto rng = make_rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < sample_count; ++i) {
    Eigen::VectorXd x(space_dim);
    for (int a = 0; a < space_dim; ++a) x[a] = unif(rng);
    Eigen::VectorXd u(u_dim), xi(xi_dim);
    for (int a = 0; a < u_dim; ++a) u[a] = gauss(rng);
    for (int a = 0; a < xi_dim; ++a) xi[a] = 2.0 * gauss(rng);
    const Eigen::VectorXd grad = f.grad_xi(x, u, xi);
    Eigen::VectorXd fd(xi_dim);
    for (int a = 0; a < xi_dim; ++a) {
      Eigen::VectorXd hi = xi, lo = xi;
      hi[a] += h;
      lo[a] -= h;
      fd[a] = (f(x, u, hi) - f(x, u, lo)) / (2.0 * h);
    }
    worst = std::max(worst, (grad - fd).norm() / (1.0 + grad.norm()));
  }
  return worst;
}

}  // namespace aqc
