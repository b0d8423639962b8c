#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>

namespace aqc {

/// Growth bound 0 <= f(x, u, xi) <= C (1 + |u|^p + |xi|^q).
struct GrowthBound {
  double C = 1.0;
  double p = 2.0;
  double q = 2.0;
};

/// Integrand f(x, u, xi) >= 0 with an analytic gradient in xi.
///
/// u enters only as a frozen parameter; no u-derivatives are provided.
class EnergyDensity {
 public:
  using ValueFn =
      std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&, const Eigen::VectorXd&)>;
  using GradFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&,
                                               const Eigen::VectorXd&)>;

  EnergyDensity(std::string label, ValueFn value, GradFn grad_xi, GrowthBound growth, bool convex)
      : label_(std::move(label)),
        value_(std::move(value)),
        grad_(std::move(grad_xi)),
        growth_(growth),
        convex_(convex) {}

  const std::string& label() const { return label_; }
  const GrowthBound& growth() const { return growth_; }
  bool convex() const { return convex_; }

  double operator()(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                    const Eigen::VectorXd& xi) const {
    return value_(x, u, xi);
  }
  Eigen::VectorXd grad_xi(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                          const Eigen::VectorXd& xi) const {
    return grad_(x, u, xi);
  }

  /// Same integrand with xi pre-shifted: g(x, u, xi) = f(x, u, shift + xi).
  EnergyDensity shifted(const Eigen::VectorXd& shift) const;

 private:
  std::string label_;
  ValueFn value_;
  GradFn grad_;
  GrowthBound growth_;
  bool convex_;
};

struct GrowthCheckResult {
  bool pass = false;
  double worst_ratio = 0.0;  // max f / (C (1 + |u|^p + |xi|^q)) over samples
  Eigen::VectorXd witness_xi;
};

/// Samples (x, u, xi) triples with heavy-tailed radii and checks the growth
/// bound. x, u, xi dimensions are taken from the arguments.
GrowthCheckResult growth_check(const EnergyDensity& f, int sample_count, int space_dim,
                               int u_dim, int xi_dim, std::uint64_t seed);

/// max over samples of |grad_xi - central difference| / (1 + |grad_xi|).
double gradient_check(const EnergyDensity& f, int sample_count, double h, int space_dim,
                      int u_dim, int xi_dim, std::uint64_t seed);

}  // namespace aqc
