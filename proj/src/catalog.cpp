#include "aqc/catalog.hpp"

#include <cmath>

#include "aqc/errors.hpp"

namespace aqc {

void parse_label(const std::string& spec, std::string* name, std::vector<double>* params) {
  params->clear();
  const auto open = spec.find('(');
  if (open == std::string::npos) {
    *name = spec;
    return;
  }
  if (spec.back() != ')') throw ConfigError("label '" + spec + "': unbalanced parentheses");
  *name = spec.substr(0, open);
  std::string body = spec.substr(open + 1, spec.size() - open - 2);
  std::size_t pos = 0;
  while (pos < body.size()) {
    std::size_t next = body.find(',', pos);
    if (next == std::string::npos) next = body.size();
    try {
      params->push_back(std::stod(body.substr(pos, next - pos)));
    } catch (const std::exception&) {
      throw ConfigError("label '" + spec + "': malformed parameter list");
    }
    pos = next + 1;
  }
}

CoefficientField make_operator(const std::string& spec) {
  std::string name;
  std::vector<double> params;
  parse_label(spec, &name, &params);

  if (name == "div2d") {
    Eigen::MatrixXd a1(1, 2), a2(1, 2);
    a1 << 1, 0;
    a2 << 0, 1;
    return CoefficientField(
        "div2d", {2, 2, 1},
        [a1, a2](const Eigen::VectorXd&) { return std::vector<Eigen::MatrixXd>{a1, a2}; }, 0.0,
        true);
  }
  if (name == "scalar-curl2d") {
    Eigen::MatrixXd a1(1, 2), a2(1, 2);
    a1 << 0, -1;
    a2 << 1, 0;
    return CoefficientField(
        "scalar-curl2d", {2, 2, 1},
        [a1, a2](const Eigen::VectorXd&) { return std::vector<Eigen::MatrixXd>{a1, a2}; }, 0.0,
        true);
  }
  if (name == "scaled-div2d") {
    const double amp = params.empty() ? 0.5 : params[0];
    if (!(amp > 0.0 && amp < 1.0))
      throw ConfigError("scaled-div2d: amplitude must lie in (0, 1) to keep a(x) positive");
    return CoefficientField(
        spec, {2, 2, 1},
        [amp](const Eigen::VectorXd& x) {
          Eigen::MatrixXd a1(1, 2), a2(1, 2);
          a1 << 1.0 + amp * std::sin(2.0 * M_PI * x[0]), 0;
          a2 << 0, 1;
          return std::vector<Eigen::MatrixXd>{a1, a2};
        },
        2.0 * M_PI * amp, false);
  }
  if (name == "diag-nonconstant-rank") {
    Eigen::MatrixXd a1 = Eigen::MatrixXd::Zero(2, 2), a2 = Eigen::MatrixXd::Zero(2, 2);
    a1(0, 0) = 1;
    a2(1, 1) = 1;
    return CoefficientField(
        "diag-nonconstant-rank", {2, 2, 2},
        [a1, a2](const Eigen::VectorXd&) { return std::vector<Eigen::MatrixXd>{a1, a2}; }, 0.0,
        true);
  }
  throw ConfigError("unknown operator label '" + spec + "'");
}

EnergyDensity make_density(const std::string& spec) {
  std::string name;
  std::vector<double> params;
  parse_label(spec, &name, &params);

  if (name == "quad") {
    return EnergyDensity(
        "quad",
        [](const Eigen::VectorXd&, const Eigen::VectorXd&, const Eigen::VectorXd& xi) {
          return xi.squaredNorm();
        },
        [](const Eigen::VectorXd&, const Eigen::VectorXd&, const Eigen::VectorXd& xi) {
          return Eigen::VectorXd(2.0 * xi);
        },
        GrowthBound{1.0, 2.0, 2.0}, true);
  }
  if (name == "dwell") {
    return EnergyDensity(
        "dwell",
        [](const Eigen::VectorXd&, const Eigen::VectorXd&, const Eigen::VectorXd& xi) {
          const double t = xi.squaredNorm() - 1.0;
          return t * t;
        },
        [](const Eigen::VectorXd&, const Eigen::VectorXd&, const Eigen::VectorXd& xi) {
          return Eigen::VectorXd(4.0 * (xi.squaredNorm() - 1.0) * xi);
        },
        GrowthBound{2.0, 2.0, 4.0}, false);
  }
  if (name == "pnorm") {
    const double q = params.empty() ? 4.0 : params[0];
    if (!(q >= 1.0)) throw ConfigError("pnorm: exponent must be >= 1");
    return EnergyDensity(
        spec,
        [q](const Eigen::VectorXd&, const Eigen::VectorXd&, const Eigen::VectorXd& xi) {
          return std::pow(xi.norm(), q);
        },
        [q](const Eigen::VectorXd&, const Eigen::VectorXd&, const Eigen::VectorXd& xi) {
          const double r = xi.norm();
          if (r < 1e-300) return Eigen::VectorXd(Eigen::VectorXd::Zero(xi.size()));
          return Eigen::VectorXd(q * std::pow(r, q - 2.0) * xi);
        },
        GrowthBound{1.0, q, q}, true);
  }
  if (name == "coupled") {
    return EnergyDensity(
        "coupled",
        [](const Eigen::VectorXd& x, const Eigen::VectorXd& u, const Eigen::VectorXd& xi) {
          const double t = xi.squaredNorm() - 1.0;
          const double b = 1.0 + 0.5 * std::cos(2.0 * M_PI * x[0]);
          return (1.0 + u.squaredNorm()) * t * t + b * xi.squaredNorm();
        },
        [](const Eigen::VectorXd& x, const Eigen::VectorXd& u, const Eigen::VectorXd& xi) {
          const double t = xi.squaredNorm() - 1.0;
          const double b = 1.0 + 0.5 * std::cos(2.0 * M_PI * x[0]);
          return Eigen::VectorXd((1.0 + u.squaredNorm()) * 4.0 * t * xi + 2.0 * b * xi);
        },
        GrowthBound{8.0, 6.0, 6.0}, false);
  }
  throw ConfigError("unknown density label '" + spec + "'");
}

std::vector<std::string> operator_labels() {
  return {"div2d", "scalar-curl2d", "scaled-div2d", "diag-nonconstant-rank"};
}

std::vector<std::string> density_labels() { return {"quad", "dwell", "pnorm", "coupled"}; }

}  // namespace aqc
