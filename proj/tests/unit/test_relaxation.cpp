#include <doctest.h>

#include <cmath>

#include "aqc/catalog.hpp"
#include "aqc/relaxation.hpp"
#include "aqc/rng.hpp"

using namespace aqc;

namespace {

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

RelaxationQuery dwell_query(const CoefficientField& op, const EnergyDensity& density,
                            const TorusGrid& grid) {
  RelaxationQuery q;
  q.density = &density;
  q.coeffs = &op;
  q.u = PeriodicField(grid, 1);
  q.v = PeriodicField(grid, 2);
  q.x0 = vec2(0.5, 0.5);
  q.r_ladder = {1.0, 0.5};
  q.m_ladder = {2, 4};
  q.quadrature_per_axis = 2;
  q.envelope.grid_ladder = {8, 16};
  q.envelope.random_starts = 1;
  q.envelope.seed = 7;
  return q;
}

}  // namespace

TEST_SUITE_BEGIN("relaxation");

TEST_CASE("quadrature sets") {
  const QuadratureSet torus = torus_quadrature(2, 3);
  CHECK(torus.points.size() == 9);
  double total = 0.0;
  for (double w : torus.weights) total += w;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));

  const Eigen::VectorXd x0 = vec2(0.1, 0.9);
  const QuadratureSet cube = cube_quadrature(x0, 0.25, 3);
  total = 0.0;
  for (double w : cube.weights) total += w;
  CHECK(total == doctest::Approx(std::pow(0.25, 2)).epsilon(1e-14));
  for (const auto& x : cube.points)
    for (int a = 0; a < 2; ++a) CHECK(std::abs(wrap_periodic(x[a] - x0[a])) < 0.125);
}

TEST_CASE("recovery field") {
  const TorusGrid cell(2, 16), ambient(2, 64);
  Eigen::VectorXi k(2);
  k << 0, 1;
  const PeriodicField w = laminate_field(cell, k, vec2(1.0, 0.0), 0.5, 2.0);
  const Eigen::VectorXd x0 = vec2(0.5, 0.5);

  SUBCASE("whole-torus plateau reproduces the cell field") {
    ShellReport shell;
    const PeriodicField z = recovery_field(w, x0, 1.0, 1, 0.05, ambient, &shell);
    CHECK(shell.measure <= shell.bound);
    CHECK(shell.samples_per_period == doctest::Approx(64.0));
    // on the plateau, z equals w evaluated at x - x0
    long long checked = 0;
    for (long long i = 0; i < ambient.cell_count(); ++i) {
      const Eigen::VectorXd x = ambient.node(i);
      double tmax = 0.0;
      Eigen::VectorXd delta(2);
      for (int a = 0; a < 2; ++a) {
        delta[a] = wrap_periodic(x[a] - x0[a]);
        tmax = std::max(tmax, std::abs(delta[a]) * 2.0);
      }
      if (tmax > 0.9) continue;  // stay on the plateau
      ++checked;
      CHECK((z.values().row(i).transpose() - w.evaluate(delta)).norm() <= 1e-10);
    }
    CHECK(checked > 1000);
  }
  SUBCASE("fast oscillations average out over the cube") {
    ShellReport shell;
    const PeriodicField z = recovery_field(w, x0, 0.25, 8, 0.05, ambient, &shell);
    CHECK(shell.measure <= shell.bound);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(2);
    long long cells = 0;
    for (long long i = 0; i < ambient.cell_count(); ++i) {
      const Eigen::VectorXd x = ambient.node(i);
      double tmax = 0.0;
      for (int a = 0; a < 2; ++a)
        tmax = std::max(tmax, std::abs(wrap_periodic(x[a] - x0[a])) / 0.125);
      if (tmax >= 1.0) continue;
      mean += z.values().row(i).transpose();
      ++cells;
    }
    mean /= static_cast<double>(cells);
    CHECK(mean.norm() <= 1.0 / 8 + 1e-12);
  }
  SUBCASE("resolution guards") {
    CHECK_THROWS_AS(recovery_field(w, x0, 0.25, 16, 0.05, ambient, nullptr), ResolutionError);
    CHECK_THROWS_AS(recovery_field(w, x0, 0.25, 2, 1e-4, ambient, nullptr), ResolutionError);
  }
}

TEST_CASE("locality: the envelope integral reads coefficients only at quadrature points") {
  const EnergyDensity dwell = make_density("dwell");
  const TorusGrid grid(2, 32);
  const CoefficientField op = make_operator("div2d");
  RelaxationQuery q = dwell_query(op, dwell, grid);
  const QuadratureSet qs = cube_quadrature(q.x0, 0.5, 2);

  // bump perturbation supported away from every quadrature point
  auto far_from_all = [&qs](const Eigen::VectorXd& x) {
    double best = 1e9;
    for (const auto& p : qs.points) {
      double d2 = 0.0;
      for (int a = 0; a < 2; ++a) {
        const double t = wrap_periodic(x[a] - p[a]);
        d2 += t * t;
      }
      best = std::min(best, std::sqrt(d2));
    }
    return best;
  };
  const CoefficientField perturbed(
      op.label(), op.dims(),
      [far_from_all](const Eigen::VectorXd& x) {
        Eigen::MatrixXd a1(1, 2), a2(1, 2);
        const double eps = far_from_all(x) > 0.05 ? 0.3 : 0.0;
        a1 << 1.0 + eps, eps;
        a2 << 0, 1;
        return std::vector<Eigen::MatrixXd>{a1, a2};
      },
      100.0, false);

  RelaxationQuery q2 = dwell_query(perturbed, dwell, grid);
  const RelaxedIntegral a = relaxed_integral(q, qs, nullptr);
  const RelaxedIntegral b = relaxed_integral(q2, qs, nullptr);
  CHECK(a.value == b.value);  // bit-identical: the solves see identical frozen data
  for (std::size_t i = 0; i < a.rows.size(); ++i) CHECK(a.rows[i].value == b.rows[i].value);
}

TEST_CASE("theorem gap on the double-well benchmark at desk scale") {
  const EnergyDensity dwell = make_density("dwell");
  const TorusGrid grid(2, 32);
  const CoefficientField op = make_operator("div2d");
  RelaxationQuery q = dwell_query(op, dwell, grid);

  EnvelopeCache cache;
  const TheoremGapReport report = theorem_gap(q, &cache);

  CHECK(report.admissibility_v <= 1e-12);
  CHECK(report.rhs <= 1e-6);           // envelope vanishes at xi = 0
  CHECK(report.lower_bound_ok);        // energies sit above the envelope integral
  CHECK(report.gap >= -report.tol_lower);
  CHECK(report.gap <= report.tol_upper);
  CHECK(report.pass);

  // the liminf surrogate does not increase along the oscillation ladder
  for (std::size_t ri = 0; ri < q.r_ladder.size(); ++ri) {
    const LadderEntry& coarse = report.ladder[ri * q.m_ladder.size()];
    const LadderEntry& fine = report.ladder[ri * q.m_ladder.size() + 1];
    CHECK(fine.energy <= coarse.energy + 1e-6);
  }

  // cache paid off across the quadrature ladder (shared center point)
  CHECK(cache.hits() + cache.misses() > 0);
}

TEST_CASE("theorem gap rejects inadmissible base fields") {
  const EnergyDensity dwell = make_density("dwell");
  const TorusGrid grid(2, 32);
  const CoefficientField op = make_operator("div2d");
  RelaxationQuery q = dwell_query(op, dwell, grid);
  auto rng = make_rng(3);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto& vals = q.v.mutable_values();
  for (long long i = 0; i < q.v.size(); ++i)
    for (int c = 0; c < 2; ++c) vals(i, c) = gauss(rng);
  CHECK_THROWS_AS(theorem_gap(q, nullptr), UsageError);
}

TEST_SUITE_END();
