#include <doctest.h>

#include <cmath>

#include "aqc/afree.hpp"
#include "aqc/catalog.hpp"
#include "aqc/pseudodiff.hpp"
#include "aqc/reporting.hpp"
#include "aqc/rng.hpp"

using namespace aqc;

namespace {

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

PeriodicField random_field(const TorusGrid& grid, int d, std::uint64_t seed) {
  auto rng = make_rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  PeriodicField f(grid, d);
  auto& vals = f.mutable_values();
  for (long long i = 0; i < f.size(); ++i)
    for (int c = 0; c < d; ++c) vals(i, c) = gauss(rng);
  return f;
}

// mean-free band-limited field with spectrum in lo <= |k| <= hi
PeriodicField bandpass_field(const TorusGrid& grid, int d, double lo, double hi,
                             std::uint64_t seed) {
  auto rng = make_rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXcd coeffs = Eigen::MatrixXcd::Zero(grid.cell_count(), d);
  for (long long j = 0; j < grid.cell_count(); ++j) {
    const double k = grid.frequency_vector(j).norm();
    if (k < lo || k > hi) continue;
    for (int c = 0; c < d; ++c) coeffs(j, c) = std::complex<double>(gauss(rng), gauss(rng));
  }
  return PeriodicField::from_spectrum(grid, coeffs);
}

}  // namespace

TEST_SUITE_BEGIN("pseudodiff");

TEST_CASE("cutoff profile") {
  CutoffChi chi;
  CHECK(chi(0.3) == 0.0);
  CHECK(chi(1.0) == 0.0);
  CHECK(chi(2.0) == 1.0);
  CHECK(chi(5.0) == 1.0);
  double prev = 0.0;
  for (double t = 1.0; t <= 2.0; t += 1.0 / 64) {
    CHECK(chi(t) >= prev - 1e-15);
    prev = chi(t);
  }
}

TEST_CASE("quantize degenerate paths") {
  const TorusGrid grid(2, 16);
  const PeriodicField v = random_field(grid, 2, 5);

  SUBCASE("identity symbol reproduces the field") {
    SymbolFunction sigma;
    sigma.rows = sigma.cols = 2;
    sigma.x_independent = true;
    sigma.eval = [](const Eigen::VectorXd&, const Eigen::VectorXd&) {
      return Eigen::MatrixXcd(Eigen::MatrixXcd::Identity(2, 2));
    };
    CHECK((quantize(sigma, v).values() - v.values()).norm() <= 1e-12 * v.values().norm());
  }
  SUBCASE("frequency-only symbol equals the multiplier path") {
    auto bessel = [](const Eigen::VectorXd& k) {
      return 1.0 / std::sqrt(1.0 + 4.0 * M_PI * M_PI * k.squaredNorm());
    };
    SymbolFunction sigma;
    sigma.rows = sigma.cols = 2;
    sigma.eval = [bessel](const Eigen::VectorXd&, const Eigen::VectorXd& k) {
      return Eigen::MatrixXcd(bessel(k) * Eigen::MatrixXcd::Identity(2, 2));
    };
    // generic path
    const PeriodicField slow = quantize(sigma, v);
    // multiplier path
    SymbolFunction fast = sigma;
    fast.x_independent = true;
    const PeriodicField quick = quantize(fast, v);
    CHECK((slow.values() - quick.values()).norm() <= 1e-12 * v.values().norm());
  }
  SUBCASE("space-only symbol is pointwise multiplication") {
    auto scale = [](const Eigen::VectorXd& x) { return 1.0 + 0.5 * std::cos(2.0 * M_PI * x[0]); };
    SymbolFunction sigma;
    sigma.rows = sigma.cols = 2;
    sigma.eval = [scale](const Eigen::VectorXd& x, const Eigen::VectorXd&) {
      return Eigen::MatrixXcd(scale(x) * Eigen::MatrixXcd::Identity(2, 2));
    };
    const PeriodicField slow = quantize(sigma, v);
    SymbolFunction fast = sigma;
    fast.k_independent = true;
    const PeriodicField quick = quantize(fast, v);
    Eigen::MatrixXd expected = v.values();
    for (long long i = 0; i < v.size(); ++i) expected.row(i) *= scale(grid.node(i));
    CHECK((slow.values() - expected).norm() <= 1e-12 * expected.norm());
    CHECK((quick.values() - expected).norm() <= 1e-12 * expected.norm());
  }
  SUBCASE("derivative symbol is the spectral derivative") {
    SymbolFunction sigma;
    sigma.rows = sigma.cols = 2;
    sigma.eval = [](const Eigen::VectorXd&, const Eigen::VectorXd& k) {
      return Eigen::MatrixXcd(std::complex<double>(0.0, 2.0 * M_PI * k[1]) *
                              Eigen::MatrixXcd::Identity(2, 2));
    };
    const PeriodicField lhs = quantize(sigma, v);
    const PeriodicField rhs = spectral_derivative(v, 1);
    CHECK((lhs.values() - rhs.values()).norm() <= 1e-10 * (1.0 + rhs.values().norm()));
  }
}

TEST_CASE("apply_A") {
  const TorusGrid grid(2, 32);
  SUBCASE("agrees with the afree constraint for constant coefficients") {
    const CoefficientField op = make_operator("div2d");
    const AFreeTestSpace space = build_test_space(op, vec2(0.5, 0.5), grid);
    const PeriodicField w = project_afree(space, random_field(grid, 2, 6));
    CHECK(lq_norm(apply_A(op, w), 2.0) <= 1e-10);
  }
  SUBCASE("divergence annihilates rotated gradients") {
    const CoefficientField op = make_operator("div2d");
    const PeriodicField psi = bandpass_field(grid, 1, 1.0, 6.0, 7);
    const PeriodicField d0 = spectral_derivative(psi, 0);
    const PeriodicField d1 = spectral_derivative(psi, 1);
    PeriodicField v(grid, 2);
    v.mutable_values().col(0) = -d1.values().col(0);
    v.mutable_values().col(1) = d0.values().col(0);
    CHECK(lq_norm(apply_A(op, v), 2.0) <= 1e-10 * (1.0 + lq_norm(v, 2.0)));
  }
  SUBCASE("product-rule field matches the hand formula for scaled-div2d") {
    const CoefficientField op = make_operator("scaled-div2d");
    auto a = [](double x1) { return 1.0 + 0.5 * std::sin(2.0 * M_PI * x1); };
    auto da = [](double x1) { return M_PI * std::cos(2.0 * M_PI * x1); };
    const PeriodicField v = PeriodicField::sample(grid, 2, [&](const Eigen::VectorXd& x) {
      return Eigen::VectorXd(vec2(std::cos(2.0 * M_PI * x[1]) / a(x[0]), 0.0));
    });
    const PeriodicField lhs = apply_A(op, v);
    const PeriodicField expected = PeriodicField::sample(grid, 1, [&](const Eigen::VectorXd& x) {
      Eigen::VectorXd r(1);
      r << -da(x[0]) / a(x[0]) * std::cos(2.0 * M_PI * x[1]);
      return r;
    });
    // 1/a is analytic: its aliasing error at G = 32 sits near 1e-9
    CHECK(lq_norm(lhs - expected, 2.0) <= 1e-6);
  }
  SUBCASE("left quantization of the first-order symbol gives the same operator") {
    const CoefficientField op = make_operator("scaled-div2d");
    const PeriodicField v = random_field(grid, 2, 8);
    SymbolFunction sigma;
    sigma.rows = 1;
    sigma.cols = 2;
    sigma.eval = [&op](const Eigen::VectorXd& x, const Eigen::VectorXd& k) {
      return Eigen::MatrixXcd(std::complex<double>(0.0, 2.0 * M_PI) * op.symbol(x, k));
    };
    const PeriodicField quantized = quantize(sigma, v);
    const PeriodicField direct = apply_A(op, v);
    CHECK(lq_norm(quantized - direct, 2.0) <= 1e-10 * (1.0 + lq_norm(direct, 2.0)));
  }
}

TEST_CASE("approximate projection") {
  const TorusGrid grid(2, 16);
  const CoefficientField op = make_operator("div2d");

  SUBCASE("identity on high-frequency constraint-compatible fields") {
    const AFreeTestSpace space = build_test_space(op, vec2(0.5, 0.5), grid);
    const PeriodicField v = project_afree(space, bandpass_field(grid, 2, 2.5, 6.0, 9));
    const PeriodicField pv = apply_P_eta(op, SpatialWindow::one(), v);
    CHECK(lq_norm(pv - v, 2.0) <= 1e-10 * (1.0 + lq_norm(v, 2.0)));
  }
  SUBCASE("low shell is annihilated") {
    PeriodicField constant = PeriodicField::sample(
        grid, 2, [](const Eigen::VectorXd&) { return Eigen::VectorXd(vec2(1.0, -2.0)); });
    CHECK(lq_norm(apply_P_eta(op, SpatialWindow::one(), constant), 2.0) <= 1e-12);
    const PeriodicField lowmode = bandpass_field(grid, 2, 0.5, 1.0, 10);  // |k| = 1 shell
    CHECK(lq_norm(apply_P_eta(op, SpatialWindow::one(), lowmode), 2.0) <= 1e-12);
  }
  SUBCASE("vanishes where the window vanishes") {
    const SpatialWindow eta = SpatialWindow::bump(vec2(0.5, 0.5));
    const PeriodicField v = random_field(grid, 2, 11);
    const PeriodicField pv = apply_P_eta(op, eta, v);
    for (long long i = 0; i < grid.cell_count(); ++i)
      if (eta(grid.node(i)) == 0.0) CHECK(pv.values().row(i).norm() <= 1e-14);
  }
  SUBCASE("commutes with lattice translations in the multiplier case") {
    const PeriodicField v = random_field(grid, 2, 12);
    const ApproxProjection proj(op, SpatialWindow::one(), grid);
    const PeriodicField pv = proj.apply(v);
    // shift by 3 cells along axis 0
    auto shift = [&grid](const PeriodicField& f) {
      PeriodicField out(grid, f.components());
      int idx[3], sidx[3];
      for (long long i = 0; i < grid.cell_count(); ++i) {
        grid.unflatten(i, idx);
        sidx[0] = (idx[0] + 3) % grid.points;
        sidx[1] = idx[1];
        out.mutable_values().row(grid.flatten(sidx)) = f.values().row(i);
      }
      return out;
    };
    const PeriodicField lhs = proj.apply(shift(v));
    const PeriodicField rhs = shift(pv);
    CHECK(lq_norm(lhs - rhs, 2.0) <= 1e-10 * (1.0 + lq_norm(pv, 2.0)));
  }
  SUBCASE("variable-coefficient path reduces to the multiplier path") {
    // same operator, constant flag dropped: forces the tabulated x-dependent path
    const CoefficientField op_novar(
        "div2d-slowpath", {2, 2, 1},
        [](const Eigen::VectorXd&) {
          Eigen::MatrixXd a1(1, 2), a2(1, 2);
          a1 << 1, 0;
          a2 << 0, 1;
          return std::vector<Eigen::MatrixXd>{a1, a2};
        },
        0.0, false);
    const PeriodicField v = random_field(grid, 2, 13);
    const PeriodicField fast = apply_P_eta(op, SpatialWindow::one(), v);
    const PeriodicField slow = apply_P_eta(op_novar, SpatialWindow::one(), v);
    CHECK(lq_norm(fast - slow, 2.0) <= 1e-10 * (1.0 + lq_norm(fast, 2.0)));
  }
}

TEST_CASE("empirical operator bounds at q = 2 with constant coefficients") {
  const CoefficientField op = make_operator("div2d");
  const Prop22Report report =
      verify_prop22(op, SpatialWindow::one(), {2.0}, 6, {8, 16}, 21);
  REQUIRE(report.rows.size() == 2);
  for (const auto& row : report.rows) {
    // orthogonal projector times a [0,1] cutoff: contraction in L^2
    CHECK(row.lq_bound <= 1.0 + 1e-10);
    CHECK(std::isfinite(row.wm1_bound));
    CHECK(std::isfinite(row.approx_identity));
    CHECK(std::isfinite(row.constraint_bound));
    // A P_eta = 0 exactly for a constant-coefficient multiplier
    CHECK(row.constraint_bound <= 1e-9);
  }
}

TEST_CASE("decomposition pipeline") {
  const CoefficientField op = make_operator("div2d");
  const TorusGrid grid(2, 32);
  const Eigen::VectorXd x0 = vec2(0.5, 0.5);
  const Eigen::VectorXd mean_target = Eigen::VectorXd::Zero(2);
  const double q = 2.0;

  SUBCASE("narrow-band admissible ensembles pass through untouched") {
    std::vector<DecompositionInput> ensemble;
    for (int n : {4, 8, 16}) {
      PeriodicField f = PeriodicField::sample(grid, 2, [&](const Eigen::VectorXd& x) {
        return Eigen::VectorXd(vec2(std::cos(2.0 * M_PI * 3.0 * x[1]) +
                                        0.3 * std::sin(2.0 * M_PI * 4.0 * x[1]),
                                    0.0));
      });
      ensemble.push_back({n, std::move(f)});
    }
    const DecompositionResult res =
        decompose_equiintegrable(op, SpatialWindow::one(), ensemble, q, mean_target);
    for (std::size_t i = 0; i < res.members.size(); ++i) {
      CHECK(res.members[i].diff_ls[0] <= 1e-6);
      CHECK(res.members[i].mean_error <= 1e-12);
    }
  }

  SUBCASE("concentration spikes are removed, oscillation is kept") {
    const AFreeTestSpace space = build_test_space(op, x0, grid);
    std::vector<DecompositionInput> ensemble;
    for (int n : {4, 8, 16}) {
      const double amp = std::pow(n, grid.dim / q);
      PeriodicField bump = PeriodicField::sample(
          grid, 2, [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
            double d2 = 0.0;
            for (int a = 0; a < 2; ++a) {
              const double t = wrap_periodic(x[a] - x0[a]);
              d2 += t * t;
            }
            if (std::sqrt(d2) < 1.0 / n) return vec2(0.0, amp);
            return Eigen::VectorXd::Zero(2);
          });
      ensemble.push_back({n, project_afree(space, bump)});
    }
    const DecompositionResult res =
        decompose_equiintegrable(op, SpatialWindow::one(), ensemble, q, mean_target);

    const std::size_t m8 = 6;  // 8 x pooled median gauge
    double before = 0.0, after = 0.0;
    for (const auto& m : res.members) {
      before = std::max(before, m.tails_before[m8]);
      after = std::max(after, m.tails_after[m8]);
      CHECK(m.mean_error <= 1e-12);
      CHECK(m.residual_output <= 2.0 * m.residual_truncated + 1e-12);
    }
    CHECK(before > 0.0);
    CHECK(after <= 0.1 * before);

    // the L^s damage decays with n
    std::vector<double> ns, diffs;
    for (const auto& m : res.members) {
      ns.push_back(m.label);
      diffs.push_back(m.diff_ls[0]);
    }
    CHECK(loglog_slope(ns, diffs) < 0.0);
  }

  SUBCASE("bounded laminates are unchanged") {
    Eigen::VectorXi k(2);
    k << 0, 4;
    std::vector<DecompositionInput> ensemble;
    for (int n : {4, 8})
      ensemble.push_back({n, laminate_field(grid, k, vec2(1.0, 0.0), 0.5, 2.0)});
    const DecompositionResult res =
        decompose_equiintegrable(op, SpatialWindow::one(), ensemble, q, mean_target);
    for (const auto& m : res.members) CHECK(m.diff_ls[0] <= 1e-12);
  }
}

TEST_CASE("vanishing perturbations") {
  const TorusGrid grid(2, 16);
  const EnergyDensity quad = make_density("quad");
  const EnergyDensity dwell = make_density("dwell");
  Eigen::VectorXi k(2);
  k << 0, 2;
  const PeriodicField w = laminate_field(grid, k, vec2(1.0, 0.0), 0.5, 2.0);

  SUBCASE("zero perturbation gives exactly zero difference") {
    const std::vector<double> deltas = perturbation_differences(
        {&quad}, {w, w}, {PeriodicField(grid, 2), PeriodicField(grid, 2)}, 2.0);
    for (double d : deltas) CHECK(d == 0.0);
  }
  SUBCASE("quadratic difference matches the closed form") {
    const PeriodicField v = random_field(grid, 2, 3).scaled(0.1);
    const std::vector<double> deltas = perturbation_differences({&quad}, {w}, {v}, 2.0);
    const double cross = 2.0 * (v.values().array() * w.values().array()).sum() / v.size();
    const double expected = std::abs(cross + std::pow(lq_norm(v, 2.0), 2.0));
    CHECK(deltas[0] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(deltas[0] <= lq_norm(v, 2.0) * (lq_norm(v, 2.0) + 2.0 * lq_norm(w, 2.0)) + 1e-12);
  }
  SUBCASE("1/n perturbations of the double well decay at unit rate") {
    const PeriodicField base = random_field(grid, 2, 17).scaled(0.2);
    std::vector<PeriodicField> ws, vs;
    std::vector<double> ns;
    for (int n : {2, 4, 8, 16, 32}) {
      ws.push_back(w);
      vs.push_back(base.scaled(1.0 / n));
      ns.push_back(n);
    }
    const std::vector<double> deltas = perturbation_differences({&dwell}, ws, vs, 4.0);
    CHECK(loglog_slope(ns, deltas) <= -0.8);
  }
  SUBCASE("growth violation is rejected") {
    const EnergyDensity quartic = make_density("pnorm(4)");
    CHECK_THROWS_AS(perturbation_differences({&quartic}, {w}, {w}, 2.0), UsageError);
  }
}

TEST_SUITE_END();
