#include <doctest.h>

#include <cmath>

#include "aqc/catalog.hpp"
#include "aqc/rng.hpp"
#include "aqc/symbols.hpp"

using namespace aqc;

namespace {
Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}
}  // namespace

TEST_SUITE_BEGIN("symbols");

TEST_CASE("assemble_symbol is the linear combination of the coefficients") {
  const CoefficientField div2d = make_operator("div2d");
  const Eigen::VectorXd x = vec2(0.3, 0.7);

  Eigen::MatrixXd s = div2d.symbol(x, vec2(0.0, 1.0));
  CHECK(s.rows() == 1);
  CHECK(s.cols() == 2);
  CHECK(s(0, 0) == 0.0);
  CHECK(s(0, 1) == 1.0);

  // scaled divergence with a constant scale of 2 at x1 = 0.25 (amp 1/2 not
  // used here; construct explicitly)
  const CoefficientField scaled(
      "scale2", {2, 2, 1},
      [](const Eigen::VectorXd&) {
        Eigen::MatrixXd a1(1, 2), a2(1, 2);
        a1 << 2, 0;
        a2 << 0, 1;
        return std::vector<Eigen::MatrixXd>{a1, a2};
      },
      0.0, true);
  s = scaled.symbol(x, vec2(1.0, 0.0));
  CHECK(s(0, 0) == 2.0);
  CHECK(s(0, 1) == 0.0);

  // lambda = 0 gives the zero matrix
  CHECK(div2d.symbol(x, vec2(0.0, 0.0)).norm() == 0.0);

  // dimension mismatch from the coefficient callback is a configuration error
  const CoefficientField broken(
      "broken", {2, 2, 1},
      [](const Eigen::VectorXd&) {
        return std::vector<Eigen::MatrixXd>{Eigen::MatrixXd::Zero(2, 2),
                                            Eigen::MatrixXd::Zero(2, 2)};
      },
      0.0, true);
  CHECK_THROWS_AS(broken.symbol(x, vec2(1.0, 0.0)), ConfigError);
}

TEST_CASE("verify_constant_rank on the catalog") {
  const auto xs = lattice_samples(2, 4);
  const auto lams = sphere_samples(2, 64, 64, 9);

  SUBCASE("divergence has rank 1") {
    const RankCertificate cert = verify_constant_rank(make_operator("div2d"), xs, lams, 1e3);
    CHECK(cert.pass);
    CHECK(cert.rank == 1);
    CHECK(cert.min_gap > 1e6);
  }
  SUBCASE("rotated gradient has rank 1") {
    const RankCertificate cert =
        verify_constant_rank(make_operator("scalar-curl2d"), xs, lams, 1e3);
    CHECK(cert.pass);
    CHECK(cert.rank == 1);
  }
  SUBCASE("scaled divergence has rank 1") {
    const RankCertificate cert =
        verify_constant_rank(make_operator("scaled-div2d"), xs, lams, 1e3);
    CHECK(cert.pass);
    CHECK(cert.rank == 1);
  }
  SUBCASE("diagonal symbol fails with a witness") {
    std::vector<Eigen::VectorXd> dirs = {vec2(1.0, 0.0), vec2(1.0, 1.0).normalized()};
    const RankCertificate cert =
        verify_constant_rank(make_operator("diag-nonconstant-rank"), xs, dirs, 1e3);
    CHECK_FALSE(cert.pass);
    REQUIRE(cert.failure.has_value());
    // the two sampled directions disagree: rank 1 on the axis, 2 off it
    const int witness_rank = cert.failure->rank;
    CHECK((witness_rank == 1 || witness_rank == 2));
    CHECK(witness_rank != cert.rank);
  }
  SUBCASE("empty samples are a usage error") {
    CHECK_THROWS_AS(verify_constant_rank(make_operator("div2d"), {}, lams, 1e3), UsageError);
    CHECK_THROWS_AS(verify_constant_rank(make_operator("div2d"), xs, {}, 1e3), UsageError);
  }
}

TEST_CASE("kernel projector") {
  SUBCASE("divergence direction e2: kernel is the e1 axis") {
    Eigen::MatrixXd s(1, 2);
    s << 0, 1;
    Eigen::MatrixXd p = kernel_projector(s, 1);
    Eigen::MatrixXd expected(2, 2);
    expected << 1, 0, 0, 0;
    CHECK((p - expected).norm() <= 1e-14);
  }
  SUBCASE("invertible square matrix has trivial kernel") {
    Eigen::MatrixXd s(2, 2);
    s << 2, 1, 0, 1;
    CHECK(kernel_projector(s, 2).norm() <= 1e-14);
  }
  SUBCASE("oblique row vector, verified against the closed form") {
    Eigen::MatrixXd s(1, 2);
    s << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    Eigen::MatrixXd expected(2, 2);
    expected << 0.5, -0.5, -0.5, 0.5;
    CHECK((kernel_projector(s, 1) - expected).norm() <= 1e-14);
  }
  SUBCASE("declared rank must match") {
    Eigen::MatrixXd s(1, 2);
    s << 0, 1;
    CHECK_THROWS_AS(kernel_projector(s, 0), RankViolationError);
  }
  SUBCASE("projector identities on random symbols") {
    const CoefficientField op = make_operator("scaled-div2d");
    const auto lams = sphere_samples(2, 16, 16, 3);
    for (const auto& lam : lams) {
      const Eigen::MatrixXd S = op.symbol(vec2(0.2, 0.8), lam);
      const Eigen::MatrixXd P = kernel_projector(S, 1);
      CHECK((P * P - P).norm() <= 1e-12);
      CHECK((P - P.transpose()).norm() <= 1e-13);
      CHECK((S * P).norm() <= 1e-12);
      CHECK(std::llround(P.trace()) == 1);  // rank d - r = 1
    }
  }
}

TEST_CASE("pseudo-inverse as the Q operator") {
  SUBCASE("row vector") {
    Eigen::MatrixXd s(1, 2);
    s << 0, 2;
    const Eigen::MatrixXd q = pseudo_inverse(s, 1);
    CHECK(q.rows() == 2);
    CHECK(q.cols() == 1);
    CHECK(q(0, 0) == doctest::Approx(0.0));
    CHECK(q(1, 0) == doctest::Approx(0.5));
  }
  SUBCASE("identity") {
    CHECK((pseudo_inverse(Eigen::MatrixXd::Identity(2, 2), 2) -
           Eigen::MatrixXd::Identity(2, 2))
              .norm() <= 1e-14);
  }
  SUBCASE("scaling is (-1)-homogeneous") {
    Eigen::MatrixXd s(2, 2);
    s << 1, 2, 0, 1;
    const Eigen::MatrixXd q1 = pseudo_inverse(2.0 * s, 2);
    const Eigen::MatrixXd q2 = 0.5 * pseudo_inverse(s, 2);
    CHECK((q1 - q2).norm() <= 1e-14);
  }
}

TEST_CASE("defining identities of P and Q") {
  const CoefficientField op = make_operator("div2d");
  const FrozenSymbol frozen = freeze_certified(op, vec2(0.5, 0.5));
  const auto lams = sphere_samples(2, 32, 32, 17);
  auto rng = make_rng(12);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (const auto& lam : lams) {
    const Eigen::MatrixXd S = frozen.matrix(lam);
    const Eigen::MatrixXd P = frozen.projector(lam);
    const Eigen::MatrixXd Q = frozen.q_operator(lam);
    // Q S v = v - P v
    for (int trial = 0; trial < 4; ++trial) {
      Eigen::VectorXd v(2);
      v << gauss(rng), gauss(rng);
      CHECK((Q * S * v - (v - P * v)).norm() <= 1e-10);
    }
    // Q annihilates the orthogonal complement of Range S: l = 1, so Range S
    // is all of R when S != 0 and the complement is {0}; check Q S S^T spans
    CHECK((Q * S - (Eigen::MatrixXd::Identity(2, 2) - P)).norm() <= 1e-12);
  }
}

TEST_CASE("homogeneity of P and Q over scale samples") {
  const CoefficientField op = make_operator("scaled-div2d");
  const FrozenSymbol frozen = freeze_certified(op, vec2(0.15, 0.4));
  const auto lams = sphere_samples(2, 16, 16, 23);
  for (const auto& lam : lams) {
    const Eigen::MatrixXd P1 = frozen.projector(lam);
    const Eigen::MatrixXd Q1 = frozen.q_operator(lam);
    for (double s : {1e-2, 0.5, 3.0, 1e2}) {
      CHECK((frozen.projector(s * lam) - P1).norm() <= 1e-12);
      CHECK((frozen.q_operator(s * lam) - Q1 / s).norm() <= 1e-12 * Q1.norm() / s);
    }
    // P is even in lambda
    CHECK((frozen.projector(-lam) - P1).norm() <= 1e-12);
  }
}

TEST_CASE("projector continuity along a circle path") {
  const CoefficientField op = make_operator("scaled-div2d");
  const FrozenSymbol frozen = freeze_certified(op, vec2(0.6, 0.1));
  const int steps = 256;
  std::vector<double> increments;
  Eigen::MatrixXd prev = frozen.projector(vec2(1.0, 0.0));
  for (int i = 1; i <= steps; ++i) {
    const double t = M_PI * i / steps;  // half turn: P is even
    const Eigen::MatrixXd cur = frozen.projector(vec2(std::cos(t), std::sin(t)));
    increments.push_back((cur - prev).norm());
    prev = cur;
  }
  std::vector<double> sorted = increments;
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted[sorted.size() / 2];
  for (double inc : increments) CHECK(inc <= 10.0 * median + 1e-12);
}

TEST_CASE("lipschitz sampling respects the declared bound") {
  const CoefficientField op = make_operator("scaled-div2d");
  const double estimate = op.sampled_lipschitz(lattice_samples(2, 6));
  CHECK(estimate <= op.lipschitz_bound() * (1.0 + 1e-6));
  CHECK(estimate > 0.0);
}

TEST_CASE("catalog label parsing") {
  std::string name;
  std::vector<double> params;
  parse_label("pnorm(4)", &name, &params);
  CHECK(name == "pnorm");
  REQUIRE(params.size() == 1);
  CHECK(params[0] == 4.0);
  parse_label("scaled-div2d(0.25)", &name, &params);
  CHECK(params[0] == 0.25);
  CHECK_THROWS_AS(make_operator("div3d"), ConfigError);
  CHECK_THROWS_AS(parse_label("pnorm(", &name, &params), ConfigError);
}

TEST_SUITE_END();
