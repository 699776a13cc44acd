#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "test_util.hpp"
#include "wasserstat/shapes.hpp"

using namespace wasserstat;
using Catch::Approx;

TEST_CASE("shape construction validates its inputs") {
  REQUIRE_THROWS_AS(ShapeDistribution::gaussian(0), InvalidInput);
  REQUIRE_THROWS_AS(ShapeDistribution::student_t(2, 2.0), InvalidInput);
  REQUIRE_THROWS_AS(ShapeDistribution::student_t(2, 1.5), InvalidInput);
  REQUIRE_THROWS_AS(ShapeDistribution::uniform_ball_with_radius(2, 0.0), InvalidInput);
  REQUIRE(ShapeDistribution::uniform_ball(2).support_radius() == Approx(2.0));
  REQUIRE(std::isinf(ShapeDistribution::gaussian(3).support_radius()));
}

TEST_CASE("Gaussian radial profile") {
  auto g = ShapeDistribution::gaussian(1);
  REQUIRE(g.log_radial(1.0) - g.log_radial(0.0) == Approx(-0.5));
  REQUIRE(g.radial_log_deriv(2.0) == Approx(-2.0));
  VectorXd z(1);
  z << 0.0;
  REQUIRE(g.log_density(z) == Approx(-0.5 * std::log(2.0 * M_PI)));
}

TEST_CASE("UniformBall support and flat interior") {
  auto b = ShapeDistribution::uniform_ball(2);
  REQUIRE(b.radial_log_deriv(1.0) == 0.0);
  REQUIRE_THROWS_AS(b.radial_log_deriv(2.0), OutsideSupport);  // boundary
  REQUIRE_THROWS_AS(b.radial_log_deriv(2.5), OutsideSupport);
  VectorXd inside(2), outside(2);
  inside << 1.0, 0.0;
  outside << 3.0, 0.0;
  REQUIRE(std::isfinite(b.log_density(inside)));
  REQUIRE(std::isinf(b.log_density(outside)));
  // density is 1/area inside: area = pi R^2 = 4 pi
  REQUIRE(b.log_density(inside) == Approx(-std::log(4.0 * M_PI)));
}

TEST_CASE("StudentT log-radial against reference values") {
  // scipy reference: log of the standardized t5 density, d=1.
  auto t = ShapeDistribution::student_t(1, 5.0);
  REQUIRE(t.log_radial(0.5) == Approx(-0.953334900192338).epsilon(1e-12));
  REQUIRE(t.log_radial(1.0) == Approx(-1.576252994527072).epsilon(1e-12));
  REQUIRE(t.log_radial(2.0) == Approx(-3.255100358333340).epsilon(1e-12));
}

TEST_CASE("radial_log_deriv agrees with finite differences of log g") {
  const double h = 1e-6;
  for (auto shape : {ShapeDistribution::gaussian(2), ShapeDistribution::student_t(2, 5.0),
                     ShapeDistribution::student_t(3, 3.5)}) {
    for (double r : {0.3, 0.5, 1.0, 2.0, 3.5}) {
      const double fd = (shape.log_radial(r + h) - shape.log_radial(r - h)) / (2.0 * h);
      REQUIRE(shape.radial_log_deriv(r) == Approx(fd).margin(1e-6));
    }
  }
  // uniform ball away from the boundary
  auto b = ShapeDistribution::uniform_ball(2);
  for (double r : {0.1, 0.5, 1.0, 1.5}) {
    const double fd = (b.log_radial(r + h) - b.log_radial(r - h)) / (2.0 * h);
    REQUIRE(b.radial_log_deriv(r) == Approx(fd).margin(1e-6));
  }
}

TEST_CASE("radial_log_deriv_over_r has the right r->0 limit") {
  auto g = ShapeDistribution::gaussian(2);
  REQUIRE(g.radial_log_deriv_over_r(0.0) == -1.0);
  auto t = ShapeDistribution::student_t(2, 5.0);
  REQUIRE(t.radial_log_deriv_over_r(0.0) == Approx(-(5.0 + 2.0) / (5.0 - 2.0)));
  for (double r : {0.5, 1.5}) {
    REQUIRE(t.radial_log_deriv_over_r(r) == Approx(t.radial_log_deriv(r) / r).epsilon(1e-14));
  }
}

TEST_CASE("spherical symmetry under permutations and sign flips") {
  for (auto shape : {ShapeDistribution::gaussian(3), ShapeDistribution::uniform_ball(3),
                     ShapeDistribution::student_t(3, 5.0)}) {
    VectorXd z(3);
    z << 0.3, -1.1, 0.7;
    VectorXd permuted(3);
    permuted << -1.1, 0.7, 0.3;
    VectorXd flipped(3);
    flipped << -0.3, 1.1, 0.7;
    REQUIRE(shape.log_density(z) == shape.log_density(permuted));
    REQUIRE(shape.log_density(z) == shape.log_density(flipped));
  }
}

TEST_CASE("sampling is deterministic and respects the support") {
  auto shape = ShapeDistribution::uniform_ball(2);
  const MatrixXd a = shape.sample(500, 99);
  const MatrixXd b = shape.sample(500, 99);
  REQUIRE(a == b);
  REQUIRE(a.rowwise().norm().maxCoeff() <= 2.0);
  const MatrixXd c = shape.sample(500, 100);
  REQUIRE(a != c);
  REQUIRE_THROWS_AS(shape.sample(0, 1), InvalidInput);
}

TEST_CASE("Gaussian sample moments within CLT bounds") {
  const int n = 1000000;
  auto shape = ShapeDistribution::gaussian(1);
  const MatrixXd z = shape.sample(n, 11);
  const double mean = z.col(0).mean();
  const double var = (z.col(0).array() - mean).square().sum() / n;
  REQUIRE(std::abs(mean) <= 4.0 / std::sqrt(static_cast<double>(n)));
  REQUIRE(std::abs(var - 1.0) <= 4.0 * std::sqrt(2.0 / n));
}

TEST_CASE("standardization holds for every kind and dimension") {
  const int n = 1000000;
  std::uint64_t seed = 2024;
  for (int d : {1, 2, 3, 5}) {
    for (int kind = 0; kind < 3; ++kind) {
      ShapeDistribution shape = kind == 0   ? ShapeDistribution::gaussian(d)
                                : kind == 1 ? ShapeDistribution::uniform_ball(d)
                                            : ShapeDistribution::student_t(d, 5.0);
      auto report = verify_standardization(shape, n, seed++);
      INFO(shape.name() << " d=" << d << " max mean z=" << report.max_mean_z
                        << " max cov z=" << report.max_cov_z);
      REQUIRE(report.passed);
    }
  }
}

TEST_CASE("a mis-scaled uniform ball fails the standardization check") {
  // radius sqrt(d) gives covariance (d/(d+2)) I, not I
  const int d = 2;
  auto wrong = ShapeDistribution::uniform_ball_with_radius(d, std::sqrt(static_cast<double>(d)));
  auto report = verify_standardization(wrong, 200000, 5);
  REQUIRE_FALSE(report.passed);
  REQUIRE(report.cov(0, 0) == Approx(0.5).margin(0.01));
  REQUIRE_THROWS_AS(verify_standardization(wrong, 100, 5), InvalidInput);
}

TEST_CASE("1-D CDFs against reference values") {
  auto g = ShapeDistribution::gaussian(1);
  REQUIRE(g.cdf_1d(0.0) == Approx(0.5));
  REQUIRE(g.cdf_1d(1.959963984540054) == Approx(0.975).epsilon(1e-12));

  // scipy reference: standardized t5 CDF.
  auto t = ShapeDistribution::student_t(1, 5.0);
  REQUIRE(t.cdf_1d(-2.0) == Approx(0.024656543836826).epsilon(1e-10));
  REQUIRE(t.cdf_1d(-0.5) == Approx(0.273527163922604).epsilon(1e-10));
  REQUIRE(t.cdf_1d(0.7) == Approx(0.796207117968209).epsilon(1e-10));
  REQUIRE(t.cdf_1d(1.5) == Approx(0.944716654634382).epsilon(1e-10));
  REQUIRE(t.cdf_1d(3.0) == Approx(0.994137594498023).epsilon(1e-10));

  auto b = ShapeDistribution::uniform_ball(1);  // support [-sqrt(3), sqrt(3)]
  REQUIRE(b.cdf_1d(-2.0) == 0.0);
  REQUIRE(b.cdf_1d(0.0) == Approx(0.5));
  REQUIRE(b.cdf_1d(std::sqrt(3.0)) == 1.0);

  REQUIRE_THROWS_AS(ShapeDistribution::gaussian(2).cdf_1d(0.0), InvalidInput);
}
