#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "wasserstat/numeric.hpp"

using namespace wasserstat;
using Catch::Approx;

TEST_CASE("adaptive_simpson on known integrals") {
  REQUIRE(numeric::adaptive_simpson([](double x) { return x * x; }, 0.0, 1.0) ==
          Approx(1.0 / 3.0).epsilon(1e-12));
  REQUIRE(numeric::adaptive_simpson([](double x) { return std::sin(x); }, 0.0, M_PI) ==
          Approx(2.0).epsilon(1e-11));
  REQUIRE(numeric::adaptive_simpson([](double) { return 1.0; }, 2.0, 2.0) == 0.0);
}

TEST_CASE("integrate_upper_tail reproduces Gaussian tail moments") {
  // ∫_a^inf z φ(z) dz = φ(a)
  for (double a : {-1.5, 0.0, 0.5, 2.0}) {
    const double got = numeric::integrate_upper_tail(
        [](double z) { return z * numeric::normal_pdf(z); }, a, 1e-13);
    REQUIRE(got == Approx(numeric::normal_pdf(a)).epsilon(1e-9));
  }
}

TEST_CASE("bisect_increasing inverts the normal CDF") {
  const double z = numeric::bisect_increasing([](double x) { return numeric::normal_cdf(x); }, 0.975,
                                              -10.0, 10.0);
  REQUIRE(z == Approx(1.9599639845400545).epsilon(1e-9));
  REQUIRE_THROWS_AS(
      numeric::bisect_increasing([](double x) { return numeric::normal_cdf(x); }, 0.5, 1.0, 2.0),
      InvalidInput);
}

TEST_CASE("reg_incomplete_beta against reference values") {
  // I_x(a,b) checked against an independent implementation (scipy.special.betainc).
  REQUIRE(numeric::reg_incomplete_beta(2.5, 0.5, 0.5) == Approx(0.07558681842161241).epsilon(1e-10));
  REQUIRE(numeric::reg_incomplete_beta(0.5, 0.5, 0.25) == Approx(1.0 / 3.0).epsilon(1e-10));
  REQUIRE(numeric::reg_incomplete_beta(3.0, 2.0, 0.0) == 0.0);
  REQUIRE(numeric::reg_incomplete_beta(3.0, 2.0, 1.0) == 1.0);
  REQUIRE_THROWS_AS(numeric::reg_incomplete_beta(-1.0, 2.0, 0.5), InvalidInput);
}

TEST_CASE("student_t_cdf matches reference values and symmetry") {
  // scipy.stats.t.cdf reference values, dof = 5.
  REQUIRE(numeric::student_t_cdf(0.0, 5.0) == 0.5);
  REQUIRE(numeric::student_t_cdf(2.0150483733330233, 5.0) == Approx(0.95).epsilon(1e-10));
  for (double x : {0.3, 1.0, 2.7}) {
    REQUIRE(numeric::student_t_cdf(x, 5.0) + numeric::student_t_cdf(-x, 5.0) == Approx(1.0).epsilon(1e-12));
  }
}
