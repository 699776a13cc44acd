#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "wasserstat/linalg.hpp"
#include "wasserstat/rng.hpp"

using namespace wasserstat;
using Catch::Approx;

namespace {

MatrixXd random_symmetric(int d, std::mt19937_64& engine, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  MatrixXd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = normal(engine);
  return (a + a.transpose()) / 2.0;
}

// Random SPD matrix with eigenvalues log-uniform in [lo, hi].
MatrixXd random_spd(int d, std::mt19937_64& engine, double lo = 1e-2, double hi = 1e2) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(std::log(lo), std::log(hi));
  MatrixXd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = normal(engine);
  Eigen::HouseholderQR<MatrixXd> qr(a);
  MatrixXd q = qr.householderQ();
  VectorXd eigs(d);
  for (int i = 0; i < d; ++i) eigs[i] = std::exp(unif(engine));
  MatrixXd s = q * eigs.asDiagonal() * q.transpose();
  return (s + s.transpose()) / 2.0;
}

}  // namespace

TEST_CASE("SymMatrix symmetrizes and guards asymmetry") {
  MatrixXd nearly(2, 2);
  nearly << 1.0, 2.0, 2.0 + 1e-14, 3.0;
  SymMatrix s(nearly);
  REQUIRE(s.mat()(0, 1) == s.mat()(1, 0));

  MatrixXd bad(2, 2);
  bad << 1.0, 2.0, 2.1, 3.0;
  REQUIRE_THROWS_AS(SymMatrix(bad), InvalidInput);

  MatrixXd nan_mat = MatrixXd::Identity(2, 2);
  nan_mat(0, 0) = std::nan("");
  REQUIRE_THROWS_AS(SymMatrix(nan_mat), InvalidInput);

  REQUIRE_THROWS_AS(SymMatrix(MatrixXd::Zero(2, 3)), InvalidInput);
}

TEST_CASE("sym_eig on hand-solved instances") {
  SECTION("identity") {
    auto eig = sym_eig(SymMatrix::identity(2));
    REQUIRE(eig.values[0] == Approx(1.0));
    REQUIRE(eig.values[1] == Approx(1.0));
  }
  SECTION("[[2,1],[1,2]] has eigenvalues 3, 1") {
    MatrixXd s(2, 2);
    s << 2, 1, 1, 2;
    auto eig = sym_eig(SymMatrix(s));
    REQUIRE(eig.values[0] == Approx(3.0).epsilon(1e-12));
    REQUIRE(eig.values[1] == Approx(1.0).epsilon(1e-12));
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    REQUIRE(eig.vectors(0, 0) == Approx(inv_sqrt2));
    REQUIRE(eig.vectors(1, 0) == Approx(inv_sqrt2));
    REQUIRE(eig.vectors(0, 1) == Approx(inv_sqrt2));
    REQUIRE(eig.vectors(1, 1) == Approx(-inv_sqrt2));
  }
  SECTION("diagonal stays put, descending") {
    MatrixXd s(2, 2);
    s << 4, 0, 0, 1;
    auto eig = sym_eig(SymMatrix(s));
    REQUIRE(eig.values[0] == Approx(4.0));
    REQUIRE(eig.values[1] == Approx(1.0));
    REQUIRE(eig.vectors.isApprox(MatrixXd::Identity(2, 2), 1e-12));
  }
}

TEST_CASE("sym_eig reconstruction, orthonormality and sign convention on random instances") {
  auto engine = make_engine(101);
  for (int trial = 0; trial < 40; ++trial) {
    const int d = 1 + static_cast<int>(engine() % 6);
    MatrixXd s = random_symmetric(d, engine, 2.0);
    auto eig = sym_eig(SymMatrix(s));
    const MatrixXd recon = eig.vectors * eig.values.asDiagonal() * eig.vectors.transpose();
    const double scale = s.cwiseAbs().maxCoeff();
    REQUIRE((recon - s).cwiseAbs().maxCoeff() <= 1e-10 * std::max(scale, 1.0));
    REQUIRE((eig.vectors.transpose() * eig.vectors - MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff() <=
            1e-10);
    for (int k = 0; k + 1 < d; ++k) REQUIRE(eig.values[k] >= eig.values[k + 1]);
    for (int k = 0; k < d; ++k) {
      for (int r = 0; r < d; ++r) {
        if (std::abs(eig.vectors(r, k)) > 1e-12) {
          REQUIRE(eig.vectors(r, k) > 0.0);
          break;
        }
      }
    }
  }
}

TEST_CASE("SpdMatrix caches a valid eigendecomposition and rejects non-PD input") {
  MatrixXd s(2, 2);
  s << 2, 1, 1, 2;
  SpdMatrix spd(s);
  REQUIRE(spd.eigenvalues()[0] == Approx(3.0));
  REQUIRE(spd.determinant() == Approx(3.0));
  REQUIRE(spd.log_determinant() == Approx(std::log(3.0)));
  REQUIRE((spd.inverse() * s - MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);

  MatrixXd indef(2, 2);
  indef << 1, 0, 0, -1;
  REQUIRE_THROWS_AS(SpdMatrix(indef), SingularMatrix);
}

TEST_CASE("spd_sqrt and spd_inv_sqrt on hand-solved instances") {
  SECTION("identity") {
    REQUIRE(spd_sqrt(SpdMatrix::identity(3)).mat().isApprox(MatrixXd::Identity(3, 3), 1e-14));
  }
  SECTION("diag(4,9) -> diag(2,3)") {
    MatrixXd s(2, 2);
    s << 4, 0, 0, 9;
    MatrixXd expected(2, 2);
    expected << 2, 0, 0, 3;
    REQUIRE(spd_sqrt(SpdMatrix(s)).mat().isApprox(expected, 1e-12));
  }
  SECTION("[[2,1],[1,2]] via its eigenbasis") {
    MatrixXd s(2, 2);
    s << 2, 1, 1, 2;
    // Q diag(sqrt(3), 1) Q^T with Q columns (1,1)/sqrt2, (1,-1)/sqrt2.
    const double p = (std::sqrt(3.0) + 1.0) / 2.0;
    const double q = (std::sqrt(3.0) - 1.0) / 2.0;
    MatrixXd expected(2, 2);
    expected << p, q, q, p;
    REQUIRE(spd_sqrt(SpdMatrix(s)).mat().isApprox(expected, 1e-12));
  }
}

TEST_CASE("square root round trips on random SPD matrices") {
  auto engine = make_engine(202);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 1 + static_cast<int>(engine() % 6);
    SpdMatrix s(random_spd(d, engine, 1e-2, 1e2));
    const SpdMatrix r = spd_sqrt(s);
    const SpdMatrix r_inv = spd_inv_sqrt(s);
    const double scale = s.mat().cwiseAbs().maxCoeff();
    REQUIRE((r.mat() * r.mat() - s.mat()).cwiseAbs().maxCoeff() <= 1e-9 * scale);
    REQUIRE((r_inv.mat() * s.mat() * r_inv.mat() - MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff() <=
            1e-9);
  }
}

TEST_CASE("near-singular matrices are rejected with a condition number payload") {
  MatrixXd s(2, 2);
  s << 1.0, 0.0, 0.0, 1e-14;
  SpdMatrix spd(s);  // constructible: strictly positive eigenvalues
  try {
    spd_sqrt(spd);
    FAIL("expected SingularMatrix");
  } catch (const SingularMatrix& e) {
    REQUIRE(e.condition_number() > 1e12);
  }
  REQUIRE_THROWS_AS(spd_inv_sqrt(spd), SingularMatrix);
}

TEST_CASE("sylvester_solve on hand-solved instances") {
  SECTION("scalar: A=1, B=-2 -> X=-1") {
    MatrixXd a(1, 1), b(1, 1);
    a << 1;
    b << -2;
    auto x = sylvester_solve(SpdMatrix(a), SymMatrix(b));
    REQUIRE(x.mat()(0, 0) == Approx(-1.0));
  }
  SECTION("A=diag(1,4), B=ones") {
    MatrixXd a(2, 2), b(2, 2);
    a << 1, 0, 0, 4;
    b << 1, 1, 1, 1;
    auto x = sylvester_solve(SpdMatrix(a), SymMatrix(b));
    REQUIRE(x.mat()(0, 0) == Approx(0.5).epsilon(1e-12));
    REQUIRE(x.mat()(0, 1) == Approx(0.2).epsilon(1e-12));
    REQUIRE(x.mat()(1, 1) == Approx(0.125).epsilon(1e-12));
    REQUIRE(x.mat().trace() == Approx(0.625).epsilon(1e-12));
  }
  SECTION("A=I -> X=B/2 for any symmetric B") {
    auto engine = make_engine(7);
    const MatrixXd b = random_symmetric(4, engine);
    auto x = sylvester_solve(SpdMatrix::identity(4), SymMatrix(b));
    REQUIRE(x.mat().isApprox(b / 2.0, 1e-13));
  }
  SECTION("dimension mismatch") {
    REQUIRE_THROWS_AS(sylvester_solve(SpdMatrix::identity(2), SymMatrix::identity(3)), InvalidInput);
  }
}

TEST_CASE("sylvester residual and trace identity on random instances") {
  auto engine = make_engine(303);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 1 + static_cast<int>(engine() % 6);
    SpdMatrix a(random_spd(d, engine, 1e-3, 1e3));  // condition up to 1e6
    SymMatrix b(random_symmetric(d, engine, 3.0));
    SymMatrix x = sylvester_solve(a, b);
    const MatrixXd residual = a.mat() * x.mat() + x.mat() * a.mat() - b.mat();
    const double b_scale = std::max(b.mat().cwiseAbs().maxCoeff(), 1e-300);
    REQUIRE(residual.cwiseAbs().maxCoeff() / b_scale <= 1e-9);
    const double trace_expected = (a.inverse() * b.mat()).trace() / 2.0;
    REQUIRE(x.mat().trace() == Approx(trace_expected).epsilon(1e-9).margin(1e-12));
  }
}

TEST_CASE("sym_eig is deterministic for identical input") {
  auto engine = make_engine(404);
  const MatrixXd s = random_symmetric(5, engine);
  const auto e1 = sym_eig(SymMatrix(s));
  const auto e2 = sym_eig(SymMatrix(s));
  REQUIRE(e1.values == e2.values);
  REQUIRE(e1.vectors == e2.vectors);
}
