#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "wasserstat/linalg.hpp"
#include "wasserstat/rng.hpp"
#include "wasserstat/shapes.hpp"

namespace wasserstat {

/// Parameters θ = (μ, Λ) of the affine deformation model
/// p(x, θ) = |Λ| g(||Λ(x-μ)||), with Λ symmetric positive definite.
struct AffineParams {
  VectorXd mu;
  SpdMatrix lambda;

  AffineParams(VectorXd mu_in, SpdMatrix lambda_in) : mu(std::move(mu_in)), lambda(std::move(lambda_in)) {
    if (mu.size() != lambda.dim()) throw InvalidInput("AffineParams: mu and lambda dimensions differ");
    if (!mu.allFinite()) throw InvalidInput("AffineParams: non-finite mu");
  }

  int dim() const { return static_cast<int>(mu.size()); }
  int param_dim() const { return dim() + dim() * (dim() + 1) / 2; }

  /// Model covariance Σ = Λ^{-2}.
  MatrixXd covariance() const {
    return lambda.spectral_map([](double x) { return 1.0 / (x * x); });
  }

  static AffineParams standard(int d) { return AffineParams(VectorXd::Zero(d), SpdMatrix::identity(d)); }
};

/// Coordinate of θ: either μ_i or the upper-triangular Λ_{ij} (i <= j) of the
/// symmetric parametrization. Indices are 0-based.
struct ParamIndex {
  enum class Tag { Mu, Lambda };
  Tag tag;
  int i;
  int j;  // == i for Mu

  static ParamIndex mu(int i) { return ParamIndex{Tag::Mu, i, i}; }
  static ParamIndex lambda(int i, int j) {
    if (i > j) std::swap(i, j);
    return ParamIndex{Tag::Lambda, i, j};
  }

  std::string label() const {
    if (tag == Tag::Mu) return "mu[" + std::to_string(i + 1) + "]";
    return "lambda[" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "]";
  }
};

inline int param_count(int d) { return d + d * (d + 1) / 2; }

/// Canonical coordinate order: μ_1..μ_d, then Λ row-major upper triangle.
inline std::vector<ParamIndex> param_indices(int d) {
  std::vector<ParamIndex> out;
  out.reserve(param_count(d));
  for (int i = 0; i < d; ++i) out.push_back(ParamIndex::mu(i));
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) out.push_back(ParamIndex::lambda(i, j));
  return out;
}

/// Flattens θ into the canonical m-vector (used by covariance sweeps).
inline VectorXd flatten_params(const AffineParams& theta) {
  const int d = theta.dim();
  VectorXd out(param_count(d));
  int k = 0;
  for (int i = 0; i < d; ++i) out[k++] = theta.mu[i];
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) out[k++] = theta.lambda.mat()(i, j);
  return out;
}

/// Random θ with Λ eigenvalues log-uniform in [eig_lo, eig_hi] and a random
/// orthogonal eigenbasis; μ ~ N(0, mu_scale^2 I). Used by the experiment
/// drivers and tests.
inline AffineParams random_affine_params(int d, std::uint64_t seed, double eig_lo = 0.6,
                                         double eig_hi = 1.8, double mu_scale = 0.5) {
  if (d < 1) throw InvalidInput("random_affine_params: dimension must be at least 1");
  if (!(0.0 < eig_lo && eig_lo <= eig_hi)) throw InvalidInput("random_affine_params: bad eigenvalue range");
  auto engine = make_engine(derive_seed(seed, 0x7468657461ull));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  MatrixXd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = normal(engine);
  Eigen::HouseholderQR<MatrixXd> qr(a);
  MatrixXd q = qr.householderQ();

  VectorXd eigs(d);
  const double llo = std::log(eig_lo);
  const double lhi = std::log(eig_hi);
  for (int i = 0; i < d; ++i) eigs[i] = std::exp(llo + (lhi - llo) * unif(engine));

  VectorXd mu(d);
  for (int i = 0; i < d; ++i) mu[i] = mu_scale * normal(engine);

  MatrixXd lam = q * eigs.asDiagonal() * q.transpose();
  return AffineParams(mu, SpdMatrix((lam + lam.transpose()) / 2.0));
}

inline double log_density(const AffineParams& theta, const ShapeDistribution& shape, const VectorXd& x) {
  if (shape.dim() != theta.dim()) throw InvalidInput("log_density: shape and parameter dimensions differ");
  if (x.size() != theta.dim()) throw InvalidInput("log_density: point dimension mismatch");
  const double r = (theta.lambda.mat() * (x - theta.mu)).norm();
  return theta.lambda.log_determinant() + shape.log_radial(r);
}

inline double density(const AffineParams& theta, const ShapeDistribution& shape, const VectorXd& x) {
  const double ld = log_density(theta, shape, x);
  return std::isinf(ld) ? 0.0 : std::exp(ld);
}

/// n i.i.d. draws from p(·, θ): x = Λ^{-1} z + μ with z ~ f.
inline MatrixXd sample_model(const AffineParams& theta, const ShapeDistribution& shape, int n,
                             std::uint64_t seed) {
  if (shape.dim() != theta.dim()) throw InvalidInput("sample_model: shape and parameter dimensions differ");
  MatrixXd z = shape.sample(n, seed);
  const MatrixXd lam_inv = theta.lambda.inverse();
  MatrixXd x = z * lam_inv;  // (Λ^{-1} z_t)^T rows, Λ^{-1} symmetric
  x.rowwise() += theta.mu.transpose();
  return x;
}

/// ∇_x log p(x, θ) = (g'(r)/g(r)) Λ^2 (x-μ) / r, with the r→0 limit handled.
inline VectorXd grad_x_log_density(const AffineParams& theta, const ShapeDistribution& shape,
                                   const VectorXd& x) {
  const VectorXd u = x - theta.mu;
  const VectorXd lu = theta.lambda.mat() * u;
  const double ratio = shape.radial_log_deriv_over_r(lu.norm());
  return ratio * (theta.lambda.mat() * lu);
}

namespace detail {

// d/dt log p under Λ <- Λ + t E_ij at t=0, where E_ij = e_i e_j^T + e_j e_i^T
// for i != j and e_i e_i^T for i == j. Equals the sum of the unconstrained
// derivatives for (i,j) and (j,i) when i != j.
inline double lambda_coord_score(const VectorXd& u, const VectorXd& lu, double ratio,
                                 const MatrixXd& lam_inv, int i, int j) {
  if (i == j) return lam_inv(i, i) + ratio * lu[i] * u[i];
  return 2.0 * lam_inv(i, j) + ratio * (lu[i] * u[j] + lu[j] * u[i]);
}

}  // namespace detail

/// Single coordinate of the Fisher score ∂ log p(x, θ) / ∂θ.
inline double fisher_score_coord(const AffineParams& theta, const ShapeDistribution& shape,
                                 const VectorXd& x, const ParamIndex& idx) {
  const VectorXd u = x - theta.mu;
  const VectorXd lu = theta.lambda.mat() * u;
  const double ratio = shape.radial_log_deriv_over_r(lu.norm());
  if (idx.tag == ParamIndex::Tag::Mu) {
    return -ratio * theta.lambda.mat().row(idx.i).dot(lu);
  }
  const MatrixXd lam_inv = theta.lambda.inverse();
  return detail::lambda_coord_score(u, lu, ratio, lam_inv, idx.i, idx.j);
}

/// Full Fisher score in the canonical coordinate order.
inline VectorXd fisher_score(const AffineParams& theta, const ShapeDistribution& shape, const VectorXd& x) {
  if (shape.dim() != theta.dim()) throw InvalidInput("fisher_score: shape and parameter dimensions differ");
  if (x.size() != theta.dim()) throw InvalidInput("fisher_score: point dimension mismatch");
  const int d = theta.dim();
  const VectorXd u = x - theta.mu;
  const VectorXd lu = theta.lambda.mat() * u;
  const double ratio = shape.radial_log_deriv_over_r(lu.norm());
  const MatrixXd lam_inv = theta.lambda.inverse();

  VectorXd s(param_count(d));
  s.head(d) = -ratio * (theta.lambda.mat() * lu);
  int k = d;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j)
      s[k++] = detail::lambda_coord_score(u, lu, ratio, lam_inv, i, j);
  return s;
}

inline double log_likelihood(const AffineParams& theta, const ShapeDistribution& shape,
                             const MatrixXd& data) {
  if (data.rows() < 1) throw InvalidInput("log_likelihood: empty data");
  if (data.cols() != theta.dim()) throw InvalidInput("log_likelihood: data dimension mismatch");
  double total = 0.0;
  for (Eigen::Index t = 0; t < data.rows(); ++t) {
    total += log_density(theta, shape, data.row(t).transpose());
    if (std::isinf(total)) return -std::numeric_limits<double>::infinity();
  }
  return total;
}

}  // namespace wasserstat
