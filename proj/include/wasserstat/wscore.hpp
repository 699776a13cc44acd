#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "wasserstat/linalg.hpp"
#include "wasserstat/model.hpp"

namespace wasserstat {

/// A quadratic function S(x) = x^T A x / 2 + b^T x + c. Wasserstein scores of
/// the elliptical deformation model take this form; the gradient is affine
/// and the Laplacian constant, so Poisson-equation checks are exact rather
/// than discretization-limited.
struct QuadraticScore {
  SymMatrix A;
  VectorXd b;
  double c;

  QuadraticScore(SymMatrix a, VectorXd b_in, double c_in) : A(std::move(a)), b(std::move(b_in)), c(c_in) {
    if (A.dim() != b.size()) throw InvalidInput("QuadraticScore: A and b dimensions differ");
  }

  int dim() const { return A.dim(); }

  double operator()(const VectorXd& x) const { return 0.5 * x.dot(A.mat() * x) + b.dot(x) + c; }

  VectorXd gradient(const VectorXd& x) const { return A.mat() * x + b; }

  double laplacian() const { return A.mat().trace(); }
};

namespace detail {

// Symmetrized basis matrix: e_i e_j^T + e_j e_i^T for i != j, e_i e_i^T else.
inline MatrixXd sym_basis(int d, int i, int j) {
  MatrixXd e = MatrixXd::Zero(d, d);
  e(i, j) = 1.0;
  e(j, i) = 1.0;
  return e;
}

// E_θ[x^T A x / 2 + b^T x] = tr(A Σ)/2 + μ^T A μ / 2 + b^T μ.
inline double quadratic_expectation(const MatrixXd& a, const VectorXd& b, const AffineParams& theta) {
  const MatrixXd sigma = theta.covariance();
  return 0.5 * (a * sigma).trace() + 0.5 * theta.mu.dot(a * theta.mu) + b.dot(theta.mu);
}

}  // namespace detail

/// W-score for μ_i: S(x) = x_i - μ_i.
inline QuadraticScore wscore_mu(const AffineParams& theta, int i) {
  const int d = theta.dim();
  if (i < 0 || i >= d) throw InvalidInput("wscore_mu: index out of range");
  VectorXd b = VectorXd::Zero(d);
  b[i] = 1.0;
  return QuadraticScore(SymMatrix::zero(d), b, -theta.mu[i]);
}

/// W-score for the symmetric coordinate Λ_{ij} (i <= j): the quadratic with
/// A solving the Sylvester equation Λ² A + A Λ² = -(Λ E_ij + E_ij Λ),
/// b = -A μ, and c fixed by the zero-mean condition E_θ[S] = 0.
inline QuadraticScore wscore_lambda(const AffineParams& theta, int i, int j) {
  const int d = theta.dim();
  if (i < 0 || j < 0 || i >= d || j >= d) throw InvalidInput("wscore_lambda: index out of range");
  if (i > j) std::swap(i, j);
  const MatrixXd& lam = theta.lambda.mat();
  const MatrixXd e = detail::sym_basis(d, i, j);
  const MatrixXd l = lam * e + e * lam;
  const SpdMatrix lam2(theta.lambda.spectral_map([](double x) { return x * x; }));
  SymMatrix a = sylvester_solve(lam2, SymMatrix(-l));
  VectorXd b = -a.mat() * theta.mu;
  const double c = -detail::quadratic_expectation(a.mat(), b, theta);
  return QuadraticScore(std::move(a), std::move(b), c);
}

inline QuadraticScore wscore(const AffineParams& theta, const ParamIndex& idx) {
  if (idx.tag == ParamIndex::Tag::Mu) return wscore_mu(theta, idx.i);
  return wscore_lambda(theta, idx.i, idx.j);
}

/// All m W-scores in the canonical coordinate order.
inline std::vector<QuadraticScore> wscores(const AffineParams& theta) {
  std::vector<QuadraticScore> out;
  const auto indices = param_indices(theta.dim());
  out.reserve(indices.size());
  for (const auto& idx : indices) out.push_back(wscore(theta, idx));
  return out;
}

/// Residual of the Poisson equation
///   ∇ log p(x,θ) · ∇S(x) + ΔS(x) + ∂_param log p(x,θ)
/// at a single interior point; identically zero when `score` is the W-score
/// for `param`.
inline double poisson_residual(const AffineParams& theta, const ShapeDistribution& shape,
                               const QuadraticScore& score, const ParamIndex& param, const VectorXd& x) {
  const VectorXd grad_logp = grad_x_log_density(theta, shape, x);
  const double transport = grad_logp.dot(score.gradient(x)) + score.laplacian();
  return transport + fisher_score_coord(theta, shape, x, param);
}

/// Wasserstein information matrix G_W(θ) in closed form:
///   (μ,μ) block I_d, (μ,Λ) block 0, (Λ,Λ) entries tr(A_ab Σ A_cd).
inline MatrixXd w_info_matrix(const AffineParams& theta) {
  const int d = theta.dim();
  const int m = param_count(d);
  const MatrixXd sigma = theta.covariance();

  std::vector<MatrixXd> a_blocks;
  a_blocks.reserve(m - d);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) a_blocks.push_back(wscore_lambda(theta, i, j).A.mat());

  MatrixXd g = MatrixXd::Zero(m, m);
  g.topLeftCorner(d, d).setIdentity();
  for (int a = 0; a < m - d; ++a) {
    for (int b = a; b < m - d; ++b) {
      const double v = (a_blocks[a] * sigma * a_blocks[b]).trace();
      g(d + a, d + b) = v;
      g(d + b, d + a) = v;
    }
  }
  return g;
}

/// Monte Carlo estimate of G_W: averages ∇S_i(x)^T ∇S_j(x) over x ~ p(·,θ).
inline MatrixXd w_info_matrix_mc(const AffineParams& theta, const ShapeDistribution& shape, int n,
                                 std::uint64_t seed) {
  if (n < 1000) throw InvalidInput("w_info_matrix_mc: n must be at least 10^3");
  const int m = param_count(theta.dim());
  const MatrixXd x = sample_model(theta, shape, n, seed);
  const auto scores = wscores(theta);

  MatrixXd g = MatrixXd::Zero(m, m);
  MatrixXd grads(m, theta.dim());
  for (Eigen::Index t = 0; t < x.rows(); ++t) {
    const VectorXd xt = x.row(t).transpose();
    for (int i = 0; i < m; ++i) grads.row(i) = scores[i].gradient(xt).transpose();
    g.noalias() += grads * grads.transpose();
  }
  return g / static_cast<double>(n);
}

}  // namespace wasserstat
