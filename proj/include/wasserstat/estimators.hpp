#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "wasserstat/model.hpp"
#include "wasserstat/numeric.hpp"
#include "wasserstat/wscore.hpp"

namespace wasserstat {

enum class EstimatorMethod { WMoment, MLE, Wp1D };

inline std::string estimator_method_name(EstimatorMethod m) {
  switch (m) {
    case EstimatorMethod::WMoment: return "w";
    case EstimatorMethod::MLE: return "mle";
    case EstimatorMethod::Wp1D: return "wp1d";
  }
  return "?";
}

struct EstimatorReport {
  AffineParams estimate;
  int iterations = 0;
  bool converged = false;
  double final_gradient_norm = 0.0;
  EstimatorMethod method = EstimatorMethod::WMoment;
};

/// Max absolute empirical mean of the m W-score estimating functions at θ.
/// Zero (to rounding) exactly at the W-estimator.
inline double empirical_wscore_residual(const MatrixXd& data, const AffineParams& theta) {
  const auto scores = wscores(theta);
  const double n = static_cast<double>(data.rows());
  double worst = 0.0;
  for (const auto& s : scores) {
    double acc = 0.0;
    for (Eigen::Index t = 0; t < data.rows(); ++t) acc += s(data.row(t).transpose());
    worst = std::max(worst, std::abs(acc / n));
  }
  return worst;
}

/// Wasserstein (moment) estimator: μ̂ = sample mean, Λ̂ = (biased sample
/// covariance)^{-1/2}. Solves the empirical W-score equations exactly,
/// irrespective of the waveform.
inline EstimatorReport w_estimate(const MatrixXd& data) {
  const Eigen::Index n = data.rows();
  const Eigen::Index d = data.cols();
  if (n < 1 || d < 1) throw InvalidInput("w_estimate: empty data");
  if (n < d) throw InvalidInput("w_estimate: need n >= d observations");
  if (!data.allFinite()) throw InvalidInput("w_estimate: non-finite data");

  const VectorXd mu = data.colwise().mean();
  const MatrixXd centered = data.rowwise() - mu.transpose();
  MatrixXd cov = centered.transpose() * centered / static_cast<double>(n);
  cov = ((cov + cov.transpose()) / 2.0).eval();

  SpdMatrix cov_spd = [&] {
    try {
      return SpdMatrix(cov);
    } catch (const SingularMatrix& e) {
      throw SingularMatrix("w_estimate: sample covariance is singular", e.condition_number());
    }
  }();
  AffineParams estimate(mu, spd_inv_sqrt(cov_spd));

  EstimatorReport report{estimate, 0, true, 0.0, EstimatorMethod::WMoment};
  report.final_gradient_norm = empirical_wscore_residual(data, estimate);
  return report;
}

namespace detail {

// Mean log-likelihood gradient: μ block and the symmetric matrix of
// unconstrained ∂/∂Λ_ij partials (coordinate derivatives are its diagonal
// entries and twice its off-diagonal entries).
struct LikelihoodGradient {
  double mean_ll;
  VectorXd grad_mu;
  MatrixXd grad_lambda;
};

inline LikelihoodGradient mean_ll_gradient(const MatrixXd& data, const ShapeDistribution& shape,
                                           const VectorXd& mu, const SpdMatrix& lambda) {
  const Eigen::Index n = data.rows();
  const int d = static_cast<int>(data.cols());
  const MatrixXd& lam = lambda.mat();
  const MatrixXd lam_inv = lambda.inverse();
  const double log_det = lambda.log_determinant();

  LikelihoodGradient out;
  out.mean_ll = 0.0;
  out.grad_mu = VectorXd::Zero(d);
  MatrixXd radial_part = MatrixXd::Zero(d, d);
  for (Eigen::Index t = 0; t < n; ++t) {
    const VectorXd u = data.row(t).transpose() - mu;
    const VectorXd lu = lam * u;
    const double r = lu.norm();
    out.mean_ll += log_det + shape.log_radial(r);
    const double ratio = shape.radial_log_deriv_over_r(r);
    out.grad_mu.noalias() -= ratio * (lam * lu);
    radial_part.noalias() += (0.5 * ratio) * (lu * u.transpose() + u * lu.transpose());
  }
  out.mean_ll /= static_cast<double>(n);
  out.grad_mu /= static_cast<double>(n);
  out.grad_lambda = lam_inv + radial_part / static_cast<double>(n);
  return out;
}

// Max-abs coordinate gradient in the canonical (μ, upper-tri Λ) coordinates.
inline double coord_gradient_norm(const LikelihoodGradient& g) {
  double worst = g.grad_mu.cwiseAbs().maxCoeff();
  const int d = static_cast<int>(g.grad_mu.size());
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      const double coord = (i == j) ? g.grad_lambda(i, i) : 2.0 * g.grad_lambda(i, j);
      worst = std::max(worst, std::abs(coord));
    }
  }
  return worst;
}

// Divided difference of exp: (e^a - e^b)/(a - b), continuous at a == b.
inline double exp_divided_difference(double a, double b) {
  if (std::abs(a - b) < 1e-9) return std::exp(0.5 * (a + b));
  return (std::exp(a) - std::exp(b)) / (a - b);
}

}  // namespace detail

/// Maximum likelihood (Fisher) estimator by gradient ascent on
/// (μ, log Λ). The matrix-log coordinates keep every iterate positive
/// definite; the exact chain rule through the matrix exponential is applied
/// in the eigenbasis of the current iterate. Steps are seeded with the
/// Barzilai–Borwein size and safeguarded by backtracking line search
/// (Armijo constant 1e-4, shrink factor 0.5). Convergence is declared when
/// the per-sample Fisher-score mean drops to `tol` in max-abs norm.
inline EstimatorReport mle_estimate(const MatrixXd& data, const ShapeDistribution& shape,
                                    const AffineParams& init, double tol = 1e-8, int max_iter = 2000) {
  if (!shape.has_smooth_density()) {
    throw UnsupportedShape("mle_estimate: " + shape.name() + " has no smooth density");
  }
  if (data.rows() < 1) throw InvalidInput("mle_estimate: empty data");
  if (data.cols() != shape.dim() || data.cols() != init.dim()) {
    throw InvalidInput("mle_estimate: data, shape and init dimensions differ");
  }
  if (!data.allFinite()) throw InvalidInput("mle_estimate: non-finite data");

  const int d = init.dim();
  VectorXd mu = init.mu;
  // Y = log Λ in the spectral sense; Λ is rebuilt from Y after every step.
  MatrixXd y = init.lambda.spectral_map([](double v) { return std::log(v); });
  SpdMatrix lambda = init.lambda;

  auto exp_of = [](const MatrixXd& sym) {
    SymEig eig = detail::sym_eig_impl((sym + sym.transpose()) / 2.0);
    MatrixXd lam = eig.vectors * eig.values.array().exp().matrix().asDiagonal() * eig.vectors.transpose();
    return SpdMatrix((lam + lam.transpose()) / 2.0);
  };

  auto g = detail::mean_ll_gradient(data, shape, mu, lambda);
  if (!std::isfinite(g.mean_ll)) {
    throw LineSearchFailure("mle_estimate: log-likelihood not finite at the initial point");
  }

  // Flattened (μ, Y) iterate and gradient, for the Barzilai–Borwein step.
  auto flatten = [d](const VectorXd& v, const MatrixXd& m_part) {
    VectorXd out(d + d * d);
    out.head(d) = v;
    out.tail(d * d) = Eigen::Map<const VectorXd>(m_part.data(), d * d);
    return out;
  };

  double step = 1.0;
  int it = 0;
  double grad_norm = detail::coord_gradient_norm(g);
  VectorXd prev_point;
  VectorXd prev_grad;
  for (; it < max_iter && grad_norm > tol; ++it) {
    // Chain rule Λ -> Y in the eigenbasis of Λ (shared with Y).
    const MatrixXd& q = lambda.eigenvectors();
    const VectorXd& ev = lambda.eigenvalues();
    MatrixXd gt = q.transpose() * g.grad_lambda * q;
    for (int a = 0; a < d; ++a) {
      for (int b = 0; b < d; ++b) {
        gt(a, b) *= detail::exp_divided_difference(std::log(ev[a]), std::log(ev[b]));
      }
    }
    const MatrixXd grad_y = q * gt * q.transpose();
    const double dir_sq = g.grad_mu.squaredNorm() + grad_y.squaredNorm();

    const VectorXd point = flatten(mu, y);
    const VectorXd grad = flatten(g.grad_mu, grad_y);
    if (prev_point.size() > 0) {
      const VectorXd s = point - prev_point;
      const VectorXd dg = grad - prev_grad;
      const double denom = dg.squaredNorm();
      const double bb = denom > 0.0 ? -s.dot(dg) / denom : 0.0;
      if (std::isfinite(bb) && bb > 0.0) step = std::min(bb, 1e6);
    }
    prev_point = point;
    prev_grad = grad;

    bool accepted = false;
    bool any_finite = false;
    for (int halvings = 0; halvings < 60; ++halvings) {
      const VectorXd mu_new = mu + step * g.grad_mu;
      const MatrixXd y_new = y + step * grad_y;
      SpdMatrix lambda_new = exp_of(y_new);
      auto g_new = detail::mean_ll_gradient(data, shape, mu_new, lambda_new);
      if (std::isfinite(g_new.mean_ll)) any_finite = true;
      if (std::isfinite(g_new.mean_ll) && g_new.mean_ll >= g.mean_ll + 1e-4 * step * dir_sq) {
        mu = mu_new;
        y = y_new;
        lambda = std::move(lambda_new);
        g = std::move(g_new);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!any_finite) throw LineSearchFailure("mle_estimate: no finite ascent step found");
      break;  // stalled at rounding level
    }
    grad_norm = detail::coord_gradient_norm(g);
  }

  EstimatorReport report{AffineParams(mu, lambda), it, grad_norm <= tol, grad_norm, EstimatorMethod::MLE};
  return report;
}

namespace detail {

// ∫_a^b z f(z) dz for a 1-D shape; a = -inf and b = +inf are allowed.
// Finite pieces use adaptive Simpson; infinite tails use the bounded
// substitution (and the shapes' symmetry for the lower tail).
inline double first_moment_segment(const ShapeDistribution& shape, double a, double b) {
  auto zf = [&](double z) { return z * shape.pdf_1d(z); };
  const bool lo_inf = std::isinf(a) && a < 0.0;
  const bool hi_inf = std::isinf(b) && b > 0.0;
  if (!lo_inf && !hi_inf) return numeric::adaptive_simpson(zf, a, b, 1e-13);
  if (lo_inf && hi_inf) return 0.0;  // zero mean
  if (hi_inf) return numeric::integrate_upper_tail(zf, a, 1e-13);
  // ∫_{-inf}^b z f(z) dz = -∫_{-b}^{inf} z f(z) dz by symmetry of f.
  return -numeric::integrate_upper_tail(zf, -b, 1e-13);
}

inline double quantile_1d(const ShapeDistribution& shape, double q) {
  double hi = std::min(shape.support_radius(), 1e2);
  double lo = -hi;
  // Expand until bracketed (unbounded support only).
  while (shape.cdf_1d(hi) < q && hi < 1e12) hi *= 2.0;
  while (shape.cdf_1d(lo) > q && lo > -1e12) lo *= 2.0;
  return numeric::bisect_increasing([&](double z) { return shape.cdf_1d(z); }, q, lo, hi, 1e-14);
}

}  // namespace detail

/// One-dimensional minimum-transport (order statistic) estimator:
/// μ̂ is the sample mean and σ̂ = Σ_i k_i x_(i) with
/// k_i = ∫_{z_{i-1}}^{z_i} z f(z) dz over the equipartition points
/// z_i = F^{-1}(i/n) (z_0 = -inf, z_n = +inf). Returns Λ̂ = 1/σ̂.
inline EstimatorReport wp_estimate_1d(const VectorXd& data, const ShapeDistribution& shape) {
  if (shape.dim() != 1) throw InvalidInput("wp_estimate_1d: shape must be one-dimensional");
  const int n = static_cast<int>(data.size());
  if (n < 2) throw InvalidInput("wp_estimate_1d: need at least two observations");
  if (!data.allFinite()) throw InvalidInput("wp_estimate_1d: non-finite data");

  std::vector<double> sorted(data.data(), data.data() + n);
  std::stable_sort(sorted.begin(), sorted.end());

  std::vector<double> z(n + 1);
  z[0] = -std::numeric_limits<double>::infinity();
  z[n] = std::numeric_limits<double>::infinity();
  for (int i = 1; i < n; ++i) z[i] = detail::quantile_1d(shape, static_cast<double>(i) / n);

  double sigma = 0.0;
  double k_sum = 0.0;
  for (int i = 1; i <= n; ++i) {
    const double k = detail::first_moment_segment(shape, z[i - 1], z[i]);
    sigma += k * sorted[i - 1];
    k_sum += k;
  }
  if (!(sigma > 0.0)) {
    throw DegenerateEstimate("wp_estimate_1d: nonpositive scale estimate " + std::to_string(sigma));
  }

  VectorXd mu(1);
  mu[0] = data.mean();
  MatrixXd lam(1, 1);
  lam(0, 0) = 1.0 / sigma;
  EstimatorReport report{AffineParams(mu, SpdMatrix(lam)), 0, true, std::abs(k_sum),
                         EstimatorMethod::Wp1D};
  return report;
}

}  // namespace wasserstat
