#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "wasserstat/estimators.hpp"
#include "wasserstat/model.hpp"
#include "wasserstat/wscore.hpp"

namespace wasserstat {

/// A statistic x ↦ θ̂(x) with analytic gradient (k×d) and Laplacian (k),
/// the ingredients of the Wasserstein covariance.
struct StatisticFn {
  std::string name;
  int input_dim = 0;
  int output_dim = 0;
  std::function<VectorXd(const VectorXd&)> value;
  std::function<MatrixXd(const VectorXd&)> gradient;
  std::function<VectorXd(const VectorXd&)> laplacian;
};

inline StatisticFn identity_statistic(int d) {
  StatisticFn s;
  s.name = "x";
  s.input_dim = d;
  s.output_dim = d;
  s.value = [](const VectorXd& x) { return x; };
  s.gradient = [d](const VectorXd&) { return MatrixXd(MatrixXd::Identity(d, d)); };
  s.laplacian = [d](const VectorXd&) { return VectorXd(VectorXd::Zero(d)); };
  return s;
}

/// x ↦ x^p for one-dimensional x.
inline StatisticFn power_statistic_1d(int p) {
  if (p < 1) throw InvalidInput("power_statistic_1d: power must be positive");
  StatisticFn s;
  s.name = "x^" + std::to_string(p);
  s.input_dim = 1;
  s.output_dim = 1;
  s.value = [p](const VectorXd& x) {
    VectorXd v(1);
    v[0] = std::pow(x[0], p);
    return v;
  };
  s.gradient = [p](const VectorXd& x) {
    MatrixXd g(1, 1);
    g(0, 0) = p * std::pow(x[0], p - 1);
    return g;
  };
  s.laplacian = [p](const VectorXd& x) {
    VectorXd l(1);
    l[0] = p <= 1 ? 0.0 : p * (p - 1) * std::pow(x[0], p - 2);
    return l;
  };
  return s;
}

inline StatisticFn scale_statistic(const StatisticFn& base, double factor) {
  StatisticFn s = base;
  s.name = std::to_string(factor) + "*" + base.name;
  s.value = [base, factor](const VectorXd& x) { return VectorXd(factor * base.value(x)); };
  s.gradient = [base, factor](const VectorXd& x) { return MatrixXd(factor * base.gradient(x)); };
  s.laplacian = [base, factor](const VectorXd& x) { return VectorXd(factor * base.laplacian(x)); };
  return s;
}

/// Stacks quadratic scores into a vector statistic; used to feed the
/// W-scores themselves through the covariance machinery.
inline StatisticFn statistic_from_scores(std::vector<QuadraticScore> scores, std::string name) {
  if (scores.empty()) throw InvalidInput("statistic_from_scores: empty score list");
  const int d = scores.front().dim();
  const int k = static_cast<int>(scores.size());
  StatisticFn s;
  s.name = std::move(name);
  s.input_dim = d;
  s.output_dim = k;
  auto shared = std::make_shared<std::vector<QuadraticScore>>(std::move(scores));
  s.value = [shared, k](const VectorXd& x) {
    VectorXd v(k);
    for (int i = 0; i < k; ++i) v[i] = (*shared)[i](x);
    return v;
  };
  s.gradient = [shared, k, d](const VectorXd& x) {
    MatrixXd g(k, d);
    for (int i = 0; i < k; ++i) g.row(i) = (*shared)[i].gradient(x).transpose();
    return g;
  };
  s.laplacian = [shared, k](const VectorXd& x) {
    (void)x;
    VectorXd l(k);
    for (int i = 0; i < k; ++i) l[i] = (*shared)[i].laplacian();
    return l;
  };
  return s;
}

/// The statistic menu used by the bound and robustness experiments:
/// identity, the W-scores of θ, and (in one dimension) x² and x³.
inline std::vector<StatisticFn> statistic_menu(const AffineParams& theta) {
  std::vector<StatisticFn> menu;
  menu.push_back(identity_statistic(theta.dim()));
  if (theta.dim() == 1) {
    menu.push_back(power_statistic_1d(2));
    menu.push_back(power_statistic_1d(3));
  }
  menu.push_back(statistic_from_scores(wscores(theta), "wscores"));
  return menu;
}

/// W-covariance Var^W(θ̂) = E_θ[(∇θ̂_a)ᵀ(∇θ̂_b)], estimated by Monte Carlo.
inline MatrixXd w_covariance(const StatisticFn& stat, const AffineParams& theta,
                             const ShapeDistribution& shape, int n, std::uint64_t seed) {
  if (n < 1000) throw InvalidInput("w_covariance: n must be at least 10^3");
  if (stat.input_dim != theta.dim()) throw InvalidInput("w_covariance: statistic dimension mismatch");
  const MatrixXd x = sample_model(theta, shape, n, seed);
  MatrixXd acc = MatrixXd::Zero(stat.output_dim, stat.output_dim);
  for (Eigen::Index t = 0; t < x.rows(); ++t) {
    const MatrixXd g = stat.gradient(x.row(t).transpose());
    acc.noalias() += g * g.transpose();
  }
  return acc / static_cast<double>(n);
}

/// Fisher information g_F = E[S^F (S^F)ᵀ] by Monte Carlo. Requires a smooth
/// waveform.
inline MatrixXd fisher_info_mc(const AffineParams& theta, const ShapeDistribution& shape, int n,
                               std::uint64_t seed) {
  if (!shape.has_smooth_density()) {
    throw UnsupportedShape("fisher_info_mc: " + shape.name() + " has no smooth density");
  }
  if (n < 1000) throw InvalidInput("fisher_info_mc: n must be at least 10^3");
  const int m = param_count(theta.dim());
  const MatrixXd x = sample_model(theta, shape, n, seed);
  MatrixXd acc = MatrixXd::Zero(m, m);
  for (Eigen::Index t = 0; t < x.rows(); ++t) {
    const VectorXd s = fisher_score(theta, shape, x.row(t).transpose());
    acc.noalias() += s * s.transpose();
  }
  return acc / static_cast<double>(n);
}

/// One Wasserstein–Cramér–Rao comparison: lhs = Var^W(θ̂), rhs assembled
/// from the mean Jacobian and G_W(θ)^{-1}. The Jacobian ∂_j E_θ[θ̂_a] is
/// computed with the integration-by-parts identity
/// E_θ[(∇θ̂_a)ᵀ(∇S_j^W)], on the same sample as the lhs.
struct BoundCheck {
  MatrixXd lhs;
  MatrixXd rhs;
  MatrixXd jacobian;
  double min_eig_gap = 0.0;
  double gap_se = 0.0;
};

inline BoundCheck wcr_bound_check(const StatisticFn& stat, const AffineParams& theta,
                                  const ShapeDistribution& shape, int n, std::uint64_t seed) {
  if (n < 1000) throw InvalidInput("wcr_bound_check: n must be at least 10^3");
  if (stat.input_dim != theta.dim()) throw InvalidInput("wcr_bound_check: statistic dimension mismatch");
  const int d = theta.dim();
  const int m = param_count(d);
  const int k = stat.output_dim;

  const MatrixXd g_w = w_info_matrix(theta);
  Eigen::LDLT<MatrixXd> g_w_ldlt(g_w);
  if (g_w_ldlt.info() != Eigen::Success) {
    throw SingularMatrix("wcr_bound_check: G_W not invertible", std::numeric_limits<double>::infinity());
  }
  const auto scores = wscores(theta);

  const MatrixXd x = sample_model(theta, shape, n, seed);
  MatrixXd lhs = MatrixXd::Zero(k, k);
  MatrixXd jac = MatrixXd::Zero(k, m);
  MatrixXd sg(m, d);
  for (int t = 0; t < n; ++t) {
    const VectorXd xt = x.row(t).transpose();
    const MatrixXd g = stat.gradient(xt);
    for (int j = 0; j < m; ++j) sg.row(j) = scores[j].gradient(xt).transpose();
    lhs.noalias() += g * g.transpose();
    jac.noalias() += g * sg.transpose();
  }
  lhs /= static_cast<double>(n);
  jac /= static_cast<double>(n);

  const MatrixXd rhs = jac * g_w_ldlt.solve(jac.transpose());
  const MatrixXd gap = ((lhs - rhs) + (lhs - rhs).transpose()) / 2.0;
  const SymEig eig = detail::sym_eig_impl(gap);
  const double lam_min = eig.values[k - 1];
  const VectorXd v = eig.vectors.col(k - 1);

  // Delta-method SE of v' (lhs - rhs) v: project per-sample contributions of
  // both the lhs and the Jacobian onto the minimum-eigenvalue direction
  // (second pass, gradients recomputed).
  const VectorXd u = jac.transpose() * v;      // m
  const VectorXd g_inv_u = g_w_ldlt.solve(u);  // m
  double mean_y = 0.0;
  double mean_y2 = 0.0;
  for (int t = 0; t < n; ++t) {
    const VectorXd xt = x.row(t).transpose();
    for (int j = 0; j < m; ++j) sg.row(j) = scores[j].gradient(xt).transpose();
    const VectorXd w = stat.gradient(xt).transpose() * v;  // d
    const double y = w.squaredNorm() - 2.0 * g_inv_u.dot(sg * w);
    mean_y += y;
    mean_y2 += y * y;
  }
  mean_y /= n;
  mean_y2 /= n;
  const double var_y = std::max(0.0, mean_y2 - mean_y * mean_y);

  BoundCheck out;
  out.lhs = lhs;
  out.rhs = rhs;
  out.jacobian = jac;
  out.min_eig_gap = lam_min;
  out.gap_se = std::sqrt(var_y / n);
  return out;
}

/// Noise-robustness experiment for the §-style identity
///   slope of (Var[θ̂(X+Z)] - Var[θ̂(X)]) vs σ²  minus the Laplacian
///   covariance correction  equals  Var^W(θ̂).
/// Common random numbers: one X sample and one standard-normal Z₀ sample are
/// reused across the σ² grid (Z = σ Z₀), so the differences are smooth in σ².
/// `identity_se` carries batch-means standard errors (20 batches).
struct RobustnessReport {
  std::vector<double> sigma2_grid;
  std::vector<MatrixXd> delta_var;  // one per σ²
  MatrixXd slope;
  MatrixXd correction;
  MatrixXd var_w;
  MatrixXd identity_gap;  // slope - correction - var_w
  MatrixXd identity_se;
};

namespace detail {

// Sample covariance (1/n) of the rows of a value matrix.
inline MatrixXd row_covariance(const MatrixXd& values) {
  const double n = static_cast<double>(values.rows());
  const Eigen::RowVectorXd mean = values.colwise().mean();
  const MatrixXd centered = values.rowwise() - mean;
  return centered.transpose() * centered / n;
}

// Cross covariance (1/n) between rows of two value matrices.
inline MatrixXd row_cross_covariance(const MatrixXd& a, const MatrixXd& b) {
  const double n = static_cast<double>(a.rows());
  const Eigen::RowVectorXd mean_a = a.colwise().mean();
  const Eigen::RowVectorXd mean_b = b.colwise().mean();
  return (a.rowwise() - mean_a).transpose() * (b.rowwise() - mean_b) / n;
}

struct RobustnessSlices {
  MatrixXd slope;
  MatrixXd correction;
  MatrixXd var_w;
};

// Core robustness estimates on a contiguous row range [lo, hi).
inline RobustnessSlices robustness_on_range(const StatisticFn& stat, const std::vector<double>& grid,
                                            const MatrixXd& base_values, const MatrixXd& lap_values,
                                            const MatrixXd& grad_gram_sum, const MatrixXd& x,
                                            const MatrixXd& z0, int lo, int hi,
                                            std::vector<MatrixXd>* delta_out) {
  const int k = stat.output_dim;
  const int rows = hi - lo;
  const MatrixXd base_cov = row_covariance(base_values.middleRows(lo, rows));

  MatrixXd delta_sum = MatrixXd::Zero(k, k);
  double sigma2_sum = 0.0;
  MatrixXd noisy_values(rows, k);
  for (std::size_t s = 0; s < grid.size(); ++s) {
    const double sigma = std::sqrt(grid[s]);
    for (int t = 0; t < rows; ++t) {
      const VectorXd xt = x.row(lo + t).transpose() + sigma * z0.row(lo + t).transpose();
      noisy_values.row(t) = stat.value(xt).transpose();
    }
    const MatrixXd delta = row_covariance(noisy_values) - base_cov;
    if (delta_out) (*delta_out)[s] = delta;
    delta_sum += delta;
    sigma2_sum += grid[s];
  }

  RobustnessSlices out;
  out.slope = delta_sum / sigma2_sum;
  const MatrixXd cross =
      row_cross_covariance(base_values.middleRows(lo, rows), lap_values.middleRows(lo, rows));
  out.correction = 0.5 * (cross + cross.transpose());
  out.var_w = grad_gram_sum;  // already averaged over the range by the caller
  return out;
}

}  // namespace detail

inline RobustnessReport noise_robustness(const StatisticFn& stat, const AffineParams& theta,
                                         const ShapeDistribution& shape,
                                         const std::vector<double>& sigma2_grid, int n,
                                         std::uint64_t seed) {
  if (sigma2_grid.empty()) throw InvalidInput("noise_robustness: empty sigma2 grid");
  const double sigma2_cap = 0.1 * theta.covariance().trace() / theta.dim();
  for (double s2 : sigma2_grid) {
    if (!(s2 > 0.0)) throw InvalidInput("noise_robustness: sigma2 values must be positive");
    if (s2 > sigma2_cap) {
      throw InvalidInput("noise_robustness: sigma2 " + std::to_string(s2) +
                         " exceeds the small-noise cap " + std::to_string(sigma2_cap));
    }
  }
  if (n < 10000) throw InvalidInput("noise_robustness: n must be at least 10^4");
  if (stat.input_dim != theta.dim()) throw InvalidInput("noise_robustness: statistic dimension mismatch");

  const int d = theta.dim();
  const int k = stat.output_dim;
  const MatrixXd x = sample_model(theta, shape, n, derive_seed(seed, 1));
  const ShapeDistribution noise = ShapeDistribution::gaussian(d);
  const MatrixXd z0 = noise.sample(n, derive_seed(seed, 2));

  MatrixXd base_values(n, k);
  MatrixXd lap_values(n, k);
  MatrixXd gram_flat(n, k * k);  // row t = vec(∇θ̂ ∇θ̂ᵀ at x_t)
  for (int t = 0; t < n; ++t) {
    const VectorXd xt = x.row(t).transpose();
    base_values.row(t) = stat.value(xt).transpose();
    lap_values.row(t) = stat.laplacian(xt).transpose();
    const MatrixXd g = stat.gradient(xt);
    const MatrixXd gram = g * g.transpose();
    gram_flat.row(t) = Eigen::Map<const Eigen::RowVectorXd>(gram.data(), k * k);
  }

  auto gram_mean = [&](int lo, int hi) {
    const Eigen::RowVectorXd flat = gram_flat.middleRows(lo, hi - lo).colwise().mean();
    return MatrixXd(Eigen::Map<const MatrixXd>(flat.data(), k, k));
  };

  RobustnessReport report;
  report.sigma2_grid = sigma2_grid;
  report.delta_var.resize(sigma2_grid.size());
  const auto full = detail::robustness_on_range(stat, sigma2_grid, base_values, lap_values,
                                                gram_mean(0, n), x, z0, 0, n, &report.delta_var);
  report.slope = full.slope;
  report.correction = full.correction;
  report.var_w = full.var_w;
  report.identity_gap = full.slope - full.correction - full.var_w;

  const int batches = 20;
  const int batch_rows = n / batches;
  MatrixXd mean_gap = MatrixXd::Zero(k, k);
  MatrixXd mean_gap2 = MatrixXd::Zero(k, k);
  for (int b = 0; b < batches; ++b) {
    const int lo = b * batch_rows;
    const int hi = (b == batches - 1) ? n : lo + batch_rows;
    const auto slice = detail::robustness_on_range(stat, sigma2_grid, base_values, lap_values,
                                                   gram_mean(lo, hi), x, z0, lo, hi, nullptr);
    const MatrixXd gap = slice.slope - slice.correction - slice.var_w;
    mean_gap += gap;
    mean_gap2 += gap.cwiseProduct(gap);
  }
  mean_gap /= batches;
  mean_gap2 /= batches;
  const MatrixXd var_between = (mean_gap2 - mean_gap.cwiseProduct(mean_gap)).cwiseMax(0.0);
  report.identity_se = (var_between / batches).cwiseSqrt();
  return report;
}

/// Sampling covariance of an estimator over independent replications of
/// n-sample datasets; the empirical counterpart of Cov[θ̂] ≈ g⁻¹/n theory.
struct SamplingCovariance {
  MatrixXd cov;  // m×m, over the canonical flattened coordinates
  VectorXd mean;
  int used = 0;
  int failures = 0;
};

inline SamplingCovariance estimator_sampling_covariance(EstimatorMethod method, const AffineParams& theta,
                                                        const ShapeDistribution& shape, int n,
                                                        int replications, std::uint64_t seed,
                                                        int threads = 1) {
  if (replications < 100) {
    throw InvalidInput("estimator_sampling_covariance: need at least 100 replications");
  }
  if (method == EstimatorMethod::Wp1D && theta.dim() != 1) {
    throw InvalidInput("estimator_sampling_covariance: wp1d requires dimension 1");
  }
  const int m = param_count(theta.dim());

  std::vector<std::optional<VectorXd>> slots(replications);
  auto run_one = [&](int rep) {
    try {
      const MatrixXd data = sample_model(theta, shape, n, derive_seed(seed, rep));
      switch (method) {
        case EstimatorMethod::WMoment:
          slots[rep] = flatten_params(w_estimate(data).estimate);
          break;
        case EstimatorMethod::MLE: {
          const auto init = w_estimate(data);
          const auto rep_out = mle_estimate(data, shape, init.estimate, 1e-8, 2000);
          if (rep_out.converged) slots[rep] = flatten_params(rep_out.estimate);
          break;
        }
        case EstimatorMethod::Wp1D:
          slots[rep] = flatten_params(wp_estimate_1d(data.col(0), shape).estimate);
          break;
      }
    } catch (const Error&) {
      // failed replication: leave the slot empty, counted below
    }
  };

  threads = std::max(1, threads);
  if (threads == 1) {
    for (int rep = 0; rep < replications; ++rep) run_one(rep);
  } else {
    std::atomic<int> next{0};
    auto worker = [&] {
      for (int rep = next.fetch_add(1); rep < replications; rep = next.fetch_add(1)) run_one(rep);
    };
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  SamplingCovariance out;
  out.used = 0;
  VectorXd mean = VectorXd::Zero(m);
  for (const auto& slot : slots) {
    if (slot) {
      mean += *slot;
      ++out.used;
    }
  }
  out.failures = replications - out.used;
  if (out.used < 2) {
    throw DegenerateEstimate("estimator_sampling_covariance: fewer than two successful replications");
  }
  mean /= out.used;
  MatrixXd cov = MatrixXd::Zero(m, m);
  for (const auto& slot : slots) {
    if (slot) {
      const VectorXd c = *slot - mean;
      cov.noalias() += c * c.transpose();
    }
  }
  out.cov = cov / static_cast<double>(out.used - 1);
  out.mean = mean;
  return out;
}

}  // namespace wasserstat
