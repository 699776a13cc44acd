#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>

#include "wasserstat/errors.hpp"
#include "wasserstat/numeric.hpp"
#include "wasserstat/rng.hpp"

namespace wasserstat {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class ShapeKind { Gaussian, UniformBall, StudentT };

inline std::string shape_kind_name(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::Gaussian: return "gaussian";
    case ShapeKind::UniformBall: return "uniform-ball";
    case ShapeKind::StudentT: return "student-t";
  }
  return "?";
}

/// Spherically symmetric standard waveform f(z) = g(||z||) with unit mass,
/// zero mean and identity covariance. The menu:
///   Gaussian     g(r) ∝ exp(-r^2/2)
///   UniformBall  uniform on the ball of radius sqrt(d+2)
///   StudentT(ν)  t kernel rescaled so the covariance is the identity, ν > 2
/// `uniform_ball_with_radius` builds a uniform ball with an arbitrary radius
/// (a valid spherical density but standardized only at sqrt(d+2)); it exists
/// so that mis-scaled shapes can be fed to verify_standardization.
class ShapeDistribution {
 public:
  static ShapeDistribution gaussian(int dim) { return ShapeDistribution(ShapeKind::Gaussian, dim, 0.0, 0.0); }

  static ShapeDistribution uniform_ball(int dim) {
    return ShapeDistribution(ShapeKind::UniformBall, dim, 0.0, std::sqrt(static_cast<double>(dim) + 2.0));
  }

  static ShapeDistribution uniform_ball_with_radius(int dim, double radius) {
    if (!(radius > 0.0)) throw InvalidInput("uniform_ball_with_radius: radius must be positive");
    return ShapeDistribution(ShapeKind::UniformBall, dim, 0.0, radius);
  }

  static ShapeDistribution student_t(int dim, double nu) {
    if (!(nu > 2.0)) {
      throw InvalidInput("student_t: nu must exceed 2 for a finite covariance, got " + std::to_string(nu));
    }
    return ShapeDistribution(ShapeKind::StudentT, dim, nu, 0.0);
  }

  ShapeKind kind() const { return kind_; }
  int dim() const { return dim_; }
  double nu() const { return nu_; }
  std::string name() const { return shape_kind_name(kind_); }

  /// Radius of the support; +inf for the unbounded shapes.
  double support_radius() const {
    return kind_ == ShapeKind::UniformBall ? radius_ : std::numeric_limits<double>::infinity();
  }

  bool has_smooth_density() const { return kind_ != ShapeKind::UniformBall; }

  /// log g(r); -inf outside a compact support.
  double log_radial(double r) const {
    if (r < 0.0) throw InvalidInput("log_radial: negative radius");
    switch (kind_) {
      case ShapeKind::Gaussian:
        return -0.5 * dim_ * std::log(2.0 * M_PI) - 0.5 * r * r;
      case ShapeKind::UniformBall:
        return r <= radius_ ? -log_ball_volume() : -std::numeric_limits<double>::infinity();
      case ShapeKind::StudentT:
        return t_log_norm() - 0.5 * (nu_ + dim_) * std::log1p(r * r / (nu_ - 2.0));
    }
    return 0.0;
  }

  double log_density(const VectorXd& z) const {
    if (z.size() != dim_) throw InvalidInput("log_density: point dimension mismatch");
    if (!z.allFinite()) throw InvalidInput("log_density: non-finite point");
    return log_radial(z.norm());
  }

  /// g'(r)/g(r). For the uniform ball this is 0 strictly inside the support
  /// and an OutsideSupport error at or beyond the boundary.
  double radial_log_deriv(double r) const {
    if (r < 0.0) throw InvalidInput("radial_log_deriv: negative radius");
    switch (kind_) {
      case ShapeKind::Gaussian:
        return -r;
      case ShapeKind::UniformBall:
        if (r >= radius_) {
          throw OutsideSupport("radial_log_deriv: r=" + std::to_string(r) +
                               " at or beyond the support boundary " + std::to_string(radius_));
        }
        return 0.0;
      case ShapeKind::StudentT:
        return -(nu_ + dim_) * r / ((nu_ - 2.0) + r * r);
    }
    return 0.0;
  }

  /// (g'(r)/g(r)) / r with the r -> 0 limit taken analytically. This is the
  /// radial factor of grad_x log p for the elliptical model.
  double radial_log_deriv_over_r(double r) const {
    if (r < 0.0) throw InvalidInput("radial_log_deriv_over_r: negative radius");
    switch (kind_) {
      case ShapeKind::Gaussian:
        return -1.0;
      case ShapeKind::UniformBall:
        if (r >= radius_) {
          throw OutsideSupport("radial_log_deriv_over_r: r at or beyond the support boundary");
        }
        return 0.0;
      case ShapeKind::StudentT:
        return -(nu_ + dim_) / ((nu_ - 2.0) + r * r);
    }
    return 0.0;
  }

  /// n i.i.d. draws, one row per observation. Pure in (n, seed).
  MatrixXd sample(int n, std::uint64_t seed) const {
    if (n < 1) throw InvalidInput("sample: n must be at least 1");
    auto engine = make_engine(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    MatrixXd out(n, dim_);
    switch (kind_) {
      case ShapeKind::Gaussian: {
        for (int t = 0; t < n; ++t)
          for (int j = 0; j < dim_; ++j) out(t, j) = normal(engine);
        break;
      }
      case ShapeKind::UniformBall: {
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        VectorXd dir(dim_);
        for (int t = 0; t < n; ++t) {
          double norm = 0.0;
          do {
            for (int j = 0; j < dim_; ++j) dir[j] = normal(engine);
            norm = dir.norm();
          } while (norm == 0.0);
          const double radius = radius_ * std::pow(unif(engine), 1.0 / dim_);
          out.row(t) = (radius / norm) * dir.transpose();
        }
        break;
      }
      case ShapeKind::StudentT: {
        std::chi_squared_distribution<double> chi2(nu_);
        for (int t = 0; t < n; ++t) {
          const double w = chi2(engine);
          const double scale = std::sqrt((nu_ - 2.0) / w);
          for (int j = 0; j < dim_; ++j) out(t, j) = scale * normal(engine);
        }
        break;
      }
    }
    return out;
  }

  /// CDF of the one-dimensional waveform; defined for dim == 1 only.
  double cdf_1d(double z) const {
    if (dim_ != 1) throw InvalidInput("cdf_1d: shape dimension must be 1");
    switch (kind_) {
      case ShapeKind::Gaussian:
        return numeric::normal_cdf(z);
      case ShapeKind::UniformBall: {
        if (z <= -radius_) return 0.0;
        if (z >= radius_) return 1.0;
        return (z + radius_) / (2.0 * radius_);
      }
      case ShapeKind::StudentT: {
        const double s = std::sqrt(nu_ / (nu_ - 2.0));
        return numeric::student_t_cdf(s * z, nu_);
      }
    }
    return 0.0;
  }

  /// Density value (not log) of the one-dimensional waveform.
  double pdf_1d(double z) const {
    if (dim_ != 1) throw InvalidInput("pdf_1d: shape dimension must be 1");
    const double lr = log_radial(std::abs(z));
    return std::isinf(lr) ? 0.0 : std::exp(lr);
  }

 private:
  ShapeDistribution(ShapeKind kind, int dim, double nu, double radius)
      : kind_(kind), dim_(dim), nu_(nu), radius_(radius) {
    if (dim < 1) throw InvalidInput("ShapeDistribution: dimension must be at least 1");
  }

  double log_ball_volume() const {
    return 0.5 * dim_ * std::log(M_PI) + dim_ * std::log(radius_) - std::lgamma(0.5 * dim_ + 1.0);
  }

  double t_log_norm() const {
    // log of s^d * Gamma((nu+d)/2) / (Gamma(nu/2) (nu pi)^{d/2}), s = sqrt(nu/(nu-2))
    return 0.5 * dim_ * std::log(nu_ / (nu_ - 2.0)) + std::lgamma(0.5 * (nu_ + dim_)) -
           std::lgamma(0.5 * nu_) - 0.5 * dim_ * std::log(nu_ * M_PI);
  }

  ShapeKind kind_;
  int dim_;
  double nu_;
  double radius_;
};

inline ShapeDistribution make_shape(ShapeKind kind, int dim, double nu = 0.0) {
  switch (kind) {
    case ShapeKind::Gaussian: return ShapeDistribution::gaussian(dim);
    case ShapeKind::UniformBall: return ShapeDistribution::uniform_ball(dim);
    case ShapeKind::StudentT: return ShapeDistribution::student_t(dim, nu);
  }
  throw InvalidInput("make_shape: unknown kind");
}

inline MatrixXd sample_standard(const ShapeDistribution& shape, int n, std::uint64_t seed) {
  return shape.sample(n, seed);
}

/// Monte Carlo check of the standardization conditions: unit mass is implied
/// by sampling, so the report covers the mean and covariance with their
/// standard errors. `passed` is false when any moment deviates from its
/// target by more than 5 standard errors.
struct MomentReport {
  int n = 0;
  VectorXd mean;
  MatrixXd cov;
  VectorXd mean_se;
  MatrixXd cov_se;
  double max_mean_dev = 0.0;
  double max_cov_dev = 0.0;
  double max_mean_z = 0.0;
  double max_cov_z = 0.0;
  bool passed = false;
};

inline MomentReport verify_standardization(const ShapeDistribution& shape, int n, std::uint64_t seed) {
  if (n < 10000) throw InvalidInput("verify_standardization: n must be at least 10^4");
  const int d = shape.dim();
  const MatrixXd z = shape.sample(n, seed);

  MomentReport report;
  report.n = n;
  report.mean = z.colwise().mean();
  MatrixXd centered = z.rowwise() - report.mean.transpose();
  report.cov = centered.transpose() * centered / static_cast<double>(n);

  report.mean_se = VectorXd(d);
  for (int j = 0; j < d; ++j) {
    report.mean_se[j] = std::sqrt(centered.col(j).squaredNorm() / n) / std::sqrt(static_cast<double>(n));
  }
  report.cov_se = MatrixXd(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      // SE of the (i,j) covariance entry from the spread of per-sample products.
      const VectorXd prod = centered.col(i).cwiseProduct(centered.col(j));
      const double m = prod.mean();
      const double var = (prod.array() - m).square().sum() / n;
      report.cov_se(i, j) = std::sqrt(var / n);
    }
  }

  report.max_mean_dev = report.mean.cwiseAbs().maxCoeff();
  report.max_cov_dev = (report.cov - MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff();
  report.max_mean_z = (report.mean.cwiseAbs().array() / report.mean_se.array()).maxCoeff();
  report.max_cov_z =
      ((report.cov - MatrixXd::Identity(d, d)).cwiseAbs().array() / report.cov_se.array()).maxCoeff();
  report.passed = report.max_mean_z <= 5.0 && report.max_cov_z <= 5.0;
  return report;
}

}  // namespace wasserstat
