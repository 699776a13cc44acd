#pragma once

// Shared helpers for the unit and acceptance suites: finite-difference
// oracles and simple Monte Carlo statistics.

#include <Eigen/Dense>
#include <cmath>
#include <functional>

#include "wasserstat/model.hpp"

namespace testutil {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Centered finite difference of a scalar function of one real variable.
inline double central_diff(const std::function<double(double)>& f, double x, double h = 1e-5) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Centered finite difference of log p(x, θ) with respect to one θ-coordinate,
// stepping along the symmetric basis direction for Λ-coordinates.
inline double fd_log_density_coord(const wasserstat::AffineParams& theta,
                                   const wasserstat::ShapeDistribution& shape, const VectorXd& x,
                                   const wasserstat::ParamIndex& idx, double h = 1e-5) {
  using namespace wasserstat;
  auto shifted = [&](double sign) {
    if (idx.tag == ParamIndex::Tag::Mu) {
      VectorXd mu = theta.mu;
      mu[idx.i] += sign * h;
      return log_density(AffineParams(mu, theta.lambda), shape, x);
    }
    MatrixXd lam = theta.lambda.mat();
    lam(idx.i, idx.j) += sign * h;
    lam(idx.j, idx.i) = lam(idx.i, idx.j);
    return log_density(AffineParams(theta.mu, SpdMatrix(lam)), shape, x);
  };
  return (shifted(1.0) - shifted(-1.0)) / (2.0 * h);
}

struct MeanSe {
  double mean;
  double se;
};

// Mean and Monte Carlo standard error of per-sample values.
inline MeanSe mean_se(const VectorXd& values) {
  const double n = static_cast<double>(values.size());
  const double mean = values.mean();
  const double var = (values.array() - mean).square().sum() / n;
  return {mean, std::sqrt(var / n)};
}

// Least squares slope of y against x (both in log space by the caller).
inline double fit_slope(const VectorXd& x, const VectorXd& y) {
  const double mx = x.mean();
  const double my = y.mean();
  const double sxy = ((x.array() - mx) * (y.array() - my)).sum();
  const double sxx = (x.array() - mx).square().sum();
  return sxy / sxx;
}

}  // namespace testutil
