#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>

#include "wasserstat/errors.hpp"

namespace wasserstat::numeric {

inline double normal_pdf(double z) {
  static const double kInvSqrt2Pi = 0.3989422804014326779;
  return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

namespace detail {

inline double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <typename F>
double adaptive_simpson_rec(F&& f, double a, double b, double fa, double fm, double fb, double whole,
                            double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(a, m, fa, flm, fm);
  const double right = simpson(m, b, fm, frm, fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f on the finite interval [a, b].
template <typename F>
double adaptive_simpson(F&& f, double a, double b, double tol = 1e-12, int max_depth = 48) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a);
  const double fm = f(m);
  const double fb = f(b);
  const double whole = detail::simpson(a, b, fa, fm, fb);
  return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

/// Integral of f over [a, +inf) via the substitution t = a + u/(1-u),
/// which maps the half line onto [0, 1). The integrand must decay at
/// least as fast as t^{-2-eps}.
template <typename F>
double integrate_upper_tail(F&& f, double a, double tol = 1e-12) {
  auto transformed = [&](double u) {
    const double om = 1.0 - u;
    const double t = a + u / om;
    const double v = f(t);
    return v / (om * om);
  };
  return adaptive_simpson(transformed, 0.0, 1.0 - 1e-12, tol);
}

/// Finds x in [lo, hi] with F(x) = target for increasing F, by bisection.
template <typename F>
double bisect_increasing(F&& f, double target, double lo, double hi, double xtol = 1e-13,
                         int max_iter = 200) {
  double flo = f(lo);
  double fhi = f(hi);
  if (!(flo <= target && target <= fhi)) {
    throw InvalidInput("bisect_increasing: target " + std::to_string(target) + " not bracketed");
  }
  for (int it = 0; it < max_iter && (hi - lo) > xtol * (1.0 + std::abs(lo) + std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

namespace detail {

// Continued fraction for the regularized incomplete beta (Lentz's method).
inline double beta_cont_frac(double a, double b, double x) {
  const double tiny = 1e-300;
  const double eps = 1e-15;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 300; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return h;
}

}  // namespace detail

/// Regularized incomplete beta function I_x(a, b) for a, b > 0, x in [0, 1].
inline double reg_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw InvalidInput("reg_incomplete_beta: parameters must be positive");
  }
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * detail::beta_cont_frac(a, b, x) / a;
  }
  return 1.0 - front * detail::beta_cont_frac(b, a, 1.0 - x) / b;
}

/// CDF of Student's t distribution with dof degrees of freedom.
inline double student_t_cdf(double x, double dof) {
  if (x == 0.0) return 0.5;
  const double ib = reg_incomplete_beta(0.5 * dof, 0.5, dof / (dof + x * x));
  return x > 0.0 ? 1.0 - 0.5 * ib : 0.5 * ib;
}

}  // namespace wasserstat::numeric
