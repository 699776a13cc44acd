#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "wasserstat/errors.hpp"

namespace wasserstat {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Dense real symmetric matrix. Construction rejects matrices whose
/// relative asymmetry exceeds 1e-12 and then symmetrizes exactly via
/// (S + S^T)/2, so downstream code may assume entries(i,j) == entries(j,i).
class SymMatrix {
 public:
  explicit SymMatrix(MatrixXd entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols() || entries_.rows() < 1) {
      throw InvalidInput("SymMatrix: matrix must be square and non-empty");
    }
    if (!entries_.allFinite()) {
      throw InvalidInput("SymMatrix: non-finite entries");
    }
    const double scale = entries_.cwiseAbs().maxCoeff();
    const double asym = (entries_ - entries_.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * scale) {
      throw InvalidInput("SymMatrix: relative asymmetry " + std::to_string(asym / scale) +
                         " exceeds 1e-12");
    }
    entries_ = ((entries_ + entries_.transpose()) / 2.0).eval();
  }

  int dim() const { return static_cast<int>(entries_.rows()); }
  const MatrixXd& mat() const { return entries_; }

  static SymMatrix zero(int d) { return SymMatrix(MatrixXd::Zero(d, d)); }
  static SymMatrix identity(int d) { return SymMatrix(MatrixXd::Identity(d, d)); }

 private:
  MatrixXd entries_;
};

struct SymEig {
  VectorXd values;   // descending
  MatrixXd vectors;  // columns are eigenvectors, orthonormal
};

namespace detail {

// Eigendecomposition with deterministic ordering: eigenvalues descending,
// each eigenvector's first component of magnitude > 1e-12 made positive.
inline SymEig sym_eig_impl(const MatrixXd& s) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(s);
  if (solver.info() != Eigen::Success) {
    throw InvalidInput("sym_eig: eigendecomposition failed");
  }
  const int d = static_cast<int>(s.rows());
  SymEig out;
  out.values = VectorXd(d);
  out.vectors = MatrixXd(d, d);
  // Eigen returns ascending order; reverse it.
  for (int k = 0; k < d; ++k) {
    out.values[k] = solver.eigenvalues()[d - 1 - k];
    out.vectors.col(k) = solver.eigenvectors().col(d - 1 - k);
  }
  for (int k = 0; k < d; ++k) {
    for (int r = 0; r < d; ++r) {
      const double v = out.vectors(r, k);
      if (std::abs(v) > 1e-12) {
        if (v < 0.0) out.vectors.col(k) = -out.vectors.col(k);
        break;
      }
    }
  }
  return out;
}

}  // namespace detail

inline SymEig sym_eig(const SymMatrix& s) { return detail::sym_eig_impl(s.mat()); }

/// Symmetric positive definite matrix with its eigendecomposition cached at
/// construction. Throws SingularMatrix if the smallest eigenvalue is not
/// strictly positive.
class SpdMatrix {
 public:
  explicit SpdMatrix(MatrixXd entries) : SpdMatrix(SymMatrix(std::move(entries))) {}

  explicit SpdMatrix(SymMatrix sym) : entries_(std::move(sym)), eig_(sym_eig(entries_)) {
    const double max_eig = eig_.values[0];
    const double min_eig = eig_.values[dim() - 1];
    if (!(min_eig > 0.0)) {
      throw SingularMatrix("SpdMatrix: matrix is not positive definite (min eigenvalue " +
                               std::to_string(min_eig) + ")",
                           min_eig > 0.0 ? max_eig / min_eig : std::numeric_limits<double>::infinity());
    }
  }

  int dim() const { return entries_.dim(); }
  const MatrixXd& mat() const { return entries_.mat(); }
  const SymMatrix& sym() const { return entries_; }
  const VectorXd& eigenvalues() const { return eig_.values; }
  const MatrixXd& eigenvectors() const { return eig_.vectors; }

  double condition_number() const { return eig_.values[0] / eig_.values[dim() - 1]; }
  double determinant() const { return eig_.values.prod(); }
  double log_determinant() const { return eig_.values.array().log().sum(); }

  /// Q f(diag) Q^T for an arbitrary spectral map.
  template <typename F>
  MatrixXd spectral_map(F&& f) const {
    VectorXd mapped(dim());
    for (int i = 0; i < dim(); ++i) mapped[i] = f(eig_.values[i]);
    return eig_.vectors * mapped.asDiagonal() * eig_.vectors.transpose();
  }

  MatrixXd inverse() const {
    return spectral_map([](double x) { return 1.0 / x; });
  }

  static SpdMatrix identity(int d) { return SpdMatrix(MatrixXd::Identity(d, d)); }

 private:
  SymMatrix entries_;
  SymEig eig_;
};

inline SymEig sym_eig(const SpdMatrix& s) {
  return SymEig{s.eigenvalues(), s.eigenvectors()};
}

namespace detail {

inline void require_well_conditioned(const SpdMatrix& s, const char* op) {
  const double max_eig = s.eigenvalues()[0];
  const double min_eig = s.eigenvalues()[s.dim() - 1];
  if (min_eig <= 1e-12 * max_eig) {
    throw SingularMatrix(std::string(op) + ": matrix is numerically singular", max_eig / min_eig);
  }
}

}  // namespace detail

inline SpdMatrix spd_sqrt(const SpdMatrix& s) {
  detail::require_well_conditioned(s, "spd_sqrt");
  MatrixXd r = s.spectral_map([](double x) { return std::sqrt(x); });
  return SpdMatrix((r + r.transpose()) / 2.0);
}

inline SpdMatrix spd_inv_sqrt(const SpdMatrix& s) {
  detail::require_well_conditioned(s, "spd_inv_sqrt");
  MatrixXd r = s.spectral_map([](double x) { return 1.0 / std::sqrt(x); });
  return SpdMatrix((r + r.transpose()) / 2.0);
}

/// Solves AX + XA = B for symmetric positive definite A and symmetric B,
/// in the eigenbasis of A: with A = Q diag(a) Q^T and Bt = Q^T B Q, the
/// solution is X = Q Xt Q^T with Xt_ij = Bt_ij / (a_i + a_j). The solution
/// is symmetric and satisfies tr(X) = tr(A^{-1} B) / 2.
inline SymMatrix sylvester_solve(const SpdMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim()) {
    throw InvalidInput("sylvester_solve: dimension mismatch (" + std::to_string(a.dim()) + " vs " +
                       std::to_string(b.dim()) + ")");
  }
  const int d = a.dim();
  const VectorXd& ev = a.eigenvalues();
  const double max_sum = 2.0 * ev[0];
  const double min_sum = 2.0 * ev[d - 1];
  if (min_sum <= 1e-12 * max_sum) {
    throw SingularMatrix("sylvester_solve: eigenvalue sums nearly vanish", max_sum / min_sum);
  }
  const MatrixXd& q = a.eigenvectors();
  MatrixXd bt = q.transpose() * b.mat() * q;
  MatrixXd xt(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      xt(i, j) = bt(i, j) / (ev[i] + ev[j]);
    }
  }
  MatrixXd x = q * xt * q.transpose();
  return SymMatrix((x + x.transpose()) / 2.0);
}

}  // namespace wasserstat
