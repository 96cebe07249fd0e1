#pragma once

// Dense real matrix primitives shared by every other module: a symmetric
// matrix type, symmetric eigendecomposition with a deterministic sign
// convention, matrix norms, PSD factorization and sample covariance.

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "eigtest/error.hpp"

namespace eigtest {

using Index = Eigen::Index;
using DenseMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kSymmetryTolerance = 1e-10;
inline constexpr double kDefaultRankTolerance = 1e-10;

inline bool all_finite(const DenseMatrix& m) { return m.allFinite(); }

inline void require_finite(const DenseMatrix& m, const char* what) {
  if (!m.allFinite()) fail(ErrorCode::InvalidInput, std::string(what) + ": non-finite entry");
}

inline double max_abs_norm(const DenseMatrix& m) {
  require_finite(m, "max_abs_norm");
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double frobenius_norm(const DenseMatrix& m) {
  require_finite(m, "frobenius_norm");
  return m.norm();
}

/// Square real matrix that is exactly symmetric in storage.
///
/// The checked constructor accepts inputs whose asymmetry is within
/// `tol * (1 + max|A_ij|)` and stores (A + A^T) / 2.
class SymMatrix {
 public:
  SymMatrix() = default;

  explicit SymMatrix(const DenseMatrix& a, double tol = kSymmetryTolerance) {
    if (a.rows() != a.cols()) {
      fail(ErrorCode::InvalidInput, "symmetric matrix must be square, got " +
                                        std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
    }
    require_finite(a, "SymMatrix");
    if (a.size() > 0) {
      const double scale = 1.0 + a.cwiseAbs().maxCoeff();
      const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
      if (asym > tol * scale) {
        fail(ErrorCode::InvalidInput,
             "matrix is not symmetric (max asymmetry " + std::to_string(asym) + ")");
      }
    }
    m_ = 0.5 * (a + a.transpose());
  }

  /// Symmetrizes without the asymmetry check; for matrices symmetric by
  /// construction up to rounding.
  static SymMatrix symmetrized(const DenseMatrix& a) {
    if (a.rows() != a.cols()) fail(ErrorCode::InvalidInput, "symmetric matrix must be square");
    require_finite(a, "SymMatrix");
    SymMatrix s;
    s.m_ = 0.5 * (a + a.transpose());
    return s;
  }

  static SymMatrix identity(Index d) { return wrap(DenseMatrix::Identity(d, d)); }
  static SymMatrix zero(Index d) { return wrap(DenseMatrix::Zero(d, d)); }
  static SymMatrix diagonal(const Vector& diag) { return wrap(diag.asDiagonal().toDenseMatrix()); }

  Index dim() const { return m_.rows(); }
  const DenseMatrix& matrix() const { return m_; }
  double operator()(Index i, Index j) const { return m_(i, j); }

  friend SymMatrix operator+(const SymMatrix& a, const SymMatrix& b) { return wrap(a.m_ + b.m_); }
  friend SymMatrix operator-(const SymMatrix& a, const SymMatrix& b) { return wrap(a.m_ - b.m_); }
  friend SymMatrix operator-(const SymMatrix& a) { return wrap(-a.m_); }
  friend SymMatrix operator*(double c, const SymMatrix& a) { return wrap(c * a.m_); }

 private:
  // Sums, differences and scalings of exactly symmetric matrices stay exactly
  // symmetric, so they skip the check.
  static SymMatrix wrap(DenseMatrix m) {
    SymMatrix s;
    s.m_ = std::move(m);
    return s;
  }

  DenseMatrix m_;
};

/// Eigenvalues in non-increasing order; column k of `vectors` belongs to
/// `values[k]`.
struct EigenSystem {
  Vector values;
  DenseMatrix vectors;

  Index dim() const { return values.size(); }
};

namespace detail {

// First component with magnitude above a small relative threshold is made
// positive.
inline void normalize_sign(Eigen::Ref<Vector> v) {
  const double scale = v.cwiseAbs().maxCoeff();
  if (scale == 0.0) return;
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-10 * scale) {
      if (v(i) < 0) v = -v;
      return;
    }
  }
}

}  // namespace detail

inline EigenSystem sym_eigen(const SymMatrix& a) {
  const Index d = a.dim();
  EigenSystem out;
  if (d == 0) return out;
  Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(a.matrix(), Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    fail(ErrorCode::NumericalFailure, "symmetric eigensolver did not converge");
  }
  // Eigen returns ascending order.
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  for (Index k = 0; k < d; ++k) detail::normalize_sign(out.vectors.col(k));
  return out;
}

inline Vector sym_eigenvalues(const SymMatrix& a) {
  if (a.dim() == 0) return Vector();
  Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(a.matrix(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    fail(ErrorCode::NumericalFailure, "symmetric eigensolver did not converge");
  }
  return solver.eigenvalues().reverse();
}

/// Largest singular value.
inline double spectral_norm(const DenseMatrix& m) {
  require_finite(m, "spectral_norm");
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1 || m.cols() == 1) return m.norm();
  Eigen::JacobiSVD<DenseMatrix> svd(m);
  return svd.singularValues()(0);
}

/// For symmetric input the spectral norm is the largest absolute eigenvalue.
inline double spectral_norm(const SymMatrix& a) {
  if (a.dim() == 0) return 0.0;
  if (a.dim() == 1) return std::abs(a(0, 0));
  const Vector ev = sym_eigenvalues(a);
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

namespace detail {

// Spectral norm of a small rectangular block via the eigenvalues of the
// smaller Gram matrix.
inline double small_block_norm(const DenseMatrix& block) {
  if (block.size() == 0) return 0.0;
  if (block.rows() == 1 || block.cols() == 1) return block.norm();
  DenseMatrix gram = block.rows() <= block.cols() ? DenseMatrix(block * block.transpose())
                                                  : DenseMatrix(block.transpose() * block);
  if (gram.rows() == 2) {
    // Closed form for 2x2: largest root of t^2 - tr t + det.
    const double a = gram(0, 0), b = 0.5 * (gram(0, 1) + gram(1, 0)), c = gram(1, 1);
    const double half_tr = 0.5 * (a + c);
    const double disc = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
    return std::sqrt(std::max(0.0, half_tr + disc));
  }
  Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, solver.eigenvalues().maxCoeff()));
}

}  // namespace detail

/// Spectral norm of the contiguous submatrix starting at (row_start,
/// col_start), zero-based.
inline double block_spectral_norm(const DenseMatrix& m, Index row_start, Index row_len,
                                  Index col_start, Index col_len) {
  if (row_start < 0 || col_start < 0 || row_len < 1 || col_len < 1 ||
      row_start + row_len > m.rows() || col_start + col_len > m.cols()) {
    fail(ErrorCode::InvalidWindow, "window [" + std::to_string(row_start) + "+" +
                                       std::to_string(row_len) + ", " + std::to_string(col_start) +
                                       "+" + std::to_string(col_len) + "] outside " +
                                       std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  return detail::small_block_norm(m.block(row_start, col_start, row_len, col_len));
}

/// (1/n) sum_i x_i x_i^T over the rows of `data`; with `center` the column
/// means are removed first.
inline SymMatrix sample_covariance(const DenseMatrix& data, bool center = false) {
  const Index n = data.rows();
  if (n == 0) fail(ErrorCode::EmptyData, "sample_covariance: no observations");
  require_finite(data, "sample_covariance");
  const Index d = data.cols();
  DenseMatrix cov = DenseMatrix::Zero(d, d);
  if (center) {
    const DenseMatrix centered = data.rowwise() - data.colwise().mean();
    cov.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose(), 1.0 / double(n));
  } else {
    cov.selfadjointView<Eigen::Lower>().rankUpdate(data.transpose(), 1.0 / double(n));
  }
  cov.triangularView<Eigen::StrictlyUpper>() = cov.transpose();
  return SymMatrix::symmetrized(cov);
}

/// Returns B (d x r) with B B^T = A, keeping the r eigenvalues above
/// rank_tol * lambda_max.
inline DenseMatrix psd_factor(const SymMatrix& a, double rank_tol = kDefaultRankTolerance) {
  const EigenSystem eig = sym_eigen(a);
  const Index d = a.dim();
  if (d == 0) return DenseMatrix(0, 0);
  const double top = eig.values(0);
  const double norm = std::max(std::abs(top), std::abs(eig.values(d - 1)));
  if (eig.values(d - 1) < -rank_tol * norm) {
    fail(ErrorCode::NotPSD, "matrix has eigenvalue " + std::to_string(eig.values(d - 1)) +
                                " below -rank_tol*||A||");
  }
  Index r = 0;
  while (r < d && eig.values(r) > rank_tol * top) ++r;
  DenseMatrix b = eig.vectors.leftCols(r);
  for (Index k = 0; k < r; ++k) b.col(k) *= std::sqrt(eig.values(k));
  return b;
}

/// Symmetric square root V diag(sqrt(lambda)) V^T of a PSD matrix.
inline SymMatrix psd_sqrt(const SymMatrix& a, double rank_tol = kDefaultRankTolerance) {
  const DenseMatrix b = psd_factor(a, rank_tol);
  if (b.cols() == 0) return SymMatrix::zero(a.dim());
  // B = V_r L^{1/2}, so B V_r^T = V_r L^{1/2} V_r^T.
  DenseMatrix vr = b;
  for (Index k = 0; k < b.cols(); ++k) vr.col(k).normalize();
  return SymMatrix::symmetrized(b * vr.transpose());
}

}  // namespace eigtest
