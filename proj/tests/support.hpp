#pragma once

// Shared generators for the test programs.

#include <random>

#include "eigtest/eigtest.hpp"

namespace eigtest::testing {

inline DenseMatrix gaussian_matrix(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  DenseMatrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  }
  return m;
}

inline SymMatrix random_symmetric(Index d, Rng& rng) {
  return SymMatrix::symmetrized(gaussian_matrix(d, d, rng));
}

/// Random orthogonal d x d matrix (QR of a Gaussian matrix).
inline DenseMatrix random_orthogonal(Index d, Rng& rng) {
  Eigen::HouseholderQR<DenseMatrix> qr(gaussian_matrix(d, d, rng));
  return qr.householderQ() * DenseMatrix::Identity(d, d);
}

/// Random rank-m projector in dimension d.
inline SymMatrix random_projector(Index d, Index m, Rng& rng) {
  const DenseMatrix q = random_orthogonal(d, rng);
  return SymMatrix::symmetrized(q.leftCols(m) * q.leftCols(m).transpose());
}

/// Random A = P B (I - P) + (I - P) B P.
inline SymMatrix random_block_form(const ProjectorFrame& frame, Rng& rng) {
  const Index d = frame.dim();
  const Index m = frame.rank();
  const DenseMatrix c = gaussian_matrix(m, d - m, rng);
  const DenseMatrix off = frame.gamma1 * c * frame.gamma2.transpose();
  return SymMatrix::symmetrized(off + off.transpose());
}

inline Vector spiked_spectrum(Index d) {
  Vector mu = Vector::Ones(d);
  mu(0) = 10.0;
  mu(1) = 6.0;
  mu(2) = 3.0;
  return mu;
}

}  // namespace eigtest::testing
