#pragma once

// The (P, Gamma, s1, s2) matrix norm:
//
//   ||A|| = 1/2 ||G1' A G1|| + 1/2 ||G2' A G2||
//         + max over s1 x s2 contiguous windows W of ||[G1' A G2]_W||
//
// together with the consecutive-support sphere nets used to check it.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "eigtest/matrix_core.hpp"
#include "eigtest/spectral_model.hpp"

namespace eigtest {

/// Window sizes: s1 rows out of the m-dimensional range, s2 columns out of
/// the (d - m)-dimensional complement.
struct NormParams {
  Index s1 = 1;
  Index s2 = 1;

  void validate(Index m, Index d) const {
    if (m < 1 || m >= d) {
      fail(ErrorCode::InvalidInput, "norm needs 1 <= m <= d-1, got m=" + std::to_string(m) +
                                        ", d=" + std::to_string(d));
    }
    if (s1 < 1 || s1 > m || s2 < 1 || s2 > d - m) {
      fail(ErrorCode::InvalidInput, "window sizes s1=" + std::to_string(s1) + ", s2=" +
                                        std::to_string(s2) + " out of range for m=" +
                                        std::to_string(m) + ", d=" + std::to_string(d));
    }
  }

  /// s1 = m, s2 = d - m.
  static NormParams full(Index m, Index d) { return {m, d - m}; }
};

/// Largest spectral norm over all s1 x s2 contiguous windows, enumerated
/// row-major.
inline double window_max(const DenseMatrix& cross, Index s1, Index s2) {
  double best = 0.0;
  for (Index k = 0; k + s1 <= cross.rows(); ++k) {
    for (Index l = 0; l + s2 <= cross.cols(); ++l) {
      best = std::max(best, detail::small_block_norm(cross.block(k, l, s1, s2)));
    }
  }
  return best;
}

inline double proj_norm(const SymMatrix& a, const ProjectorFrame& frame, NormParams params) {
  const Index d = frame.dim();
  const Index m = frame.rank();
  if (a.dim() != d) {
    fail(ErrorCode::InvalidInput, "proj_norm: matrix is " + std::to_string(a.dim()) +
                                      "-dimensional, frame is " + std::to_string(d));
  }
  params.validate(m, d);
  const DenseMatrix a_g2 = a.matrix() * frame.gamma2;
  const double within = spectral_norm(SymMatrix::symmetrized(
      frame.gamma1.transpose() * a.matrix() * frame.gamma1));
  const double outside = spectral_norm(SymMatrix::symmetrized(frame.gamma2.transpose() * a_g2));
  const DenseMatrix cross = frame.gamma1.transpose() * a_g2;
  return 0.5 * within + 0.5 * outside + window_max(cross, params.s1, params.s2);
}

/// Net of the unit sphere in R^s for s in {1, 2}: {+1, -1}, or K equally
/// spaced circle points with adjacent chord length <= epsilon.
inline std::vector<Vector> sphere_eps_net(Index s, double epsilon) {
  if (!(epsilon > 0.0) || !(epsilon < 2.0)) {
    fail(ErrorCode::InvalidInput, "epsilon must lie in (0, 2)");
  }
  std::vector<Vector> net;
  if (s == 1) {
    net.push_back(Vector::Constant(1, 1.0));
    net.push_back(Vector::Constant(1, -1.0));
    return net;
  }
  if (s != 2) {
    fail(ErrorCode::Unsupported, "exact sphere nets exist only for s in {1, 2}, got s=" +
                                     std::to_string(s));
  }
  const double exact = 2.0 * std::numbers::pi / (2.0 * std::asin(epsilon / 2.0));
  // Absorb rounding so that an exact integer ratio is not bumped up by one.
  const auto k = Index(std::ceil(exact - 1e-9));
  for (Index i = 0; i < k; ++i) {
    const double angle = 2.0 * std::numbers::pi * double(i) / double(k);
    Vector v(2);
    v << std::cos(angle), std::sin(angle);
    net.push_back(v);
  }
  return net;
}

/// Net of D^k_s: every sphere-net point of R^s, zero-padded at each of the
/// k - s + 1 offsets.
inline std::vector<Vector> dset_eps_net(Index k, Index s, double epsilon) {
  if (s < 1 || s > k) {
    fail(ErrorCode::InvalidInput, "support width s=" + std::to_string(s) +
                                      " invalid for k=" + std::to_string(k));
  }
  const std::vector<Vector> base = sphere_eps_net(s, epsilon);
  std::vector<Vector> net;
  net.reserve(std::size_t(k - s + 1) * base.size());
  for (Index offset = 0; offset + s <= k; ++offset) {
    for (const Vector& y : base) {
      Vector v = Vector::Zero(k);
      v.segment(offset, s) = y;
      net.push_back(std::move(v));
    }
  }
  return net;
}

struct EpsNet {
  double epsilon = 0.0;
  std::vector<Vector> left;   // in R^m, support width <= s1
  std::vector<Vector> right;  // in R^(d-m), support width <= s2

  std::size_t pair_count() const { return left.size() * right.size(); }
};

inline EpsNet make_eps_net(Index m, Index d, NormParams params, double epsilon) {
  params.validate(m, d);
  return EpsNet{epsilon, dset_eps_net(m, params.s1, epsilon),
                dset_eps_net(d - m, params.s2, epsilon)};
}

/// Upper bound on log(pair count): (s1 + s2) log(3 / eps) + 2 log d.
inline double covering_bound(Index d, Index /*m*/, Index s1, Index s2, double epsilon) {
  return double(s1 + s2) * std::log(3.0 / epsilon) + 2.0 * std::log(double(d));
}

/// True when P A P and (I - P) A (I - P) vanish up to `tol` in max-norm.
inline bool is_block_form(const SymMatrix& a, const ProjectorFrame& frame, double tol = 1e-8) {
  const DenseMatrix& p = frame.projector.matrix();
  const DenseMatrix q = DenseMatrix::Identity(p.rows(), p.cols()) - p;
  const DenseMatrix pap = p * a.matrix() * p;
  const DenseMatrix qaq = q * a.matrix() * q;
  return pap.cwiseAbs().maxCoeff() <= tol && qaq.cwiseAbs().maxCoeff() <= tol;
}

/// max over net pairs of (G1 v)' A (G2 w), for A = P A (I-P) + (I-P) A P.
inline double discretized_sup(const SymMatrix& a, const ProjectorFrame& frame, const EpsNet& net) {
  if (a.dim() != frame.dim()) fail(ErrorCode::InvalidInput, "discretized_sup: dimension mismatch");
  if (!is_block_form(a, frame)) {
    fail(ErrorCode::BlockFormViolation, "matrix is not of the form PA(I-P) + (I-P)AP");
  }
  const DenseMatrix cross = frame.gamma1.transpose() * a.matrix() * frame.gamma2;
  double best = -std::numeric_limits<double>::infinity();
  for (const Vector& w : net.right) {
    const Vector cw = cross * w;
    for (const Vector& v : net.left) best = std::max(best, v.dot(cw));
  }
  return best;
}

}  // namespace eigtest
