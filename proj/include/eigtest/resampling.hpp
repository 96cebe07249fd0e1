#pragma once

// Resampled covariance matrices given the data:
//   * multiplier bootstrap, Sigma^B = (1/n) sum_i eta_i X_i X_i^T with
//     eta_i ~ N(1, 1);
//   * Wishart draws, Sigma^F ~ (1/n) Wishart(n, Sigma_hat), sampled through
//     the Bartlett factorization of the rank-r factor of Sigma_hat so that
//     the per-draw cost does not depend on n.
// Every draw owns an RNG derived from (master seed, draw index).

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>

#include "eigtest/matrix_core.hpp"

namespace eigtest {

enum class ResamplerKind { MultiplierBootstrap, WishartFB };

inline std::string_view to_string(ResamplerKind kind) {
  return kind == ResamplerKind::MultiplierBootstrap ? "bootstrap" : "wishart";
}

inline ResamplerKind parse_resampler(std::string_view name) {
  if (name == "bootstrap") return ResamplerKind::MultiplierBootstrap;
  if (name == "wishart") return ResamplerKind::WishartFB;
  fail(ErrorCode::UsageError, "unknown resampler '" + std::string(name) + "'");
}

struct DrawPlan {
  Index draws = 2000;
  std::uint64_t master_seed = 0;
  ResamplerKind kind = ResamplerKind::WishartFB;

  void validate() const {
    if (draws < 2) fail(ErrorCode::InvalidInput, "need at least 2 resampling draws");
  }
};

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Independent stream keyed by (seed, index); a pure function of both.
inline Rng derive_rng(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t state = seed;
  const std::uint64_t a = splitmix64(state);
  state = a ^ (index * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL);
  std::array<std::uint32_t, 8> words{};
  for (std::size_t i = 0; i < words.size(); i += 2) {
    const std::uint64_t v = splitmix64(state);
    words[i] = std::uint32_t(v);
    words[i + 1] = std::uint32_t(v >> 32);
  }
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

inline Rng derive_draw_rng(std::uint64_t master_seed, std::uint64_t draw_index) {
  return derive_rng(master_seed, draw_index);
}

/// Nested key for streams that are indexed by more than one coordinate
/// (scenario, angle, repetition...).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t state = seed ^ splitmix64(index);
  return splitmix64(state);
}

inline Vector bootstrap_weights(Index n, Rng& rng) {
  std::normal_distribution<double> normal(1.0, 1.0);
  Vector w(n);
  for (Index i = 0; i < n; ++i) w(i) = normal(rng);
  return w;
}

/// (1/n) X^T diag(w) X; with all weights 1 this is the sample covariance.
inline SymMatrix weighted_covariance(const DenseMatrix& data, const Vector& weights) {
  const Index n = data.rows();
  if (n == 0) fail(ErrorCode::EmptyData, "weighted_covariance: no observations");
  if (weights.size() != n) fail(ErrorCode::InvalidInput, "weighted_covariance: weight count");
  const DenseMatrix weighted = data.array().colwise() * weights.array();
  return SymMatrix::symmetrized(data.transpose() * weighted / double(n));
}

/// Multiplier-bootstrap covariance with N(1, 1) weights. May be indefinite.
inline SymMatrix bootstrap_cov(const DenseMatrix& data, Rng& rng) {
  if (data.rows() == 0) fail(ErrorCode::EmptyData, "bootstrap_cov: no observations");
  return weighted_covariance(data, bootstrap_weights(data.rows(), rng));
}

/// Lower-triangular Bartlett factor T of W ~ Wishart_r(n, I):
/// T_ii = sqrt(chi^2_{n-i}) (0-based i), standard normal below the diagonal.
inline DenseMatrix bartlett_factor(Index r, Index n, Rng& rng) {
  if (n < r) {
    fail(ErrorCode::DegreesOfFreedomTooSmall,
         "Wishart degrees of freedom " + std::to_string(n) + " < rank " + std::to_string(r));
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  DenseMatrix t = DenseMatrix::Zero(r, r);
  for (Index i = 0; i < r; ++i) {
    std::chi_squared_distribution<double> chi2(double(n - i));
    t(i, i) = std::sqrt(chi2(rng));
    for (Index j = 0; j < i; ++j) t(i, j) = normal(rng);
  }
  return t;
}

/// (1/n) B W B^T with W ~ Wishart_r(n, I_r), B the d x r factor of Sigma_hat.
inline SymMatrix wishart_cov(const DenseMatrix& factor, Index n, Rng& rng) {
  const Index d = factor.rows();
  if (factor.cols() == 0) return SymMatrix::zero(d);
  const DenseMatrix bt = factor * bartlett_factor(factor.cols(), n, rng);
  DenseMatrix out = DenseMatrix::Zero(d, d);
  out.selfadjointView<Eigen::Lower>().rankUpdate(bt, 1.0 / double(n));
  out.triangularView<Eigen::StrictlyUpper>() = out.transpose();
  return SymMatrix::symmetrized(out);
}

/// Draws resampled covariance matrices for one sample. Holds either the
/// (optionally centered) data for the bootstrap or the PSD factor of the
/// sample covariance for Wishart draws; immutable after construction.
class CovarianceResampler {
 public:
  CovarianceResampler(const DenseMatrix& data, bool center, ResamplerKind kind)
      : kind_(kind), n_(data.rows()) {
    if (n_ == 0) fail(ErrorCode::EmptyData, "resampler: no observations");
    if (kind_ == ResamplerKind::MultiplierBootstrap) {
      data_ = center ? DenseMatrix(data.rowwise() - data.colwise().mean()) : data;
    } else {
      factor_ = psd_factor(sample_covariance(data, center));
      if (n_ < factor_.cols()) {
        fail(ErrorCode::DegreesOfFreedomTooSmall, "fewer observations than the covariance rank");
      }
    }
  }

  SymMatrix draw(Rng& rng) const {
    return kind_ == ResamplerKind::MultiplierBootstrap ? bootstrap_cov(data_, rng)
                                                       : wishart_cov(factor_, n_, rng);
  }

  ResamplerKind kind() const { return kind_; }
  Index sample_size() const { return n_; }

 private:
  ResamplerKind kind_;
  Index n_;
  DenseMatrix data_;
  DenseMatrix factor_;
};

}  // namespace eigtest
