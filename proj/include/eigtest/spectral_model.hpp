#pragma once

// Eigenvalue grouping, spectral projectors and their orthonormal frames, the
// first-order perturbation term of a spectral projector, and the
// gap-weighted diagnostics (relative rank, effective dimensions, kappa).

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "eigtest/matrix_core.hpp"

namespace eigtest {

inline constexpr double kDefaultGroupTolerance = 1e-9;

/// Distinct eigenvalues mu (strictly descending) with multiplicities; group r
/// owns eigenvector columns [start[r], start[r] + mult[r]).
struct SpectralGroups {
  std::vector<double> mu;
  std::vector<Index> mult;
  std::vector<Index> start;

  Index count() const { return Index(mu.size()); }
  Index dim() const { return start.empty() ? 0 : start.back() + mult.back(); }
};

/// Contiguous range of eigenvalue ranks, 1-based and inclusive.
struct IndexSelection {
  Index first = 1;
  Index last = 1;

  Index size() const { return last - first + 1; }

  static IndexSelection range(Index first, Index last) {
    if (first < 1 || last < first) {
      fail(ErrorCode::InvalidSelection,
           "invalid rank range " + std::to_string(first) + ".." + std::to_string(last));
    }
    return {first, last};
  }

  static IndexSelection leading(Index m) { return range(1, m); }

  static IndexSelection from_ranks(std::vector<Index> ranks) {
    if (ranks.empty()) fail(ErrorCode::InvalidSelection, "empty rank set");
    std::sort(ranks.begin(), ranks.end());
    for (std::size_t i = 1; i < ranks.size(); ++i) {
      if (ranks[i] != ranks[i - 1] + 1) {
        fail(ErrorCode::InvalidSelection, "rank set is not contiguous");
      }
    }
    return range(ranks.front(), ranks.back());
  }

  void validate(Index d) const {
    if (first < 1 || last < first || last > d) {
      fail(ErrorCode::InvalidSelection, "rank range " + std::to_string(first) + ".." +
                                            std::to_string(last) + " invalid for d=" +
                                            std::to_string(d));
    }
  }
};

/// Consecutive groups [first, last], 1-based and inclusive.
struct GroupRange {
  Index first = 1;
  Index last = 1;

  bool contains(Index r) const { return r >= first && r <= last; }
};

/// A rank-m projector with orthonormal bases of its range (gamma1, d x m) and
/// of the complement (gamma2, d x (d - m)).
struct ProjectorFrame {
  SymMatrix projector;
  DenseMatrix gamma1;
  DenseMatrix gamma2;

  Index rank() const { return gamma1.cols(); }
  Index dim() const { return projector.dim(); }
};

inline SpectralGroups group_eigenvalues(const Vector& values,
                                        double rel_tol = kDefaultGroupTolerance) {
  SpectralGroups g;
  const Index d = values.size();
  if (d == 0) return g;
  if (!values.allFinite()) fail(ErrorCode::InvalidInput, "group_eigenvalues: non-finite value");
  for (Index i = 0; i + 1 < d; ++i) {
    if (values(i) < values(i + 1)) {
      fail(ErrorCode::InvalidInput, "group_eigenvalues: values not sorted descending");
    }
  }
  const double merge_gap = rel_tol * std::max(1.0, std::abs(values(0)));
  Index begin = 0;
  for (Index i = 0; i < d; ++i) {
    const bool last = i + 1 == d;
    if (last || values(i) - values(i + 1) > merge_gap) {
      const Index len = i - begin + 1;
      g.mu.push_back(values.segment(begin, len).mean());
      g.mult.push_back(len);
      g.start.push_back(begin);
      begin = i + 1;
    }
  }
  return g;
}

/// Ranks covered by a group range.
inline IndexSelection ranks_of(const SpectralGroups& g, GroupRange j) {
  if (j.first < 1 || j.last < j.first || j.last > g.count()) {
    fail(ErrorCode::InvalidSelection, "group range " + std::to_string(j.first) + ".." +
                                          std::to_string(j.last) + " invalid for q=" +
                                          std::to_string(g.count()));
  }
  const Index first = g.start[j.first - 1] + 1;
  const Index last = g.start[j.last - 1] + g.mult[j.last - 1];
  return {first, last};
}

/// Groups exactly covering a rank range; fails when the range splits a group.
inline GroupRange groups_of(const SpectralGroups& g, IndexSelection sel) {
  sel.validate(g.dim());
  GroupRange j{0, 0};
  for (Index r = 0; r < g.count(); ++r) {
    if (g.start[r] + 1 == sel.first) j.first = r + 1;
    if (g.start[r] + g.mult[r] == sel.last) j.last = r + 1;
  }
  if (j.first == 0 || j.last == 0) {
    fail(ErrorCode::InvalidSelection, "rank range " + std::to_string(sel.first) + ".." +
                                          std::to_string(sel.last) +
                                          " splits a group of equal eigenvalues");
  }
  return j;
}

inline SymMatrix projector_for_selection(const EigenSystem& eig, IndexSelection sel) {
  sel.validate(eig.dim());
  const auto basis = eig.vectors.middleCols(sel.first - 1, sel.size());
  return SymMatrix::symmetrized(basis * basis.transpose());
}

/// Splits the eigenvectors of P by eigenvalue (near 1 vs near 0).
inline ProjectorFrame frame_from_projector(const SymMatrix& p, Index m) {
  const Index d = p.dim();
  if (m < 0 || m > d) {
    fail(ErrorCode::NotAProjector, "rank " + std::to_string(m) + " impossible in dimension " +
                                       std::to_string(d));
  }
  const EigenSystem eig = sym_eigen(p);
  Index ones = 0;
  for (Index k = 0; k < d; ++k) {
    const double v = eig.values(k);
    if (std::abs(v - 1.0) <= 0.1) {
      ++ones;
    } else if (std::abs(v) > 0.1) {
      fail(ErrorCode::NotAProjector,
           "eigenvalue " + std::to_string(v) + " is not close to 0 or 1");
    }
  }
  if (ones != m) {
    fail(ErrorCode::NotAProjector, "projector has rank " + std::to_string(ones) +
                                       ", expected " + std::to_string(m));
  }
  return ProjectorFrame{p, eig.vectors.leftCols(m), eig.vectors.rightCols(d - m)};
}

/// Numerical rank of a projector, read off its trace.
inline Index projector_rank(const SymMatrix& p) {
  return Index(std::llround(p.matrix().trace()));
}

/// First-order term of P_J(Sigma + E) - P_J(Sigma):
///   sum_{r in J} sum_{s not in J} (P_r E P_s + P_s E P_r) / (mu_r - mu_s).
/// Evaluated in the eigenbasis, where it is the off-diagonal block of V^T E V
/// divided entrywise by the eigenvalue gaps.
inline SymMatrix linear_term(const SpectralGroups& groups, const EigenSystem& eig, GroupRange j,
                             const SymMatrix& e) {
  const Index q = groups.count();
  if (j.first < 1 || j.last < j.first || j.last > q) {
    fail(ErrorCode::InvalidSelection, "linear_term: invalid group range");
  }
  if (j.first == 1 && j.last == q) {
    fail(ErrorCode::InvalidSelection, "linear_term: selection has no complement");
  }
  const Index d = eig.dim();
  if (e.dim() != d || groups.dim() != d) {
    fail(ErrorCode::InvalidInput, "linear_term: dimension mismatch");
  }
  std::vector<Index> group_of(d);
  for (Index r = 0; r < q; ++r) {
    for (Index k = 0; k < groups.mult[r]; ++k) group_of[groups.start[r] + k] = r;
  }
  const DenseMatrix rotated = eig.vectors.transpose() * e.matrix() * eig.vectors;
  DenseMatrix coeff = DenseMatrix::Zero(d, d);
  for (Index a = 0; a < d; ++a) {
    if (!j.contains(group_of[a] + 1)) continue;
    for (Index b = 0; b < d; ++b) {
      if (j.contains(group_of[b] + 1)) continue;
      const double gap = groups.mu[group_of[a]] - groups.mu[group_of[b]];
      coeff(a, b) = rotated(a, b) / gap;
      coeff(b, a) = rotated(b, a) / gap;
    }
  }
  return SymMatrix::symmetrized(eig.vectors * coeff * eig.vectors.transpose());
}

namespace detail {

inline void require_split(const SpectralGroups& g, GroupRange j) {
  if (g.count() < 2) fail(ErrorCode::UndefinedGap, "spectrum has a single distinct eigenvalue");
  if (j.first < 1 || j.last < j.first || j.last > g.count()) {
    fail(ErrorCode::InvalidSelection, "invalid group range");
  }
  if (j.first == 1 && j.last == g.count()) {
    fail(ErrorCode::InvalidSelection, "selection has no complement");
  }
}

}  // namespace detail

/// relr_r with the boundary conventions mu_0 = +inf and mu_{q+1} = 0.
/// `r` is a 1-based group index.
inline double relative_rank(const SpectralGroups& g, Index r) {
  const Index q = g.count();
  if (q < 2) fail(ErrorCode::UndefinedGap, "relative rank needs at least two distinct eigenvalues");
  if (r < 1 || r > q) fail(ErrorCode::InvalidSelection, "group index out of range");
  const Index i = r - 1;
  const double mu_r = g.mu[i];
  double sum = 0.0;
  for (Index s = 0; s < q; ++s) {
    if (s == i) continue;
    sum += double(g.mult[s]) * g.mu[s] / std::abs(mu_r - g.mu[s]);
  }
  const double gap_above = i == 0 ? std::numeric_limits<double>::infinity() : g.mu[i - 1] - mu_r;
  const double gap_below = i == q - 1 ? mu_r : mu_r - g.mu[i + 1];
  const double gap = std::min(gap_above, gap_below);
  if (!(gap > 0.0)) fail(ErrorCode::UndefinedGap, "zero spectral gap at group " + std::to_string(r));
  return sum + double(g.mult[i]) * mu_r / gap;
}

/// Effective dimension r_J.
inline double eff_dim_rJ(const SpectralGroups& g, GroupRange j) {
  detail::require_split(g, j);
  double total = 0.0;
  for (Index r = j.first; r <= j.last; ++r) {
    const Index i = r - 1;
    double inner = 0.0;
    for (Index s = 0; s < g.count(); ++s) {
      if (s == i) continue;
      const double gap = g.mu[i] - g.mu[s];
      inner += double(g.mult[i]) * g.mu[i] * double(g.mult[s]) * g.mu[s] / (gap * gap);
    }
    total += relative_rank(g, r) * std::sqrt(inner);
  }
  return std::cbrt(total * total);
}

/// r~_J: sum over r in J, s outside J of m_r mu_r m_s mu_s / (mu_r - mu_s)^2.
inline double eff_dim_rre(const SpectralGroups& g, GroupRange j) {
  detail::require_split(g, j);
  double total = 0.0;
  for (Index r = j.first - 1; r < j.last; ++r) {
    for (Index s = 0; s < g.count(); ++s) {
      if (j.contains(s + 1)) continue;
      const double gap = g.mu[r] - g.mu[s];
      total += double(g.mult[r]) * g.mu[r] * double(g.mult[s]) * g.mu[s] / (gap * gap);
    }
  }
  return total;
}

struct KappaStats {
  double under = 0.0;
  double over = 0.0;
  double ratio = 0.0;
};

/// Extremes of sqrt(mu_r mu_s) / |mu_r - mu_s| across the J / J^c split.
inline KappaStats kappa_stats(const SpectralGroups& g, GroupRange j) {
  detail::require_split(g, j);
  KappaStats k{std::numeric_limits<double>::infinity(), 0.0, 0.0};
  for (Index r = j.first - 1; r < j.last; ++r) {
    for (Index s = 0; s < g.count(); ++s) {
      if (j.contains(s + 1)) continue;
      if (g.mu[r] <= 0.0 || g.mu[s] <= 0.0) {
        fail(ErrorCode::InvalidInput, "kappa requires positive eigenvalues");
      }
      const double v = std::sqrt(g.mu[r] * g.mu[s]) / std::abs(g.mu[r] - g.mu[s]);
      k.under = std::min(k.under, v);
      k.over = std::max(k.over, v);
    }
  }
  k.ratio = k.over / k.under;
  return k;
}

/// All diagnostics for one split, as reported by the CLI.
struct Diagnostics {
  std::vector<double> relative_ranks;  // one per group in J
  double r_J = 0.0;
  double r_tilde_J = 0.0;
  KappaStats kappa;
};

inline Diagnostics compute_diagnostics(const SpectralGroups& g, GroupRange j) {
  Diagnostics out;
  detail::require_split(g, j);
  for (Index r = j.first; r <= j.last; ++r) out.relative_ranks.push_back(relative_rank(g, r));
  out.r_J = eff_dim_rJ(g, j);
  out.r_tilde_J = eff_dim_rre(g, j);
  out.kappa = kappa_stats(g, j);
  return out;
}

}  // namespace eigtest
