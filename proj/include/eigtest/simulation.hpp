#pragma once

// Monte-Carlo harness for type-I error and power: eigenvalue regimes, the
// rotated covariance Sigma(phi), Gaussian / Laplace data, and repeated tests
// over an angle grid.

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "eigtest/hypothesis_tests.hpp"
#include "eigtest/matrix_core.hpp"
#include "eigtest/parallel.hpp"
#include "eigtest/resampling.hpp"

namespace eigtest {

struct Regime {
  enum class Kind { FactorModel, Spiked, Decay, Custom };

  Kind kind = Kind::Spiked;
  std::vector<double> custom;  // Custom only, descending and positive

  static Regime factor_model() { return {Kind::FactorModel, {}}; }
  static Regime spiked() { return {Kind::Spiked, {}}; }
  static Regime decay() { return {Kind::Decay, {}}; }
  static Regime with_eigenvalues(std::vector<double> values) {
    return {Kind::Custom, std::move(values)};
  }

  std::string name() const {
    switch (kind) {
      case Kind::FactorModel: return "fm";
      case Kind::Spiked: return "spiked";
      case Kind::Decay: return "decay";
      case Kind::Custom: return "custom";
    }
    return "unknown";
  }

  /// Size of the tested leading eigenspace in the standard experiments.
  Index default_m() const {
    switch (kind) {
      case Kind::FactorModel: return 8;
      case Kind::Spiked: return 1;
      case Kind::Decay: return 5;
      case Kind::Custom: return 1;
    }
    return 1;
  }

  /// Angle grid used when a scenario does not specify one.
  std::vector<double> default_angles() const {
    switch (kind) {
      case Kind::FactorModel: return {0.0, 0.005, 0.01, 0.02, 0.05};
      case Kind::Decay: return {0.0, 0.02, 0.05, 0.1, 0.2};
      default: return {0.0, 0.05, 0.1, 0.2, 0.4};
    }
  }
};

inline Regime parse_regime(std::string_view name) {
  if (name == "fm") return Regime::factor_model();
  if (name == "spiked") return Regime::spiked();
  if (name == "decay") return Regime::decay();
  fail(ErrorCode::UsageError, "unknown regime '" + std::string(name) + "'");
}

/// Population spectrum of a regime in dimension d. Only the factor model
/// consumes randomness (its d - 8 tail eigenvalues, uniform on [0.5, 1.5]).
inline Vector regime_eigenvalues(const Regime& regime, Index d, Rng& rng) {
  Vector mu(d);
  switch (regime.kind) {
    case Regime::Kind::FactorModel: {
      if (d < 9) fail(ErrorCode::InvalidDimension, "factor-model regime needs d >= 9");
      const double head[] = {5.0, 4.0, 3.5, 3.0, 2.5, 2.0, 1.5, 1.0};
      for (Index k = 0; k < 8; ++k) mu(k) = head[k] * double(d);
      std::uniform_real_distribution<double> tail(0.5, 1.5);
      for (Index k = 8; k < d; ++k) mu(k) = tail(rng);
      std::sort(mu.data() + 8, mu.data() + d, std::greater<>());
      break;
    }
    case Regime::Kind::Spiked: {
      if (d < 4) fail(ErrorCode::InvalidDimension, "spiked regime needs d >= 4");
      mu.setOnes();
      mu(0) = 10.0;
      mu(1) = 6.0;
      mu(2) = 3.0;
      break;
    }
    case Regime::Kind::Decay: {
      if (d < 6) fail(ErrorCode::InvalidDimension, "decay regime needs d >= 6");
      for (Index k = 0; k < 5; ++k) mu(k) = 10.0 - double(k);
      // 1-based k >= 6 gets 2^{-(k-6)}.
      for (Index k = 5; k < d; ++k) mu(k) = std::ldexp(1.0, -int(k - 5));
      break;
    }
    case Regime::Kind::Custom: {
      if (Index(regime.custom.size()) != d) {
        fail(ErrorCode::InvalidDimension, "custom spectrum has " +
                                              std::to_string(regime.custom.size()) +
                                              " values, d=" + std::to_string(d));
      }
      for (Index k = 0; k < d; ++k) mu(k) = regime.custom[std::size_t(k)];
      for (Index k = 0; k < d; ++k) {
        if (!(mu(k) > 0.0) || (k > 0 && mu(k) > mu(k - 1))) {
          fail(ErrorCode::InvalidInput, "custom spectrum must be positive and descending");
        }
      }
      break;
    }
  }
  return mu;
}

/// diag(mu) with the plane of coordinates 1 and m+1 rotated by phi.
inline SymMatrix sigma_phi(const Vector& mu, Index m, double phi) {
  const Index d = mu.size();
  if (m < 1 || m + 1 > d) {
    fail(ErrorCode::InvalidDimension, "sigma_phi needs 1 <= m <= d-1, got m=" +
                                          std::to_string(m) + ", d=" + std::to_string(d));
  }
  DenseMatrix s = mu.asDiagonal();
  const double c = std::cos(phi), sn = std::sin(phi);
  const double top = mu(0), low = mu(m);
  s(0, 0) = top * c * c + low * sn * sn;
  s(m, m) = top * sn * sn + low * c * c;
  s(0, m) = s(m, 0) = (top - low) * c * sn;
  return SymMatrix::symmetrized(s);
}

enum class Distribution { Gaussian, Laplace };

inline std::string_view to_string(Distribution dist) {
  return dist == Distribution::Gaussian ? "gaussian" : "laplace";
}

inline Distribution parse_distribution(std::string_view name) {
  if (name == "gaussian") return Distribution::Gaussian;
  if (name == "laplace") return Distribution::Laplace;
  fail(ErrorCode::UsageError, "unknown distribution '" + std::string(name) + "'");
}

/// n rows X_i = Sigma^{1/2} Z_i with Z_i iid standard normal, or iid
/// Laplace(0, 1/sqrt 2) (unit variance) components.
inline DenseMatrix sample_dataset(const SymMatrix& sigma, Distribution dist, Index n, Rng& rng) {
  const SymMatrix root = psd_sqrt(sigma);
  const Index d = sigma.dim();
  DenseMatrix z(n, d);
  if (dist == Distribution::Gaussian) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < d; ++j) z(i, j) = normal(rng);
    }
  } else {
    std::exponential_distribution<double> expo(1.0);
    const double scale = 1.0 / std::numbers::sqrt2;
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < d; ++j) {
        const double e1 = expo(rng);
        const double e2 = expo(rng);
        z(i, j) = scale * (e1 - e2);
      }
    }
  }
  return z * root.matrix();
}

/// A statistic paired with a resampler.
struct Method {
  Statistic statistic;
  ResamplerKind resampler = ResamplerKind::WishartFB;

  std::string name() const {
    if (statistic.kind == Statistic::Kind::ProjNorm) {
      return "projnorm(" + std::to_string(statistic.s1) + "," + std::to_string(statistic.s2) + ")";
    }
    return statistic.name();
  }
};

struct ScenarioConfig {
  std::string name = "scenario";
  Regime regime = Regime::spiked();
  Distribution dist = Distribution::Gaussian;
  Index n = 1000;  // per sample; two-sample draws 2n rows for each of a and b
  Index d = 10;
  Index m = 1;
  std::vector<double> angles = {0.0, 0.05, 0.1, 0.2, 0.4};
  Index reps = 100;
  Index null_reps = 1000;  // repetitions at phi = 0
  bool two_sample = false;
  std::vector<Method> methods = {
      {Statistic::proj_norm(1, 1), ResamplerKind::MultiplierBootstrap},
      {Statistic::proj_norm(1, 1), ResamplerKind::WishartFB},
  };
  double alpha = 0.05;
  Index draws = 2000;
  bool center = false;
  std::uint64_t seed = 1;
  unsigned workers = 0;

  void validate() const {
    if (n < 2) fail(ErrorCode::InvalidInput, "scenario needs n >= 2");
    if (m < 1 || m >= d) fail(ErrorCode::InvalidDimension, "scenario needs 1 <= m <= d-1");
    if (angles.empty()) fail(ErrorCode::InvalidInput, "scenario has no angles");
    if (reps < 1 || null_reps < 1) fail(ErrorCode::InvalidInput, "scenario needs reps >= 1");
    if (methods.empty()) fail(ErrorCode::InvalidInput, "scenario has no methods");
    if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorCode::InvalidInput, "alpha must lie in (0, 1)");
    if (draws < 2) fail(ErrorCode::InvalidInput, "need at least 2 resampling draws");
    for (const Method& method : methods) method.statistic.validate(m, d);
  }

  Index reps_at(double angle) const { return angle == 0.0 ? null_reps : reps; }
};

struct PowerRow {
  std::string scenario;
  std::string regime;
  std::string dist;
  Index n = 0;
  Index d = 0;
  Index m = 0;
  double angle = 0.0;
  std::string method;
  std::string resampler;
  Index reps = 0;
  double rejection_rate = 0.0;
  double mean_p = 0.0;
  std::uint64_t seed = 0;
};

/// Population spectrum of a scenario; the factor-model tail is drawn once
/// from the scenario seed and shared by every angle and repetition.
inline Vector scenario_eigenvalues(const ScenarioConfig& cfg) {
  Rng rng = derive_rng(cfg.seed, 0);
  const Vector mu = regime_eigenvalues(cfg.regime, cfg.d, rng);
  if (!(mu(cfg.m - 1) > mu(cfg.m))) {
    fail(ErrorCode::InvalidInput, "m=" + std::to_string(cfg.m) +
                                      " splits a group of equal eigenvalues in this regime");
  }
  return mu;
}

/// One row per (angle, method). Every repetition is keyed by
/// (seed, angle index, repetition), so results do not depend on the worker
/// count.
inline std::vector<PowerRow> run_power_experiment(const ScenarioConfig& cfg) {
  cfg.validate();
  const Vector mu = scenario_eigenvalues(cfg);
  Vector head = Vector::Zero(cfg.d);
  head.head(cfg.m).setOnes();
  const SymMatrix p0 = SymMatrix::diagonal(head);
  const IndexSelection sel = IndexSelection::leading(cfg.m);

  struct Job {
    std::size_t angle;
    Index rep;
  };
  std::vector<Job> jobs;
  for (std::size_t a = 0; a < cfg.angles.size(); ++a) {
    for (Index r = 0; r < cfg.reps_at(cfg.angles[a]); ++r) jobs.push_back({a, r});
  }
  const std::size_t n_methods = cfg.methods.size();
  std::vector<double> p_values(jobs.size() * n_methods);
  std::vector<char> rejected(jobs.size() * n_methods);

  parallel_for(jobs.size(), cfg.workers, [&](std::size_t j) {
    const Job& job = jobs[j];
    const double phi = cfg.angles[job.angle];
    const std::uint64_t rep_seed =
        derive_seed(derive_seed(cfg.seed, job.angle + 1), std::uint64_t(job.rep));
    Rng rng = derive_rng(rep_seed, 0);
    DenseMatrix xa, xb;
    if (cfg.two_sample) {
      xa = sample_dataset(sigma_phi(mu, cfg.m, phi), cfg.dist, 2 * cfg.n, rng);
      xb = sample_dataset(sigma_phi(mu, cfg.m, -phi), cfg.dist, 2 * cfg.n, rng);
    } else {
      xa = sample_dataset(sigma_phi(mu, cfg.m, phi), cfg.dist, cfg.n, rng);
    }
    for (std::size_t k = 0; k < n_methods; ++k) {
      TestConfig test;
      test.alpha = cfg.alpha;
      test.statistic = cfg.methods[k].statistic;
      test.plan = {cfg.draws, derive_seed(rep_seed, k + 1), cfg.methods[k].resampler};
      test.center = cfg.center;
      test.workers = 1;
      const TestReport report = cfg.two_sample ? two_sample_test(xa, xb, sel, sel, test)
                                               : one_sample_test(xa, p0, sel, test);
      p_values[j * n_methods + k] = report.p_value;
      rejected[j * n_methods + k] = report.reject ? 1 : 0;
    }
  });

  std::vector<PowerRow> rows;
  std::size_t offset = 0;
  for (std::size_t a = 0; a < cfg.angles.size(); ++a) {
    const Index reps = cfg.reps_at(cfg.angles[a]);
    for (std::size_t k = 0; k < n_methods; ++k) {
      double rejects = 0.0, p_sum = 0.0;
      for (Index r = 0; r < reps; ++r) {
        const std::size_t j = offset + std::size_t(r);
        rejects += rejected[j * n_methods + k];
        p_sum += p_values[j * n_methods + k];
      }
      PowerRow row;
      row.scenario = cfg.name;
      row.regime = cfg.regime.name();
      row.dist = std::string(to_string(cfg.dist));
      row.n = cfg.n;
      row.d = cfg.d;
      row.m = cfg.m;
      row.angle = cfg.angles[a];
      row.method = cfg.methods[k].name();
      row.resampler = std::string(to_string(cfg.methods[k].resampler));
      row.reps = reps;
      row.rejection_rate = rejects / double(reps);
      row.mean_p = p_sum / double(reps);
      row.seed = cfg.seed;
      rows.push_back(std::move(row));
    }
    offset += std::size_t(reps);
  }
  return rows;
}

/// All six statistic / resampler combinations used in the comparisons.
inline std::vector<Method> all_methods(Index s1 = 1, Index s2 = 1) {
  std::vector<Method> out;
  for (const Statistic& stat :
       {Statistic::proj_norm(s1, s2), Statistic::spectral(), Statistic::frobenius()}) {
    out.push_back({stat, ResamplerKind::MultiplierBootstrap});
    out.push_back({stat, ResamplerKind::WishartFB});
  }
  return out;
}

/// Named scenario sets. "desk" and "desk-two-sample" are laptop-sized;
/// "full" is the complete grid (3 regimes x 2 distributions x
/// n in {500, 1500, 5000} x d in {50, 150}, N = 2000, 100 / 1000 reps);
/// "smoke" is a seconds-long sanity run.
inline std::vector<ScenarioConfig> scenario_preset(std::string_view name) {
  std::vector<ScenarioConfig> out;
  if (name == "smoke") {
    ScenarioConfig c;
    c.name = "smoke";
    c.n = 200;
    c.d = 6;
    c.angles = {0.0, 0.4};
    c.reps = 8;
    c.null_reps = 8;
    c.draws = 100;
    out.push_back(c);
  } else if (name == "desk" || name == "desk-two-sample") {
    ScenarioConfig c;
    c.name = std::string(name);
    c.two_sample = name == "desk-two-sample";
    c.n = 1000;
    c.d = 10;
    c.reps = 100;
    c.null_reps = 100;
    c.draws = 500;
    out.push_back(c);
  } else if (name == "full") {
    for (const Regime& regime : {Regime::factor_model(), Regime::spiked(), Regime::decay()}) {
      for (Distribution dist : {Distribution::Gaussian, Distribution::Laplace}) {
        for (Index n : {500, 1500, 5000}) {
          for (Index d : {50, 150}) {
            ScenarioConfig c;
            c.name = "full-" + regime.name() + "-" + std::string(to_string(dist)) + "-n" +
                     std::to_string(n) + "-d" + std::to_string(d);
            c.regime = regime;
            c.dist = dist;
            c.n = n;
            c.d = d;
            c.m = regime.default_m();
            c.angles = regime.default_angles();
            c.reps = 100;
            c.null_reps = 1000;
            c.draws = 2000;
            c.methods = all_methods();
            out.push_back(c);
          }
        }
      }
    }
  } else {
    fail(ErrorCode::UsageError, "unknown preset '" + std::string(name) + "'");
  }
  return out;
}

}  // namespace eigtest
