#include <cmath>
#include <numbers>

#include "catch_amalgamated.hpp"

#include "support.hpp"

using namespace eigtest;
using namespace eigtest::testing;
using Catch::Matchers::WithinAbs;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::InvalidInput;
}

std::vector<double> to_vector(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

TEST_CASE("regime spectra") {
  Rng rng = derive_rng(90, 0);
  CHECK(to_vector(regime_eigenvalues(Regime::spiked(), 6, rng)) ==
        std::vector<double>{10, 6, 3, 1, 1, 1});
  CHECK(to_vector(regime_eigenvalues(Regime::decay(), 8, rng)) ==
        std::vector<double>{10, 9, 8, 7, 6, 1, 0.5, 0.25});

  const Vector fm = regime_eigenvalues(Regime::factor_model(), 10, rng);
  const std::vector<double> head{50, 40, 35, 30, 25, 20, 15, 10};
  for (Index k = 0; k < 8; ++k) CHECK(fm(k) == head[std::size_t(k)]);
  CHECK(fm(8) >= fm(9));
  for (Index k = 8; k < 10; ++k) {
    CHECK(fm(k) >= 0.5);
    CHECK(fm(k) <= 1.5);
  }

  CHECK(code_of([&] { regime_eigenvalues(Regime::factor_model(), 8, rng); }) ==
        ErrorCode::InvalidDimension);
  CHECK(code_of([&] { regime_eigenvalues(Regime::spiked(), 3, rng); }) ==
        ErrorCode::InvalidDimension);
  CHECK(code_of([&] { regime_eigenvalues(Regime::decay(), 5, rng); }) ==
        ErrorCode::InvalidDimension);
  CHECK(to_vector(regime_eigenvalues(Regime::with_eigenvalues({3, 2, 1}), 3, rng)) ==
        std::vector<double>{3, 2, 1});
  CHECK(code_of([&] { regime_eigenvalues(Regime::with_eigenvalues({1, 2}), 2, rng); }) ==
        ErrorCode::InvalidInput);
  CHECK(code_of([&] { regime_eigenvalues(Regime::with_eigenvalues({1, 2}), 3, rng); }) ==
        ErrorCode::InvalidDimension);
}

TEST_CASE("regime names parse back") {
  for (const Regime& r : {Regime::factor_model(), Regime::spiked(), Regime::decay()}) {
    CHECK(parse_regime(r.name()).kind == r.kind);
  }
  CHECK_THROWS_AS(parse_regime("flat"), Error);
  CHECK(parse_distribution("laplace") == Distribution::Laplace);
  CHECK_THROWS_AS(parse_distribution("cauchy"), Error);
}

TEST_CASE("sigma_phi") {
  const Vector mu = spiked_spectrum(5);
  CHECK(sigma_phi(mu, 1, 0.0).matrix() == DenseMatrix(mu.asDiagonal()));

  Vector two(2);
  two << 2.0, 1.0;
  const SymMatrix s = sigma_phi(two, 1, std::numbers::pi / 4);
  CHECK_THAT(s(0, 0), WithinAbs(1.5, 1e-14));
  CHECK_THAT(s(1, 1), WithinAbs(1.5, 1e-14));
  CHECK_THAT(s(0, 1), WithinAbs(0.5, 1e-14));

  CHECK(code_of([&] { sigma_phi(two, 2, 0.1); }) == ErrorCode::InvalidDimension);
}

TEST_CASE("sigma_phi preserves the spectrum and rotates the top eigenspace") {
  Rng rng = derive_rng(91, 0);
  std::uniform_real_distribution<double> angle(-1.5, 1.5);
  for (const Vector& mu : {spiked_spectrum(8), regime_eigenvalues(Regime::decay(), 8, rng)}) {
    for (Index m : {1, 2, 5}) {
      if (!(mu(m - 1) > mu(m))) continue;
      for (int rep = 0; rep < 10; ++rep) {
        const double phi = angle(rng);
        const SymMatrix s = sigma_phi(mu, m, phi);
        CHECK(max_abs_norm(sym_eigenvalues(s) - mu) <= 1e-9 * mu(0));
        if (m == 1) {
          const SymMatrix p = projector_for_selection(sym_eigen(s), IndexSelection::leading(1));
          const SymMatrix p0 = projector_for_selection(sym_eigen(sigma_phi(mu, m, 0.0)),
                                                       IndexSelection::leading(1));
          CHECK_THAT(spectral_norm(p - p0), WithinAbs(std::abs(std::sin(phi)), 1e-9));
        }
      }
    }
  }
}

TEST_CASE("sample_dataset moments") {
  Rng rng = derive_rng(92, 0);
  CHECK(sample_dataset(SymMatrix::zero(3), Distribution::Gaussian, 10, rng) ==
        DenseMatrix::Zero(10, 3));

  const DenseMatrix lap = sample_dataset(SymMatrix::identity(1), Distribution::Laplace, 100000, rng);
  const double mean = lap.mean();
  const double var = (lap.array() - mean).square().mean();
  const double m4 = (lap.array() - mean).pow(4).mean();
  CHECK_THAT(var, WithinAbs(1.0, 0.05));
  CHECK_THAT(m4, WithinAbs(6.0, 0.5));

  Vector diag(2);
  diag << 2.0, 1.0;
  const DenseMatrix g = sample_dataset(SymMatrix::diagonal(diag), Distribution::Gaussian, 100000, rng);
  const SymMatrix cov = sample_covariance(g);
  CHECK_THAT(cov(0, 0), WithinAbs(2.0, 0.05));
  CHECK_THAT(cov(1, 1), WithinAbs(1.0, 0.05));
  CHECK_THAT(cov(0, 1), WithinAbs(0.0, 0.05));

  const SymMatrix rot = sigma_phi(spiked_spectrum(4), 1, 0.4);
  const DenseMatrix l = sample_dataset(rot, Distribution::Laplace, 100000, rng);
  CHECK(max_abs_norm(sample_covariance(l).matrix() - rot.matrix()) < 0.3);

  Vector neg(2);
  neg << 1.0, -1.0;
  CHECK(code_of([&] { sample_dataset(SymMatrix::diagonal(neg), Distribution::Gaussian, 5, rng); }) ==
        ErrorCode::NotPSD);
}

TEST_CASE("method names") {
  CHECK(Method{Statistic::proj_norm(1, 2), ResamplerKind::WishartFB}.name() == "projnorm(1,2)");
  CHECK(Method{Statistic::spectral(), ResamplerKind::WishartFB}.name() == "spectral");
  CHECK(all_methods().size() == 6);
}

TEST_CASE("scenario validation") {
  ScenarioConfig c;
  CHECK_NOTHROW(c.validate());
  c.m = c.d;
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidDimension);
  c = ScenarioConfig{};
  c.angles.clear();
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidInput);
  c = ScenarioConfig{};
  c.methods = {{Statistic::proj_norm(2, 1), ResamplerKind::WishartFB}};
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidInput);
  c = ScenarioConfig{};
  c.m = 4;  // splits the unit eigenvalues of the spiked spectrum
  CHECK(code_of([&] { scenario_eigenvalues(c); }) == ErrorCode::InvalidInput);
  CHECK(ScenarioConfig{}.reps_at(0.0) == 1000);
  CHECK(ScenarioConfig{}.reps_at(0.1) == 100);
}

TEST_CASE("presets") {
  CHECK(scenario_preset("smoke").size() == 1);
  CHECK(scenario_preset("desk-two-sample").front().two_sample);
  const auto full = scenario_preset("full");
  CHECK(full.size() == 36);
  for (const auto& c : full) {
    CHECK_NOTHROW(c.validate());
    CHECK(c.draws == 2000);
  }
  CHECK_THROWS_AS(scenario_preset("huge"), Error);
}

TEST_CASE("power experiment rows") {
  ScenarioConfig c = scenario_preset("smoke").front();
  c.workers = 1;
  const auto rows = run_power_experiment(c);
  REQUIRE(rows.size() == c.angles.size() * c.methods.size());
  for (const PowerRow& r : rows) {
    CHECK(r.rejection_rate >= 0.0);
    CHECK(r.rejection_rate <= 1.0);
    CHECK(r.mean_p >= 0.0);
    CHECK(r.mean_p <= 1.0);
    CHECK(r.reps == c.reps_at(r.angle));
  }
  // The large angle is detected in most repetitions at n = 200.
  CHECK(rows.back().rejection_rate >= 0.75);

  ScenarioConfig many = c;
  many.workers = 4;
  const auto again = run_power_experiment(many);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].rejection_rate == again[i].rejection_rate);
    CHECK(rows[i].mean_p == again[i].mean_p);
  }
}

TEST_CASE("two-sample power experiment") {
  ScenarioConfig c = scenario_preset("smoke").front();
  c.two_sample = true;
  c.n = 100;
  c.methods = {{Statistic::spectral(), ResamplerKind::WishartFB}};
  const auto rows = run_power_experiment(c);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].rejection_rate >= rows[0].rejection_rate);
}
