#include <filesystem>
#include <fstream>
#include <sstream>

#include "catch_amalgamated.hpp"

#include "support.hpp"

using namespace eigtest;
using namespace eigtest::testing;
using Catch::Matchers::ContainsSubstring;

namespace {

DenseMatrix parse(const std::string& text, MatrixReadOptions opts = {}) {
  std::istringstream in(text);
  return parse_matrix(in, opts, "mem");
}

std::string parse_error(const std::string& text) {
  try {
    parse(text);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    return e.what();
  }
  FAIL("no error thrown");
  return {};
}

}  // namespace

TEST_CASE("parse_matrix accepts commas, whitespace and blank lines") {
  const DenseMatrix m = parse("1,2,3\n\n4 5\t6\r\n  +7 , -8e-1 ,9\n");
  REQUIRE(m.rows() == 3);
  REQUIRE(m.cols() == 3);
  CHECK(m(1, 2) == 6.0);
  CHECK(m(2, 0) == 7.0);
  CHECK(m(2, 1) == -0.8);
}

TEST_CASE("parse_matrix header and transpose") {
  const DenseMatrix m = parse("a,b\n1,2\n3,4\n", {true, false});
  CHECK(m.rows() == 2);
  const DenseMatrix t = parse("1,2,3\n4,5,6\n", {false, true});
  CHECK(t.rows() == 3);
  CHECK(t.cols() == 2);
  CHECK(t(2, 1) == 6.0);
}

TEST_CASE("parse_matrix errors name the line") {
  CHECK_THAT(parse_error("1,2\n3,x\n"), ContainsSubstring("mem:2") && ContainsSubstring("'x'"));
  CHECK_THAT(parse_error("1,2\n\n3\n"), ContainsSubstring("mem:3") &&
                                            ContainsSubstring("expected 2 columns, found 1"));
  CHECK_THAT(parse_error("1,nan\n"), ContainsSubstring("mem:1"));
  CHECK_THAT(parse_error("\n\n"), ContainsSubstring("no data rows"));
  CHECK_THROWS_AS(read_matrix("/nonexistent/file.csv"), Error);
}

TEST_CASE("format_matrix round-trips exactly") {
  Rng rng = derive_rng(100, 0);
  const DenseMatrix m = gaussian_matrix(4, 3, rng);
  CHECK(parse(format_matrix(m)) == m);
}

TEST_CASE("projector_from_matrix") {
  DenseMatrix basis = DenseMatrix::Zero(3, 1);
  basis(0, 0) = 1.0;
  const SymMatrix p = projector_from_matrix(basis);
  CHECK(p.matrix() == DenseMatrix(Vector{{1.0, 0.0, 0.0}}.asDiagonal()));
  CHECK(projector_from_matrix(p.matrix()).matrix() == p.matrix());
  try {
    projector_from_matrix(DenseMatrix::Ones(3, 1));
    FAIL("expected NotAProjector");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotAProjector);
  }
  CHECK_THROWS_AS(projector_from_matrix(DenseMatrix::Ones(2, 3)), Error);
}

TEST_CASE("write_file_atomic replaces the target") {
  const auto dir = std::filesystem::temp_directory_path() / "eigtest_io_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "out.txt").string();
  write_file_atomic(path, "first\n");
  write_file_atomic(path, "second\n");
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "second");
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& entry : std::filesystem::directory_iterator(dir)) ++files;
  CHECK(files == 1);
  CHECK_THROWS_AS(write_file_atomic((dir / "missing" / "x.txt").string(), "x"), Error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("test report json carries the documented keys") {
  TestReport r;
  r.test = "one_sample";
  r.statistic_kind = Statistic::proj_norm(1, 2);
  const Json j = to_json(r);
  for (const char* key : {"statistic", "critical_value", "p_value", "reject", "alpha",
                          "statistic_kind", "s1", "s2", "resampler", "draws", "seed",
                          "diagnostics"}) {
    CHECK(j.contains(key));
  }
  CHECK(j["s2"] == 2);
  r.statistic_kind = Statistic::spectral();
  CHECK(to_json(r)["s1"].is_null());
  const std::string csv = flatten_csv(to_json(r));
  CHECK_THAT(csv, ContainsSubstring("test,statistic,critical_value"));
  CHECK_THAT(csv, ContainsSubstring("draw_summary.count"));
}

TEST_CASE("scenario config json round-trips") {
  ScenarioConfig c;
  c.name = "x";
  c.regime = Regime::with_eigenvalues({4, 3, 2, 1});
  c.dist = Distribution::Laplace;
  c.d = 4;
  c.m = 2;
  c.angles = {0.0, 0.25};
  c.methods = all_methods(2, 1);
  c.two_sample = true;
  c.seed = 99;
  const ScenarioConfig back = scenario_from_json(to_json(c));
  CHECK(to_json(back).dump() == to_json(c).dump());

  const ScenarioConfig defaults = scenario_from_json(Json::parse(R"({"regime": "fm", "d": 12})"));
  CHECK(defaults.m == 8);
  CHECK(defaults.angles == Regime::factor_model().default_angles());
  CHECK_THROWS_AS(scenario_from_json(Json::parse(R"({"n": "many"})")), Error);
  CHECK_THROWS_AS(
      scenario_from_json(Json::parse(R"({"methods": [{"statistic": "l1", "resampler": "wishart"}]})")),
      Error);
}

TEST_CASE("power csv schema") {
  PowerRow row;
  row.scenario = "s";
  row.method = "projnorm(1,1)";
  const std::string csv = power_rows_csv({row});
  std::istringstream in(csv);
  std::string header, line;
  std::getline(in, header);
  std::getline(in, line);
  CHECK(header == "scenario,regime,dist,n,d,m,angle,method,resampler,reps,rejection_rate,mean_p,seed");
  CHECK_THAT(line, ContainsSubstring("\"projnorm(1,1)\""));
}
