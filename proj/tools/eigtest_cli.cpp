// eigtest: command-line front end for the eigenspace tests.
//
//   eigtest test1 DATA PROJECTOR [flags]     one-sample test
//   eigtest test2 DATA_A DATA_B [flags]      two-sample test
//   eigtest cs DATA [CANDIDATE] [flags]      confidence set (+ membership)
//   eigtest simulate [CONFIG] [flags]        Monte-Carlo power experiment
//   eigtest diag SPECTRUM [flags]            spectral diagnostics
//
// Exit status: 0 ran, 1 usage or input error, 2 numerical failure.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "eigtest/eigtest.hpp"

namespace {

using namespace eigtest;

struct Flags {
  double alpha = 0.05;
  Index s1 = 1;
  Index s2 = 1;
  std::string resampler = "wishart";
  Index draws = 2000;
  std::uint64_t seed = 0;
  std::vector<std::string> indices;
  Index m = 0;
  std::string statistic = "projnorm";
  bool center = false;
  bool transpose = false;
  bool header = false;
  std::string output;
  std::string format;  // defaults: csv for simulate, json otherwise
  std::string preset;
  bool full = false;
};

IndexSelection parse_indices(const std::string& text) {
  const auto dots = text.find("..");
  try {
    std::size_t used = 0;
    if (dots == std::string::npos) {
      const long v = std::stol(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return IndexSelection::range(v, v);
    }
    const std::string lo = text.substr(0, dots), hi = text.substr(dots + 2);
    const long a = std::stol(lo, &used);
    if (used != lo.size()) throw std::invalid_argument(text);
    const long b = std::stol(hi, &used);
    if (used != hi.size()) throw std::invalid_argument(text);
    return IndexSelection::range(a, b);
  } catch (const std::logic_error&) {
    fail(ErrorCode::UsageError, "cannot parse --indices '" + text + "' (expected a..b)");
  }
}

TestConfig make_config(const Flags& f) {
  TestConfig cfg;
  cfg.alpha = f.alpha;
  cfg.statistic.kind = parse_statistic_kind(f.statistic);
  cfg.statistic.s1 = f.s1;
  cfg.statistic.s2 = f.s2;
  cfg.plan = {f.draws, f.seed, parse_resampler(f.resampler)};
  cfg.center = f.center;
  return cfg;
}

MatrixReadOptions read_options(const Flags& f) { return {f.header, f.transpose}; }

// Explicit --indices wins, then --m, then the fallback.
IndexSelection selection(const Flags& f, std::size_t which, std::optional<Index> fallback_m) {
  if (!f.indices.empty()) return parse_indices(f.indices[std::min(which, f.indices.size() - 1)]);
  if (f.m > 0) return IndexSelection::leading(f.m);
  if (fallback_m) return IndexSelection::leading(*fallback_m);
  fail(ErrorCode::UsageError, "specify --indices a..b or --m");
}

void emit(const Flags& f, const std::string& content) {
  if (f.output.empty()) {
    std::cout << content;
  } else {
    write_file_atomic(f.output, content);
  }
}

void emit_json(const Flags& f, const Json& j) {
  emit(f, f.format == "csv" ? flatten_csv(j) : j.dump(2) + "\n");
}

void run_test1(const Flags& f, const std::string& data_path, const std::string& projector_path) {
  const DenseMatrix data = read_matrix(data_path, read_options(f));
  const SymMatrix p0 = projector_from_matrix(read_matrix(projector_path, {f.header, false}));
  const IndexSelection sel = selection(f, 0, projector_rank(p0));
  emit_json(f, to_json(one_sample_test(data, p0, sel, make_config(f))));
}

void run_test2(const Flags& f, const std::string& path_a, const std::string& path_b) {
  const DenseMatrix a = read_matrix(path_a, read_options(f));
  const DenseMatrix b = read_matrix(path_b, read_options(f));
  const TestReport report =
      two_sample_test(a, b, selection(f, 0, std::nullopt), selection(f, 1, std::nullopt),
                      make_config(f));
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
  emit_json(f, to_json(report));
}

void run_cs(const Flags& f, const std::string& data_path, const std::string& candidate_path) {
  const DenseMatrix data = read_matrix(data_path, read_options(f));
  const ConfidenceSet cs = confidence_set(data, selection(f, 0, std::nullopt), make_config(f));
  Json j = to_json(cs);
  if (!candidate_path.empty()) {
    const SymMatrix candidate =
        projector_from_matrix(read_matrix(candidate_path, {f.header, false}));
    const double dist = cs_distance(cs, candidate);
    j["candidate_distance"] = dist;
    j["contains"] = dist <= cs.threshold;
  }
  emit_json(f, j);
}

void run_diag(const Flags& f, const std::string& path) {
  const DenseMatrix m = read_matrix(path, {f.header, false});
  Vector values;
  if (m.rows() == 1 || m.cols() == 1) {
    values = m.reshaped();
    std::sort(values.begin(), values.end(), std::greater<>());
  } else {
    values = sym_eigenvalues(SymMatrix(m, 1e-8));
  }
  const SpectralGroups groups = group_eigenvalues(values);
  const GroupRange j = groups_of(groups, selection(f, 0, Index(1)));
  emit_json(f, to_json(groups, j, compute_diagnostics(groups, j)));
}

void run_simulate(const Flags& f, const CLI::App& sub, const std::string& config_path) {
  std::vector<ScenarioConfig> scenarios;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) fail(ErrorCode::ParseError, config_path + ": cannot open file");
    Json j;
    try {
      j = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::ParseError, config_path + ": " + e.what());
    }
    if (j.is_array()) {
      for (const auto& item : j) scenarios.push_back(scenario_from_json(item));
    } else {
      scenarios.push_back(scenario_from_json(j));
    }
  } else if (f.full) {
    scenarios = scenario_preset("full");
  } else {
    scenarios = scenario_preset(f.preset.empty() ? "desk" : f.preset);
  }
  for (ScenarioConfig& c : scenarios) {
    if (sub.count("--alpha")) c.alpha = f.alpha;
    if (sub.count("--draws")) c.draws = f.draws;
    if (sub.count("--seed")) c.seed = f.seed;
    if (sub.count("--center")) c.center = f.center;
    if (sub.count("--m")) c.m = f.m;
    if (sub.count("--statistic") || sub.count("--resampler") || sub.count("--s1") ||
        sub.count("--s2")) {
      const TestConfig t = make_config(f);
      c.methods = {{t.statistic, t.plan.kind}};
    }
    c.validate();
  }

  std::vector<PowerRow> rows;
  for (const ScenarioConfig& c : scenarios) {
    auto part = run_power_experiment(c);
    rows.insert(rows.end(), part.begin(), part.end());
  }

  Json config = Json::array();
  for (const ScenarioConfig& c : scenarios) config.push_back(to_json(c));
  std::string body;
  if (f.format == "json") {
    Json out = Json::array();
    for (const PowerRow& r : rows) {
      out.push_back({{"scenario", r.scenario}, {"regime", r.regime}, {"dist", r.dist},
                     {"n", r.n}, {"d", r.d}, {"m", r.m}, {"angle", r.angle},
                     {"method", r.method}, {"resampler", r.resampler}, {"reps", r.reps},
                     {"rejection_rate", r.rejection_rate}, {"mean_p", r.mean_p},
                     {"seed", r.seed}});
    }
    body = out.dump(2) + "\n";
  } else {
    body = power_rows_csv(rows);
  }
  if (!f.output.empty()) {
    std::filesystem::path sidecar(f.output);
    sidecar.replace_extension(sidecar.extension() == ".json" ? ".config.json" : ".json");
    write_file_atomic(sidecar.string(), config.dump(2) + "\n");
  }
  emit(f, body);
}

void add_common(CLI::App* app, Flags& f) {
  app->add_option("--alpha", f.alpha, "significance level")->check(CLI::Range(0.0, 1.0));
  app->add_option("--s1", f.s1, "window rows (range side)")->check(CLI::PositiveNumber);
  app->add_option("--s2", f.s2, "window columns (complement side)")->check(CLI::PositiveNumber);
  app->add_option("--resampler", f.resampler, "bootstrap | wishart")
      ->check(CLI::IsMember({"bootstrap", "wishart"}));
  app->add_option("--draws", f.draws, "number of resampling draws")->check(CLI::Range(2, 1 << 30));
  app->add_option("--seed", f.seed, "master seed");
  app->add_option("--indices", f.indices, "eigenvalue ranks a..b (1-based, inclusive)");
  app->add_option("--m", f.m, "shorthand for --indices 1..m")->check(CLI::PositiveNumber);
  app->add_option("--statistic", f.statistic, "projnorm | spectral | frobenius")
      ->check(CLI::IsMember({"projnorm", "spectral", "frobenius"}));
  app->add_flag("--center", f.center, "subtract column means before forming covariances");
  app->add_flag("--transpose", f.transpose, "data files store observations as columns");
  app->add_flag("--header", f.header, "skip the first line of every input file");
  app->add_option("--output,-o", f.output, "write the report here instead of stdout");
  app->add_option("--format", f.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
}

int exit_code_for(ErrorCode code) { return code == ErrorCode::NumericalFailure ? 2 : 1; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hypothesis tests for covariance eigenspaces"};
  app.require_subcommand(1);
  Flags flags;
  std::string path1, path2;

  auto* test1 = app.add_subcommand("test1", "one-sample test of P_J = P0");
  test1->add_option("data", path1, "n x d data file")->required();
  test1->add_option("projector", path2, "d x d projector or d x m orthonormal basis")->required();
  add_common(test1, flags);

  auto* test2 = app.add_subcommand("test2", "two-sample test of equal eigenspaces");
  test2->add_option("data_a", path1, "first sample")->required();
  test2->add_option("data_b", path2, "second sample")->required();
  add_common(test2, flags);

  auto* cs = app.add_subcommand("cs", "confidence set for P_J, optional membership query");
  cs->add_option("data", path1, "data file (2n rows)")->required();
  cs->add_option("candidate", path2, "candidate projector or basis");
  add_common(cs, flags);

  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo type-I error / power experiment");
  simulate->add_option("config", path1, "scenario JSON (object or array)");
  simulate->add_option("--preset", flags.preset, "smoke | desk | desk-two-sample | full");
  simulate->add_flag("--full", flags.full, "run the complete experimental grid");
  add_common(simulate, flags);

  auto* diag = app.add_subcommand("diag", "relative rank, effective dimensions, kappa");
  diag->add_option("spectrum", path1, "eigenvalue list or symmetric matrix")->required();
  add_common(diag, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  if (flags.format.empty()) flags.format = simulate->parsed() ? "csv" : "json";

  try {
    if (test1->parsed()) run_test1(flags, path1, path2);
    else if (test2->parsed()) run_test2(flags, path1, path2);
    else if (cs->parsed()) run_cs(flags, path1, path2);
    else if (simulate->parsed()) run_simulate(flags, *simulate, path1);
    else if (diag->parsed()) run_diag(flags, path1);
  } catch (const Error& e) {
    std::cerr << "error[" << to_string(e.code()) << "]: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error[Internal]: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
