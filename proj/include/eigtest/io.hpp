#pragma once

// Text matrix files, report serialization and atomic output.
//
// Matrix files hold one row per line with comma or whitespace separated
// decimal reals. Blank lines are ignored; `header` skips the first line.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "json.hpp"

#include "eigtest/hypothesis_tests.hpp"
#include "eigtest/simulation.hpp"
#include "eigtest/spectral_model.hpp"

namespace eigtest {

struct MatrixReadOptions {
  bool header = false;
  bool transpose = false;
};

inline DenseMatrix parse_matrix(std::istream& in, const MatrixReadOptions& opts = {},
                                const std::string& source = "<input>") {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (opts.header && line_no == 1) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    const auto is_sep = [](char c) { return c == ',' || c == ' ' || c == '\t' || c == '\r'; };
    while (pos < line.size()) {
      while (pos < line.size() && is_sep(line[pos])) ++pos;
      if (pos >= line.size()) break;
      std::size_t end = pos;
      while (end < line.size() && !is_sep(line[end])) ++end;
      const char* first = line.data() + pos;
      const char* last = line.data() + end;
      if (*first == '+') ++first;
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(first, last, value);
      if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
        fail(ErrorCode::ParseError, source + ":" + std::to_string(line_no) +
                                        ": invalid number '" + line.substr(pos, end - pos) + "'");
      }
      row.push_back(value);
      pos = end;
    }
    if (row.empty()) continue;
    if (!rows.empty() && row.size() != rows.front().size()) {
      fail(ErrorCode::ParseError, source + ":" + std::to_string(line_no) + ": expected " +
                                      std::to_string(rows.front().size()) + " columns, found " +
                                      std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(ErrorCode::ParseError, source + ": no data rows");
  DenseMatrix m(Index(rows.size()), Index(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(Index(i), Index(j)) = rows[i][j];
  }
  if (opts.transpose) return m.transpose();
  return m;
}

inline DenseMatrix read_matrix(const std::string& path, const MatrixReadOptions& opts = {}) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ParseError, path + ": cannot open file");
  return parse_matrix(in, opts, path);
}

inline std::string format_matrix(const DenseMatrix& m) {
  std::ostringstream out;
  out.precision(17);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      out << m(i, j);
    }
    out << '\n';
  }
  return out.str();
}

/// Writes to a sibling temporary file and renames it into place, so a failed
/// run never leaves a partial file at `path`.
inline void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::InvalidInput, path + ": cannot open for writing");
    out << content;
    out.flush();
    if (!out) {
      std::remove(tmp.c_str());
      fail(ErrorCode::InvalidInput, path + ": write failed");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.c_str());
    fail(ErrorCode::InvalidInput, path + ": " + ec.message());
  }
}

/// Interprets a hypothesis file: a d x d projector, or a d x m matrix with
/// orthonormal columns U giving P = U U^T.
inline SymMatrix projector_from_matrix(const DenseMatrix& m) {
  if (m.rows() == m.cols()) {
    try {
      return SymMatrix(m, 1e-8);
    } catch (const Error& e) {
      fail(ErrorCode::NotAProjector, std::string("projector file: ") + e.what());
    }
  }
  if (m.cols() > m.rows()) {
    fail(ErrorCode::NotAProjector, "projector file has more columns than rows");
  }
  const DenseMatrix gram = m.transpose() * m;
  if ((gram - DenseMatrix::Identity(m.cols(), m.cols())).cwiseAbs().maxCoeff() > 1e-6) {
    fail(ErrorCode::NotAProjector, "basis columns are not orthonormal");
  }
  return SymMatrix::symmetrized(m * m.transpose());
}

using Json = nlohmann::ordered_json;

inline Json to_json(const TestReport& r) {
  Json j;
  j["test"] = r.test;
  j["statistic"] = r.statistic;
  j["critical_value"] = r.critical_value;
  j["p_value"] = r.p_value;
  j["reject"] = r.reject;
  j["alpha"] = r.alpha;
  j["statistic_kind"] = r.statistic_kind.name();
  if (r.statistic_kind.kind == Statistic::Kind::ProjNorm) {
    j["s1"] = r.statistic_kind.s1;
    j["s2"] = r.statistic_kind.s2;
  } else {
    j["s1"] = nullptr;
    j["s2"] = nullptr;
  }
  j["resampler"] = std::string(to_string(r.resampler));
  j["draws"] = r.draws;
  j["seed"] = r.seed;
  j["n"] = r.n;
  j["d"] = r.d;
  j["m"] = r.m;
  j["ties"] = r.ties;
  j["draw_summary"] = {{"count", r.summary.count},
                       {"min", r.summary.min},
                       {"median", r.summary.median},
                       {"max", r.summary.max}};
  Json diag = Json::object();
  for (const auto& [key, value] : r.diagnostics) diag[key] = value;
  j["diagnostics"] = diag;
  j["warnings"] = r.warnings;
  return j;
}

inline Json to_json(const ConfidenceSet& cs) {
  Json j;
  j["alpha"] = cs.alpha;
  j["confidence_level"] = 1.0 - cs.alpha;
  j["threshold"] = cs.threshold;
  j["n"] = cs.n;
  j["d"] = cs.center.dim();
  j["m"] = cs.m;
  j["statistic_kind"] = cs.statistic.name();
  if (cs.statistic.kind == Statistic::Kind::ProjNorm) {
    j["s1"] = cs.statistic.s1;
    j["s2"] = cs.statistic.s2;
  } else {
    j["s1"] = nullptr;
    j["s2"] = nullptr;
  }
  j["resampler"] = std::string(to_string(cs.resampler));
  j["draws"] = cs.draws;
  j["seed"] = cs.seed;
  j["draw_summary"] = {{"count", cs.summary.count},
                       {"min", cs.summary.min},
                       {"median", cs.summary.median},
                       {"max", cs.summary.max}};
  Json center = Json::array();
  for (Index i = 0; i < cs.center.dim(); ++i) {
    Json row = Json::array();
    for (Index k = 0; k < cs.center.dim(); ++k) row.push_back(cs.center(i, k));
    center.push_back(row);
  }
  j["center"] = center;
  j["warnings"] = cs.warnings;
  return j;
}

inline Json to_json(const SpectralGroups& g, GroupRange j_range, const Diagnostics& diag) {
  Json j;
  j["mu"] = g.mu;
  j["mult"] = g.mult;
  j["J"] = {j_range.first, j_range.last};
  Json relr = Json::object();
  for (std::size_t i = 0; i < diag.relative_ranks.size(); ++i) {
    relr[std::to_string(j_range.first + Index(i))] = diag.relative_ranks[i];
  }
  j["relr"] = relr;
  j["r_J"] = diag.r_J;
  j["r_tilde_J"] = diag.r_tilde_J;
  j["kappa_under"] = diag.kappa.under;
  j["kappa_over"] = diag.kappa.over;
  j["kappa"] = diag.kappa.ratio;
  return j;
}

inline Json to_json(const ScenarioConfig& c) {
  Json j;
  j["name"] = c.name;
  j["regime"] = c.regime.name();
  if (c.regime.kind == Regime::Kind::Custom) j["eigenvalues"] = c.regime.custom;
  j["dist"] = std::string(to_string(c.dist));
  j["n"] = c.n;
  j["d"] = c.d;
  j["m"] = c.m;
  j["angles"] = c.angles;
  j["reps"] = c.reps;
  j["null_reps"] = c.null_reps;
  j["two_sample"] = c.two_sample;
  Json methods = Json::array();
  for (const Method& m : c.methods) {
    methods.push_back({{"statistic", m.name()}, {"resampler", std::string(to_string(m.resampler))}});
  }
  j["methods"] = methods;
  j["alpha"] = c.alpha;
  j["draws"] = c.draws;
  j["center"] = c.center;
  j["seed"] = c.seed;
  return j;
}

namespace detail {

inline Statistic parse_method_statistic(const std::string& text) {
  if (text.rfind("projnorm", 0) == 0) {
    Index s1 = 1, s2 = 1;
    if (std::sscanf(text.c_str(), "projnorm(%ld,%ld)", &s1, &s2) != 2 && text != "projnorm") {
      fail(ErrorCode::UsageError, "cannot parse statistic '" + text + "'");
    }
    return Statistic::proj_norm(s1, s2);
  }
  if (text == "spectral") return Statistic::spectral();
  if (text == "frobenius") return Statistic::frobenius();
  fail(ErrorCode::UsageError, "unknown statistic '" + text + "'");
}

}  // namespace detail

/// Inverse of to_json(ScenarioConfig); absent keys keep their defaults.
inline ScenarioConfig scenario_from_json(const Json& j) {
  ScenarioConfig c;
  try {
    if (j.contains("name")) c.name = j.at("name").get<std::string>();
    if (j.contains("regime")) {
      const auto regime = j.at("regime").get<std::string>();
      if (regime == "custom") {
        c.regime = Regime::with_eigenvalues(j.at("eigenvalues").get<std::vector<double>>());
      } else {
        c.regime = parse_regime(regime);
      }
    }
    if (j.contains("dist")) c.dist = parse_distribution(j.at("dist").get<std::string>());
    if (j.contains("n")) c.n = j.at("n").get<Index>();
    if (j.contains("d")) c.d = j.at("d").get<Index>();
    c.m = j.contains("m") ? j.at("m").get<Index>() : c.regime.default_m();
    c.angles = j.contains("angles") ? j.at("angles").get<std::vector<double>>()
                                    : c.regime.default_angles();
    if (j.contains("reps")) c.reps = j.at("reps").get<Index>();
    if (j.contains("null_reps")) c.null_reps = j.at("null_reps").get<Index>();
    if (j.contains("two_sample")) c.two_sample = j.at("two_sample").get<bool>();
    if (j.contains("methods")) {
      c.methods.clear();
      for (const auto& m : j.at("methods")) {
        c.methods.push_back({detail::parse_method_statistic(m.at("statistic").get<std::string>()),
                             parse_resampler(m.at("resampler").get<std::string>())});
      }
    }
    if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
    if (j.contains("draws")) c.draws = j.at("draws").get<Index>();
    if (j.contains("center")) c.center = j.at("center").get<bool>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, std::string("scenario config: ") + e.what());
  }
  return c;
}

inline constexpr const char* kPowerCsvHeader =
    "scenario,regime,dist,n,d,m,angle,method,resampler,reps,rejection_rate,mean_p,seed";

inline std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::string power_rows_csv(const std::vector<PowerRow>& rows, bool with_header = true) {
  std::string out;
  if (with_header) out += std::string(kPowerCsvHeader) + "\n";
  for (const PowerRow& r : rows) {
    // Method names contain a comma, e.g. projnorm(1,1).
    out += r.scenario + "," + r.regime + "," + r.dist + "," + std::to_string(r.n) + "," +
           std::to_string(r.d) + "," + std::to_string(r.m) + "," + format_real(r.angle) + ",\"" +
           r.method + "\"," + r.resampler + "," + std::to_string(r.reps) + "," +
           format_real(r.rejection_rate) + "," + format_real(r.mean_p) + "," +
           std::to_string(r.seed) + "\n";
  }
  return out;
}

/// Flattens the scalar fields of a JSON object into a two-line CSV.
inline std::string flatten_csv(const Json& j) {
  std::string keys, values;
  bool first = true;
  for (const auto& [key, value] : j.items()) {
    if (value.is_object() || value.is_array()) {
      if (key == "diagnostics" || key == "draw_summary") {
        for (const auto& [sub, v] : value.items()) {
          keys += (first ? "" : ",") + key + "." + sub;
          values += (first ? "" : ",") + v.dump();
          first = false;
        }
      }
      continue;
    }
    keys += (first ? "" : ",") + key;
    values += (first ? "" : ",") + (value.is_string() ? value.get<std::string>() : value.dump());
    first = false;
  }
  return keys + "\n" + values + "\n";
}

}  // namespace eigtest
