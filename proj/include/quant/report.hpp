#pragma once

// Experiment reports: one row per (class, test set, method) plus grouped
// macroaverages and pairwise significance tests, written as TSV or JSON.

#include <nlohmann/json.hpp>

#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "quant/eval.hpp"
#include "quant/quantifiers.hpp"

namespace quant::report {

struct Row {
  std::string class_id;
  std::string test_set;
  Method method = Method::CC;
  std::size_t test_size = 0;
  double true_prev = 0.0;
  double est_prev = 0.0;
  double kld = 0.0;
  double ae = 0.0;
  double rae = 0.0;
  double bias = 0.0;
  eval::PrevalenceBin prevalence_bin = eval::PrevalenceBin::VLP;
  std::optional<eval::DriftQuartile> drift_quartile;  // unset with fewer than four test sets
  bool degenerate = false;  // the estimator fell back to an unadjusted value
};

struct GroupSummary {
  std::string group;  // "ALL", a prevalence bin or a drift quartile
  Method method = Method::CC;
  std::size_t count = 0;
  double kld = 0.0;  // macroaverages over the group's rows
  double kld_variance = 0.0;
  double ae = 0.0;
  double rae = 0.0;
  double bias = 0.0;
};

struct PairwiseTest {
  std::string group;
  Method first = Method::CC;
  Method second = Method::CC;
  std::size_t pairs = 0;
  double p_value = 1.0;  // two-tailed paired t-test on per-row KLD
  bool significant = false;
};

struct Failure {
  std::string class_id;
  Method method = Method::CC;
  std::string message;
};

struct QuantifierReport {
  std::vector<Row> rows;
  std::vector<GroupSummary> summaries;
  std::vector<PairwiseTest> tests;
  std::vector<Failure> failures;
};

/// Six significant digits in scientific notation, e.g. 1.32000E-03.
inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.5E", v);
  return buf;
}

inline constexpr const char* kTsvHeader =
    "class_id\ttest_set\tmethod\ttest_size\ttrue_prev\test_prev\tkld\tae\trae\tbias\t"
    "prevalence_bin\tdrift_quartile";

inline std::string quartile_name(const std::optional<eval::DriftQuartile>& q) {
  return q ? std::string(eval::to_string(*q)) : "NA";
}

inline void write_tsv(std::ostream& out, const QuantifierReport& r) {
  out << kTsvHeader << '\n';
  for (const auto& row : r.rows) {
    out << row.class_id << '\t' << row.test_set << '\t' << to_string(row.method) << '\t'
        << row.test_size << '\t' << format_real(row.true_prev) << '\t' << format_real(row.est_prev)
        << '\t' << format_real(row.kld) << '\t' << format_real(row.ae) << '\t' << format_real(row.rae)
        << '\t' << format_real(row.bias) << '\t' << eval::to_string(row.prevalence_bin) << '\t'
        << quartile_name(row.drift_quartile) << '\n';
  }
}

/// Reads rows back from write_tsv output (values at printed precision).
inline std::vector<Row> read_tsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTsvHeader) throw data_error("report: missing TSV header");
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, '\t');) f.push_back(cell);
    if (f.size() != 12) throw data_error("report: expected 12 fields, got " + std::to_string(f.size()));
    Row row;
    row.class_id = f[0];
    row.test_set = f[1];
    auto m = parse_method(f[2]);
    if (!m) throw data_error("report: unknown method " + f[2]);
    row.method = *m;
    row.test_size = std::stoull(f[3]);
    row.true_prev = std::stod(f[4]);
    row.est_prev = std::stod(f[5]);
    row.kld = std::stod(f[6]);
    row.ae = std::stod(f[7]);
    row.rae = std::stod(f[8]);
    row.bias = std::stod(f[9]);
    bool found = false;
    for (auto b : {eval::PrevalenceBin::VLP, eval::PrevalenceBin::LP, eval::PrevalenceBin::HP,
                   eval::PrevalenceBin::VHP})
      if (eval::to_string(b) == f[10]) {
        row.prevalence_bin = b;
        found = true;
      }
    if (!found) throw data_error("report: unknown prevalence bin " + f[10]);
    for (auto q : {eval::DriftQuartile::VLD, eval::DriftQuartile::LD, eval::DriftQuartile::HD,
                   eval::DriftQuartile::VHD})
      if (eval::to_string(q) == f[11]) row.drift_quartile = q;
    if (!row.drift_quartile && f[11] != "NA") throw data_error("report: unknown drift quartile " + f[11]);
    rows.push_back(std::move(row));
  }
  return rows;
}

inline nlohmann::ordered_json to_json(const QuantifierReport& r) {
  using nlohmann::ordered_json;
  ordered_json rows = ordered_json::array();
  for (const auto& row : r.rows) {
    ordered_json j;
    j["class_id"] = row.class_id;
    j["test_set"] = row.test_set;
    j["method"] = to_string(row.method);
    j["test_size"] = row.test_size;
    j["true_prev"] = row.true_prev;
    j["est_prev"] = row.est_prev;
    j["kld"] = row.kld;
    j["ae"] = row.ae;
    j["rae"] = row.rae;
    j["bias"] = row.bias;
    j["prevalence_bin"] = eval::to_string(row.prevalence_bin);
    j["drift_quartile"] = quartile_name(row.drift_quartile);
    j["degenerate"] = row.degenerate;
    rows.push_back(std::move(j));
  }
  ordered_json groups = ordered_json::array();
  for (const auto& s : r.summaries) {
    ordered_json j;
    j["group"] = s.group;
    j["method"] = to_string(s.method);
    j["count"] = s.count;
    j["kld"] = s.kld;
    j["kld_variance"] = s.kld_variance;
    j["ae"] = s.ae;
    j["rae"] = s.rae;
    j["bias"] = s.bias;
    groups.push_back(std::move(j));
  }
  ordered_json tests = ordered_json::array();
  for (const auto& t : r.tests) {
    ordered_json j;
    j["group"] = t.group;
    j["first"] = to_string(t.first);
    j["second"] = to_string(t.second);
    j["pairs"] = t.pairs;
    j["p_value"] = t.p_value;
    j["significant"] = t.significant;
    tests.push_back(std::move(j));
  }
  ordered_json failures = ordered_json::array();
  for (const auto& f : r.failures) {
    ordered_json j;
    j["class_id"] = f.class_id;
    j["method"] = to_string(f.method);
    j["message"] = f.message;
    failures.push_back(std::move(j));
  }
  ordered_json out;
  out["rows"] = std::move(rows);
  out["summaries"] = {{"groups", std::move(groups)}, {"pairwise", std::move(tests)},
                      {"failures", std::move(failures)}};
  return out;
}

inline void write_json(std::ostream& out, const QuantifierReport& r) { out << to_json(r).dump(2) << '\n'; }

enum class Format { Tsv, Json };

inline void emit_report(std::ostream& out, const QuantifierReport& r, Format f) {
  if (f == Format::Tsv)
    write_tsv(out, r);
  else
    write_json(out, r);
}

}  // namespace quant::report
