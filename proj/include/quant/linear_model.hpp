#pragma once

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "quant/core.hpp"

namespace quant {

/// Linear scorer w.x + intercept with a decision threshold. The intercept is
/// the learned weight of the constant bias feature, already multiplied in.
struct LinearModel {
  std::vector<double> weights;
  double intercept = 0.0;
  double decision_threshold = 0.0;

  double score(const SparseVector& x) const noexcept { return x.dot(weights) + intercept; }

  /// Ties go to the negative class.
  Label predict(const SparseVector& x) const noexcept {
    return score(x) > decision_threshold ? Label::Positive : Label::Negative;
  }

  std::vector<double> scores(std::span<const SparseVector> xs) const {
    std::vector<double> out;
    out.reserve(xs.size());
    for (const auto& x : xs) out.push_back(score(x));
    return out;
  }

  friend bool operator==(const LinearModel&, const LinearModel&) = default;
};

namespace detail {

inline std::string format_exact(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);  // shortest round-trip form
  return std::string(buf, end);
}

inline double parse_exact(const std::string& s, const char* what) {
  double v = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size())
    throw data_error(std::string("model file: bad ") + what + " value '" + s + "'");
  return v;
}

}  // namespace detail

// Plain-text model format:
//   dim <N>
//   intercept <v>
//   threshold <v>
// followed by N lines holding one weight each. Values use the shortest
// representation that round-trips exactly.
inline void write_model(std::ostream& os, const LinearModel& m) {
  os << "dim " << m.weights.size() << '\n';
  os << "intercept " << detail::format_exact(m.intercept) << '\n';
  os << "threshold " << detail::format_exact(m.decision_threshold) << '\n';
  for (double w : m.weights) os << detail::format_exact(w) << '\n';
}

inline LinearModel read_model(std::istream& is) {
  auto expect = [&](const char* key) {
    std::string line;
    if (!std::getline(is, line)) throw data_error(std::string("model file: missing ") + key);
    std::istringstream ls(line);
    std::string k, v;
    ls >> k >> v;
    if (k != key || v.empty()) throw data_error(std::string("model file: expected ") + key);
    return v;
  };
  const auto dim_str = expect("dim");
  std::size_t dim = 0;
  {
    auto [end, ec] = std::from_chars(dim_str.data(), dim_str.data() + dim_str.size(), dim);
    if (ec != std::errc{} || end != dim_str.data() + dim_str.size())
      throw data_error("model file: bad dim");
  }
  LinearModel m;
  m.intercept = detail::parse_exact(expect("intercept"), "intercept");
  m.decision_threshold = detail::parse_exact(expect("threshold"), "threshold");
  m.weights.reserve(dim);
  std::string line;
  for (std::size_t i = 0; i < dim; ++i) {
    if (!std::getline(is, line)) throw data_error("model file: truncated weight list");
    m.weights.push_back(detail::parse_exact(line, "weight"));
  }
  return m;
}

}  // namespace quant
