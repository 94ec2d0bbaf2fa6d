#pragma once

// Sparse labeled dataset files, one example per line:
//
//   # dim 5000            optional header fixing the dimensionality
//   +1 3:0.25 17:0.5      label, then ascending index:value pairs
//   -1                    an example with no features
//
// Other lines starting with '#' and blank lines are ignored, as is anything
// after a '#' on an example line. Explicit zero values are dropped.

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "quant/core.hpp"
#include "quant/linear_model.hpp"

namespace quant::io {

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] inline void fail(const std::string& source, std::size_t line, const std::string& msg) {
  throw data_error(source + ":" + std::to_string(line) + ": " + msg);
}

}  // namespace detail

inline LabeledDataset parse_dataset(std::istream& in, const std::string& source = "<input>") {
  std::vector<Example> examples;
  std::optional<std::size_t> header_dim;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line = detail::trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      auto body = detail::trim(line.substr(1));
      if (body.starts_with("dim ")) {
        auto num = detail::trim(body.substr(4));
        std::size_t d = 0;
        auto [end, ec] = std::from_chars(num.data(), num.data() + num.size(), d);
        if (ec != std::errc{} || end != num.data() + num.size() || d == 0)
          detail::fail(source, lineno, "bad dim header");
        header_dim = d;
      }
      continue;
    }
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = detail::trim(line.substr(0, hash));

    std::vector<std::string_view> tokens;
    for (std::size_t pos = 0; pos < line.size();) {
      const auto next = line.find_first_of(" \t", pos);
      const auto tok = line.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
      if (!tok.empty()) tokens.push_back(tok);
      if (next == std::string_view::npos) break;
      pos = next + 1;
    }

    auto label_tok = tokens.front();
    if (label_tok.front() == '+') label_tok.remove_prefix(1);
    int label = 0;
    {
      auto [end, ec] = std::from_chars(label_tok.data(), label_tok.data() + label_tok.size(), label);
      if (ec != std::errc{} || end != label_tok.data() + label_tok.size() || (label != 1 && label != -1))
        detail::fail(source, lineno, "label must be +1 or -1");
    }

    std::vector<SparseEntry> entries;
    entries.reserve(tokens.size() - 1);
    long long prev_index = -1;
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      const auto tok = tokens[t];
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos) detail::fail(source, lineno, "expected index:value, got '" + std::string(tok) + "'");
      std::uint32_t index = 0;
      double value = 0.0;
      auto [ie, iec] = std::from_chars(tok.data(), tok.data() + colon, index);
      if (iec != std::errc{} || ie != tok.data() + colon) detail::fail(source, lineno, "bad feature index");
      auto [ve, vec] = std::from_chars(tok.data() + colon + 1, tok.data() + tok.size(), value);
      if (vec != std::errc{} || ve != tok.data() + tok.size() || !std::isfinite(value))
        detail::fail(source, lineno, "bad feature value");
      if (static_cast<long long>(index) <= prev_index)
        detail::fail(source, lineno, "feature indices must be strictly ascending");
      prev_index = index;
      if (value != 0.0) entries.push_back({index, value});
    }
    examples.push_back({SparseVector::from_canonical(std::move(entries)), label_from_int(label)});
  }
  if (examples.empty()) throw data_error(source + ": no examples");
  if (header_dim) {
    for (std::size_t i = 0; i < examples.size(); ++i)
      if (examples[i].x.extent() > *header_dim)
        throw data_error(source + ": feature index exceeds declared dim");
    return LabeledDataset(std::move(examples), *header_dim);
  }
  return LabeledDataset::infer_dimension(std::move(examples));
}

inline LabeledDataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open dataset " + path);
  return parse_dataset(in, path);
}

/// Writes the dim header and one line per example; values round-trip exactly.
inline void write_dataset(std::ostream& out, const LabeledDataset& data) {
  out << "# dim " << data.dimensionality() << '\n';
  for (const auto& ex : data.examples()) {
    out << (ex.y == Label::Positive ? "+1" : "-1");
    for (const auto& e : ex.x.entries()) out << ' ' << e.index << ':' << quant::detail::format_exact(e.weight);
    out << '\n';
  }
}

inline void save_dataset(const std::string& path, const LabeledDataset& data) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write dataset " + path);
  write_dataset(out, data);
}

}  // namespace quant::io
