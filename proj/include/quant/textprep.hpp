#pragma once

// Bag-of-words preprocessing: tokenization, a training-set vocabulary with
// document frequencies, and ltc tf-idf weighting with cosine normalization.

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "quant/core.hpp"

namespace quant::text {

using Terms = std::vector<std::string>;

struct TokenizerConfig {
  bool lowercase = true;
  bool strip_punctuation = true;
  bool strip_numbers = true;
  std::optional<std::unordered_set<std::string>> stopwords;
  // Applied after stopword removal; an empty result drops the term.
  std::function<std::string(std::string_view)> stemmer;
};

namespace detail {

inline bool is_alpha_byte(unsigned char c) noexcept {
  // Bytes >= 0x80 belong to multi-byte UTF-8 sequences and are kept as
  // letters so non-ASCII words survive intact.
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}
inline bool is_digit_byte(unsigned char c) noexcept { return c >= '0' && c <= '9'; }
inline bool is_space_byte(unsigned char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

}  // namespace detail

inline Terms tokenize(std::string_view text, const TokenizerConfig& cfg = {}) {
  Terms out;
  std::string current;
  auto flush = [&] {
    if (current.empty()) return;
    std::string term = std::move(current);
    current.clear();
    if (cfg.stopwords && cfg.stopwords->contains(term)) return;
    if (cfg.stemmer) term = cfg.stemmer(term);
    if (!term.empty()) out.push_back(std::move(term));
  };
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    bool keep;
    if (detail::is_alpha_byte(c))
      keep = true;
    else if (detail::is_digit_byte(c))
      keep = !cfg.strip_numbers;
    else if (detail::is_space_byte(c))
      keep = false;
    else
      keep = !cfg.strip_punctuation;
    if (!keep) {
      flush();
      continue;
    }
    if (cfg.lowercase && c >= 'A' && c <= 'Z') c = static_cast<unsigned char>(c - 'A' + 'a');
    current.push_back(static_cast<char>(c));
  }
  flush();
  return out;
}

/// Term index built from the training corpus. Feature indices are assigned
/// in order of first occurrence, so the mapping is deterministic.
class Vocabulary {
 public:
  std::optional<std::uint32_t> index_of(std::string_view term) const {
    auto it = index_.find(std::string(term));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  std::size_t size() const noexcept { return terms_.size(); }
  std::size_t training_size() const noexcept { return training_size_; }
  std::uint32_t document_frequency(std::uint32_t k) const { return df_.at(k); }
  const std::string& term(std::uint32_t k) const { return terms_.at(k); }

  /// log(|Tr| / df). Zero for a term present in every training document.
  double idf(std::uint32_t k) const {
    return std::log(static_cast<double>(training_size_) / static_cast<double>(df_.at(k)));
  }

  friend Vocabulary build_vocabulary(std::span<const Terms> training_docs);

 private:
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<std::string> terms_;
  std::vector<std::uint32_t> df_;
  std::size_t training_size_ = 0;
};

inline Vocabulary build_vocabulary(std::span<const Terms> training_docs) {
  if (training_docs.empty()) throw error("cannot build a vocabulary from an empty corpus");
  Vocabulary v;
  v.training_size_ = training_docs.size();
  std::vector<std::size_t> last_seen;  // last document id per term, for df
  for (std::size_t d = 0; d < training_docs.size(); ++d) {
    for (const auto& term : training_docs[d]) {
      auto [it, inserted] = v.index_.try_emplace(term, static_cast<std::uint32_t>(v.terms_.size()));
      if (inserted) {
        v.terms_.push_back(term);
        v.df_.push_back(1);
        last_seen.push_back(d);
      } else if (last_seen[it->second] != d) {
        ++v.df_[it->second];
        last_seen[it->second] = d;
      }
    }
  }
  return v;
}

/// ltc weighting: (1 + ln tf) * ln(|Tr| / df), then L2 normalization.
/// Out-of-vocabulary terms are ignored; an all-zero result is the empty vector.
inline SparseVector vectorize(const Terms& doc, const Vocabulary& vocab) {
  std::unordered_map<std::uint32_t, std::uint32_t> counts;
  for (const auto& t : doc)
    if (auto k = vocab.index_of(t)) ++counts[*k];

  std::vector<SparseEntry> entries;
  entries.reserve(counts.size());
  double norm2 = 0.0;
  for (auto [k, n] : counts) {
    const double w = (1.0 + std::log(static_cast<double>(n))) * vocab.idf(k);
    if (w == 0.0) continue;
    entries.push_back({k, w});
    norm2 += w * w;
  }
  if (entries.empty()) return {};
  const double norm = std::sqrt(norm2);
  for (auto& e : entries) e.weight /= norm;
  return SparseVector(std::move(entries));
}

}  // namespace quant::text
