#pragma once

// Shared data model: sparse feature vectors, binary labels, labeled
// datasets and the contingency-table counting primitives everything else
// builds on.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace quant {

class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (as opposed to a bad configuration).
class data_error : public error {
 public:
  using error::error;
};

enum class Label : std::int8_t { Negative = -1, Positive = +1 };

constexpr int sign_of(Label y) noexcept { return static_cast<int>(y); }
constexpr Label flip(Label y) noexcept {
  return y == Label::Positive ? Label::Negative : Label::Positive;
}
inline Label label_from_int(int v) {
  if (v == 1) return Label::Positive;
  if (v == -1) return Label::Negative;
  throw data_error("label must be +1 or -1, got " + std::to_string(v));
}

struct SparseEntry {
  std::uint32_t index;
  double weight;
  friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

/// Sparse real vector in canonical form: indices strictly increasing and no
/// stored zero weights. Construction from arbitrary entries sorts them,
/// sums duplicate indices and drops zeros.
class SparseVector {
 public:
  SparseVector() = default;

  explicit SparseVector(std::vector<SparseEntry> entries) : entries_(std::move(entries)) {
    canonicalize();
  }

  /// Accepts entries that must already be canonical; throws otherwise.
  static SparseVector from_canonical(std::vector<SparseEntry> entries) {
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (entries[i].weight == 0.0) throw data_error("zero weight stored in sparse vector");
      if (i > 0 && entries[i].index <= entries[i - 1].index)
        throw data_error("feature indices must be strictly increasing");
    }
    SparseVector v;
    v.entries_ = std::move(entries);
    return v;
  }

  std::span<const SparseEntry> entries() const noexcept { return entries_; }
  std::size_t nnz() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  /// One past the largest stored index, 0 for the empty vector.
  std::uint32_t extent() const noexcept { return entries_.empty() ? 0 : entries_.back().index + 1; }

  double dot(std::span<const double> dense) const noexcept {
    double s = 0.0;
    for (const auto& e : entries_)
      if (e.index < dense.size()) s += e.weight * dense[e.index];
    return s;
  }

  double dot(const SparseVector& other) const noexcept {
    double s = 0.0;
    auto a = entries_.begin();
    auto b = other.entries_.begin();
    while (a != entries_.end() && b != other.entries_.end()) {
      if (a->index < b->index) {
        ++a;
      } else if (b->index < a->index) {
        ++b;
      } else {
        s += a->weight * b->weight;
        ++a;
        ++b;
      }
    }
    return s;
  }

  double squared_norm() const noexcept {
    double s = 0.0;
    for (const auto& e : entries_) s += e.weight * e.weight;
    return s;
  }

  /// dense += scale * this. `dense` must cover extent().
  void add_to(std::span<double> dense, double scale) const noexcept {
    for (const auto& e : entries_) dense[e.index] += scale * e.weight;
  }

  friend bool operator==(const SparseVector&, const SparseVector&) = default;

 private:
  void canonicalize() {
    std::stable_sort(entries_.begin(), entries_.end(),
                     [](const SparseEntry& a, const SparseEntry& b) { return a.index < b.index; });
    std::vector<SparseEntry> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) {
      if (!out.empty() && out.back().index == e.index)
        out.back().weight += e.weight;
      else
        out.push_back(e);
    }
    std::erase_if(out, [](const SparseEntry& e) { return e.weight == 0.0; });
    entries_ = std::move(out);
  }

  std::vector<SparseEntry> entries_;
};

struct Example {
  SparseVector x;
  Label y;
};

/// Non-empty set of labeled examples over a fixed feature space.
class LabeledDataset {
 public:
  LabeledDataset(std::vector<Example> examples, std::size_t dimensionality)
      : examples_(std::move(examples)), dim_(dimensionality) {
    if (examples_.empty()) throw data_error("dataset must contain at least one example");
    if (dim_ == 0) throw data_error("dimensionality must be positive");
    for (const auto& ex : examples_)
      if (ex.x.extent() > dim_) throw data_error("feature index exceeds dimensionality");
  }

  /// Dimensionality is 1 + the largest feature index seen (at least 1).
  static LabeledDataset infer_dimension(std::vector<Example> examples) {
    std::size_t dim = 1;
    for (const auto& ex : examples) dim = std::max<std::size_t>(dim, ex.x.extent());
    return LabeledDataset(std::move(examples), dim);
  }

  std::span<const Example> examples() const noexcept { return examples_; }
  std::size_t size() const noexcept { return examples_.size(); }
  std::size_t dimensionality() const noexcept { return dim_; }
  const Example& operator[](std::size_t i) const { return examples_[i]; }

  std::vector<Label> labels() const {
    std::vector<Label> out;
    out.reserve(examples_.size());
    for (const auto& ex : examples_) out.push_back(ex.y);
    return out;
  }

  std::vector<SparseVector> vectors() const {
    std::vector<SparseVector> out;
    out.reserve(examples_.size());
    for (const auto& ex : examples_) out.push_back(ex.x);
    return out;
  }

  std::size_t count(Label y) const noexcept {
    return static_cast<std::size_t>(std::count_if(
        examples_.begin(), examples_.end(), [y](const Example& e) { return e.y == y; }));
  }

  /// Subset by position; dimensionality is preserved.
  LabeledDataset subset(std::span<const std::size_t> indices) const {
    std::vector<Example> out;
    out.reserve(indices.size());
    for (auto i : indices) out.push_back(examples_.at(i));
    return LabeledDataset(std::move(out), dim_);
  }

 private:
  std::vector<Example> examples_;
  std::size_t dim_;
};

/// Relative class frequency, always within [0, 1].
class Prevalence {
 public:
  constexpr Prevalence() = default;
  explicit Prevalence(double v) : value_(v) {
    if (!(v >= 0.0 && v <= 1.0)) throw error("prevalence out of [0,1]: " + std::to_string(v));
  }
  static Prevalence clipped(double v) { return Prevalence(std::clamp(v, 0.0, 1.0)); }

  constexpr double value() const noexcept { return value_; }
  constexpr double complement() const noexcept { return 1.0 - value_; }
  friend constexpr bool operator==(Prevalence, Prevalence) = default;

 private:
  double value_ = 0.0;
};

struct ContingencyTable {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  constexpr std::uint64_t total() const noexcept { return tp + fp + fn + tn; }
  constexpr std::uint64_t gold_positives() const noexcept { return tp + fn; }
  constexpr std::uint64_t gold_negatives() const noexcept { return fp + tn; }
  constexpr std::uint64_t predicted_positives() const noexcept { return tp + fp; }

  double true_prevalence() const { return static_cast<double>(gold_positives()) / nonzero_total(); }
  double predicted_prevalence() const {
    return static_cast<double>(predicted_positives()) / nonzero_total();
  }

  ContingencyTable& operator+=(const ContingencyTable& o) noexcept {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
  friend constexpr bool operator==(const ContingencyTable&, const ContingencyTable&) = default;

 private:
  double nonzero_total() const {
    if (total() == 0) throw error("empty contingency table");
    return static_cast<double>(total());
  }
};

struct Rates {
  double tpr = 0.0;
  double fpr = 0.0;
};

/// Thrown by rates() when a denominator is zero; `which` names the rate.
class undefined_rate : public error {
 public:
  enum class Which { Tpr, Fpr };
  explicit undefined_rate(Which w)
      : error(w == Which::Tpr ? "tpr undefined: no gold positives" : "fpr undefined: no gold negatives"),
        which(w) {}
  Which which;
};

inline Prevalence prevalence(std::span<const Label> labels) {
  if (labels.empty()) throw error("empty set");
  const auto pos = std::count(labels.begin(), labels.end(), Label::Positive);
  return Prevalence(static_cast<double>(pos) / static_cast<double>(labels.size()));
}

inline ContingencyTable contingency(std::span<const Label> gold, std::span<const Label> predicted) {
  if (gold.size() != predicted.size())
    throw error("contingency: label sequences differ in length");
  if (gold.empty()) throw error("contingency: empty label sequences");
  ContingencyTable t;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool g = gold[i] == Label::Positive;
    const bool p = predicted[i] == Label::Positive;
    if (g && p)
      ++t.tp;
    else if (!g && p)
      ++t.fp;
    else if (g)
      ++t.fn;
    else
      ++t.tn;
  }
  return t;
}

inline Rates rates(const ContingencyTable& t) {
  if (t.tp + t.fn == 0) throw undefined_rate(undefined_rate::Which::Tpr);
  if (t.fp + t.tn == 0) throw undefined_rate(undefined_rate::Which::Fpr);
  return {static_cast<double>(t.tp) / static_cast<double>(t.tp + t.fn),
          static_cast<double>(t.fp) / static_cast<double>(t.fp + t.tn)};
}

}  // namespace quant
