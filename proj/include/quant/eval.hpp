#pragma once

// Quantification and classification accuracy measures, and the grouping and
// significance-testing helpers used to aggregate them across test sets.

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string_view>
#include <vector>

#include "quant/core.hpp"

namespace quant::eval {

struct KldConfig {
  double epsilon;

  explicit KldConfig(double eps) : epsilon(eps) {
    if (!(eps > 0.0)) throw error("KLD smoothing epsilon must be positive");
  }
  /// The customary choice eps = 1 / (2 |Te|).
  static KldConfig for_test_size(std::size_t n) {
    if (n == 0) throw error("test set size must be positive");
    return KldConfig(1.0 / (2.0 * static_cast<double>(n)));
  }
};

inline double bias(Prevalence truth, Prevalence estimate) noexcept {
  return estimate.value() - truth.value();
}

inline double absolute_error(Prevalence truth, Prevalence estimate) noexcept {
  return std::abs(estimate.value() - truth.value());
}

namespace detail {
// Additive smoothing of a binary distribution: (p + eps) / (1 + 2 eps).
// Each ratio p/q becomes (p + eps)/(q + eps) and both sides stay normalized.
inline double smooth(double p, double eps) noexcept { return (p + eps) / (1.0 + 2.0 * eps); }
}  // namespace detail

/// |est - true| / true. With eps > 0 both prevalences are smoothed first.
inline double relative_absolute_error(Prevalence truth, Prevalence estimate, double eps = 0.0) {
  if (eps < 0.0) throw error("RAE smoothing epsilon must be non-negative");
  double p = truth.value();
  double q = estimate.value();
  if (eps > 0.0) {
    p = detail::smooth(p, eps);
    q = detail::smooth(q, eps);
  }
  if (p == 0.0) throw error("RAE undefined: true prevalence is zero and no smoothing");
  return std::abs(q - p) / p;
}

/// Smoothed binary Kullback-Leibler divergence KLD(true || estimate), natural log.
inline double kld(Prevalence truth, Prevalence estimate, const KldConfig& cfg) noexcept {
  const double e = cfg.epsilon;
  const double p = detail::smooth(truth.value(), e);
  const double pc = detail::smooth(truth.complement(), e);
  // The normalization of the smoothed estimate cancels inside the ratios.
  const double r = (truth.value() + e) / (estimate.value() + e);
  const double rc = (truth.complement() + e) / (estimate.complement() + e);
  const double d = p * std::log(r) + pc * std::log(rc);
  return d < 0.0 ? 0.0 : d;
}

/// 2tp / (2tp + fp + fn). A table without any positive (gold or predicted)
/// but with true negatives scores 1.
inline double f1(const ContingencyTable& t) {
  const auto denom = 2 * t.tp + t.fp + t.fn;
  if (denom == 0) {
    if (t.tn > 0) return 1.0;
    throw error("F1 undefined on an empty contingency table");
  }
  return static_cast<double>(2 * t.tp) / static_cast<double>(denom);
}

inline double micro_f1(std::span<const ContingencyTable> tables) {
  if (tables.empty()) throw error("micro_f1: no tables");
  ContingencyTable sum;
  for (const auto& t : tables) sum += t;
  return f1(sum);
}

inline double macroaverage(std::span<const double> values) {
  if (values.empty()) throw error("macroaverage: no values");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

inline double macro_f1(std::span<const ContingencyTable> tables) {
  if (tables.empty()) throw error("macro_f1: no tables");
  std::vector<double> per;
  per.reserve(tables.size());
  for (const auto& t : tables) per.push_back(f1(t));
  return macroaverage(per);
}

/// Population variance (divides by n).
inline double variance(std::span<const double> values) {
  const double mean = macroaverage(values);
  double s = 0.0;
  for (double v : values) s += (v - mean) * (v - mean);
  return s / static_cast<double>(values.size());
}

/// Two-tailed paired t-test. All-zero differences give 1; a constant
/// non-zero difference (zero variance) gives 0.
inline double paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw error("paired t-test: sequences differ in length");
  if (a.size() < 2) throw error("paired t-test: need at least two pairs");
  const auto n = a.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  if (std::all_of(d.begin(), d.end(), [](double x) { return x == 0.0; })) return 1.0;
  const double mean = macroaverage(d);
  double ss = 0.0;
  for (double x : d) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (sd == 0.0) return 0.0;
  const double t = mean / (sd / std::sqrt(static_cast<double>(n)));
  boost::math::students_t dist(static_cast<double>(n - 1));
  return std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))), 0.0, 1.0);
}

enum class PrevalenceBin { VLP, LP, HP, VHP };

inline PrevalenceBin prevalence_bin(Prevalence train) noexcept {
  const double p = train.value();
  if (p < 0.01) return PrevalenceBin::VLP;
  if (p < 0.05) return PrevalenceBin::LP;
  if (p < 0.10) return PrevalenceBin::HP;
  return PrevalenceBin::VHP;
}

constexpr std::string_view to_string(PrevalenceBin b) noexcept {
  switch (b) {
    case PrevalenceBin::VLP: return "VLP";
    case PrevalenceBin::LP: return "LP";
    case PrevalenceBin::HP: return "HP";
    case PrevalenceBin::VHP: return "VHP";
  }
  return "?";
}

enum class DriftQuartile { VLD, LD, HD, VHD };

constexpr std::string_view to_string(DriftQuartile q) noexcept {
  switch (q) {
    case DriftQuartile::VLD: return "VLD";
    case DriftQuartile::LD: return "LD";
    case DriftQuartile::HD: return "HD";
    case DriftQuartile::VHD: return "VHD";
  }
  return "?";
}

struct PrevalencePair {
  Prevalence train;
  Prevalence test;
};

/// Ranks pairs by KLD(test || train) and splits the ranking into four
/// quartiles; earlier quartiles absorb the remainder. Ties keep input order.
/// The result is indexed like the input.
inline std::vector<DriftQuartile> drift_quartiles(std::span<const PrevalencePair> pairs,
                                                  const KldConfig& cfg) {
  if (pairs.size() < 4) throw error("drift quartiles need at least four pairs");
  const auto n = pairs.size();
  std::vector<double> drift(n);
  for (std::size_t i = 0; i < n; ++i) drift[i] = kld(pairs[i].test, pairs[i].train, cfg);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return drift[a] < drift[b]; });

  std::vector<DriftQuartile> out(n);
  std::size_t pos = 0;
  for (int q = 0; q < 4; ++q) {
    const std::size_t size = n / 4 + (static_cast<std::size_t>(q) < n % 4 ? 1 : 0);
    for (std::size_t k = 0; k < size; ++k) out[order[pos++]] = static_cast<DriftQuartile>(q);
  }
  return out;
}

}  // namespace quant::eval
