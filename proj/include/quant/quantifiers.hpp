#pragma once

// The quantification methods behind one interface: fit on a labeled
// training set, then estimate the positive-class prevalence of unlabeled
// test sets.
//
//   CC       fraction predicted positive
//   PCC      mean calibrated probability
//   ACC      CC corrected with cross-validated tpr/fpr, clipped to [0,1]
//   PACC     PCC corrected with cross-validated expected tpr/fpr
//   T50/X/MAX  ACC at a threshold picked from the CV threshold table
//   MS       median ACC over all CV thresholds
//   MM_KS/MM_PP  mixture of CV score distributions fitted to test scores
//   SVM_KLD  CC over a structural SVM trained on the KLD loss

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "quant/core.hpp"
#include "quant/linear_model.hpp"
#include "quant/svm_linear.hpp"
#include "quant/svm_struct.hpp"

namespace quant {

enum class Method { CC, PCC, ACC, PACC, T50, X, MAX, MS, MM_KS, MM_PP, SVM_KLD };

inline constexpr std::array kAllMethods = {Method::CC,  Method::PCC,   Method::ACC,   Method::PACC,
                                           Method::T50, Method::X,     Method::MAX,   Method::MS,
                                           Method::MM_KS, Method::MM_PP, Method::SVM_KLD};

constexpr std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::CC: return "CC";
    case Method::PCC: return "PCC";
    case Method::ACC: return "ACC";
    case Method::PACC: return "PACC";
    case Method::T50: return "T50";
    case Method::X: return "X";
    case Method::MAX: return "MAX";
    case Method::MS: return "MS";
    case Method::MM_KS: return "MM_KS";
    case Method::MM_PP: return "MM_PP";
    case Method::SVM_KLD: return "SVM_KLD";
  }
  return "?";
}

inline std::optional<Method> parse_method(std::string_view s) {
  for (auto m : kAllMethods)
    if (to_string(m) == s) return m;
  // accepted spellings from the literature
  if (s == "MM(KS)") return Method::MM_KS;
  if (s == "MM(PP)") return Method::MM_PP;
  if (s == "SVM(KLD)") return Method::SVM_KLD;
  return std::nullopt;
}

constexpr bool needs_cv(Method m) noexcept { return m != Method::CC && m != Method::SVM_KLD; }

struct MixtureFitConfig {
  double grid_step = 0.01;

  void validate() const {
    if (!(grid_step > 0.0 && grid_step <= 0.5)) throw error("mixture grid step must be in (0, 0.5]");
  }
};

struct QuantifierConfig {
  svm::TrainConfig train;  // C applies to both the baseline SVM and SVM_KLD
  MixtureFitConfig mixture;
};

/// A prevalence estimate; `degenerate` marks a fallback taken because the
/// adjustment was undefined (tpr == fpr).
struct Estimate {
  Prevalence prevalence;
  bool degenerate = false;
};

inline constexpr double kDegenerateGap = 1e-12;

/// (observed - fpr) / (tpr - fpr) clipped to [0,1]; falls back to the
/// observed value when |tpr - fpr| is below kDegenerateGap.
inline Estimate adjusted_count(double observed, double tpr, double fpr) {
  if (std::abs(tpr - fpr) < kDegenerateGap) return {Prevalence::clipped(observed), true};
  return {Prevalence::clipped((observed - fpr) / (tpr - fpr)), false};
}

/// Median; the mean of the two middle values for an even count.
inline double median(std::vector<double> v) {
  if (v.empty()) throw error("median of empty sequence");
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

inline double fraction_above(std::span<const double> sorted_scores, double threshold) {
  if (sorted_scores.empty()) return 0.0;
  const auto above = sorted_scores.end() -
                     std::upper_bound(sorted_scores.begin(), sorted_scores.end(), threshold);
  return static_cast<double>(above) / static_cast<double>(sorted_scores.size());
}

// ---------------------------------------------------------------------------
// mixture model fitting

enum class MixtureFit { KS, PP };

/// Empirical CDFs of the two component samples and the test sample,
/// evaluated at every distinct pooled score (ascending).
struct PooledCdfs {
  std::vector<double> pos, neg, test;

  PooledCdfs(std::span<const double> pos_scores, std::span<const double> neg_scores,
             std::span<const double> test_scores) {
    if (pos_scores.empty() || neg_scores.empty() || test_scores.empty())
      throw error("mixture fit: empty score sample");
    std::vector<double> ps(pos_scores.begin(), pos_scores.end());
    std::vector<double> ns(neg_scores.begin(), neg_scores.end());
    std::vector<double> ts(test_scores.begin(), test_scores.end());
    std::sort(ps.begin(), ps.end());
    std::sort(ns.begin(), ns.end());
    std::sort(ts.begin(), ts.end());
    std::vector<double> points;
    points.reserve(ps.size() + ns.size() + ts.size());
    points.insert(points.end(), ps.begin(), ps.end());
    points.insert(points.end(), ns.begin(), ns.end());
    points.insert(points.end(), ts.begin(), ts.end());
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());

    auto cdf = [&](const std::vector<double>& sorted) {
      std::vector<double> out;
      out.reserve(points.size());
      std::size_t k = 0;
      for (double t : points) {
        while (k < sorted.size() && sorted[k] <= t) ++k;
        out.push_back(static_cast<double>(k) / static_cast<double>(sorted.size()));
      }
      return out;
    };
    pos = cdf(ps);
    neg = cdf(ns);
    test = cdf(ts);
  }
};

/// Kolmogorov-Smirnov distance between the test CDF and the mixture
/// lambda * F_pos + (1 - lambda) * F_neg.
inline double ks_misfit(const PooledCdfs& c, double lambda) {
  double d = 0.0;
  for (std::size_t k = 0; k < c.test.size(); ++k)
    d = std::max(d, std::abs(lambda * c.pos[k] + (1.0 - lambda) * c.neg[k] - c.test[k]));
  return d;
}

/// Area between the P-P curve (mixture CDF, test CDF) and the diagonal,
/// integrated with the trapezoid rule over the mixture-CDF axis from (0,0).
inline double pp_misfit(const PooledCdfs& c, double lambda) {
  double area = 0.0, px = 0.0, pd = 0.0;
  for (std::size_t k = 0; k < c.test.size(); ++k) {
    const double x = lambda * c.pos[k] + (1.0 - lambda) * c.neg[k];
    const double d = std::abs(c.test[k] - x);
    area += (x - px) * (d + pd) / 2.0;
    px = x;
    pd = d;
  }
  return area;
}

/// Candidate mixture weights 0, step, 2 step, ... , 1.
inline std::vector<double> mixture_grid(const MixtureFitConfig& cfg) {
  cfg.validate();
  std::vector<double> grid;
  for (std::size_t i = 0;; ++i) {
    const double v = static_cast<double>(i) * cfg.grid_step;
    if (v >= 1.0 - 1e-12) break;
    grid.push_back(v);
  }
  grid.push_back(1.0);
  return grid;
}

/// Grid search for the best-fitting mixture weight; ties go to the smaller
/// weight.
inline Prevalence fit_mixture(std::span<const double> pos_scores, std::span<const double> neg_scores,
                              std::span<const double> test_scores, MixtureFit fit,
                              const MixtureFitConfig& cfg = {}) {
  const PooledCdfs cdfs(pos_scores, neg_scores, test_scores);
  double best = std::numeric_limits<double>::infinity();
  double best_lambda = 0.0;
  for (double lambda : mixture_grid(cfg)) {
    const double m = fit == MixtureFit::KS ? ks_misfit(cdfs, lambda) : pp_misfit(cdfs, lambda);
    if (m < best) {
      best = m;
      best_lambda = lambda;
    }
  }
  return Prevalence(best_lambda);
}

// ---------------------------------------------------------------------------
// threshold selection over the CV table

/// Row chosen by T50 (tpr nearest 0.5), X (fpr nearest 1 - tpr) or MAX
/// (largest tpr - fpr). Ties go to the smaller threshold; the infinite
/// endpoints are only used when no finite row exists.
inline svm::ThresholdRow select_threshold(std::span<const svm::ThresholdRow> table, Method m) {
  if (table.empty()) throw error("empty threshold table");
  auto cost = [m](const svm::ThresholdRow& r) {
    switch (m) {
      case Method::T50: return std::abs(r.tpr - 0.5);
      case Method::X: return std::abs(r.fpr - (1.0 - r.tpr));
      case Method::MAX: return -(r.tpr - r.fpr);
      default: throw error("select_threshold: not a threshold-tuning method");
    }
  };
  const bool any_finite = std::any_of(table.begin(), table.end(),
                                      [](const auto& r) { return std::isfinite(r.threshold); });
  const svm::ThresholdRow* best = nullptr;
  double best_cost = std::numeric_limits<double>::infinity();
  for (const auto& r : table) {
    if (any_finite && !std::isfinite(r.threshold)) continue;
    const double c = cost(r);
    if (c < best_cost) {
      best_cost = c;
      best = &r;
    }
  }
  return *best;
}

// ---------------------------------------------------------------------------

/// State shared by the ten baselines: one linear SVM trained on the whole
/// training set plus its cross-validated estimates.
struct BaselineFit {
  LinearModel model;
  std::optional<svm::CvEstimates> cv;
};

inline BaselineFit fit_baseline(const LabeledDataset& train, const svm::TrainConfig& cfg,
                                bool with_cv = true) {
  BaselineFit b;
  b.model = svm::train(train, cfg);
  if (with_cv) b.cv = svm::cv_estimates(train, cfg);
  return b;
}

class Quantifier {
 public:
  static Quantifier fit(Method m, const LabeledDataset& train, const QuantifierConfig& cfg = {}) {
    if (train.count(Label::Positive) == 0 || train.count(Label::Negative) == 0)
      throw error("training set must contain both classes");
    cfg.mixture.validate();
    if (m == Method::SVM_KLD) {
      Quantifier q(m, cfg);
      auto sc = svm::struct_config_for(cfg.train, train.size());
      auto result = svm::train_struct(train, svm::kld_loss_for(train.size()), sc);
      q.model_ = std::move(result.model);
      q.converged_ = result.converged;
      return q;
    }
    return from_baseline(m, fit_baseline(train, cfg.train, needs_cv(m)), cfg);
  }

  /// Builds a baseline quantifier from a shared fit (not valid for SVM_KLD).
  static Quantifier from_baseline(Method m, const BaselineFit& base, const QuantifierConfig& cfg = {}) {
    if (m == Method::SVM_KLD) throw error("SVM_KLD is not derived from the baseline classifier");
    if (needs_cv(m) && !base.cv) throw error(std::string(to_string(m)) + " needs cross-validated estimates");
    cfg.mixture.validate();
    Quantifier q(m, cfg);
    q.model_ = base.model;
    if (needs_cv(m)) q.cv_ = base.cv;
    if (m == Method::T50 || m == Method::X || m == Method::MAX) {
      q.tuned_ = select_threshold(q.cv_->threshold_table, m);
      q.model_.decision_threshold = q.tuned_->threshold;
    }
    return q;
  }

  /// Reassembles a quantifier from stored parts (see the harness bundle
  /// format). The threshold table is rebuilt from the stored CV scores.
  static Quantifier restore(Method m, LinearModel model, std::optional<svm::CvEstimates> cv,
                            const QuantifierConfig& cfg = {}) {
    if (m == Method::SVM_KLD) {
      Quantifier q(m, cfg);
      q.model_ = std::move(model);
      return q;
    }
    if (cv) cv->threshold_table = svm::threshold_table(cv->pos_scores, cv->neg_scores);
    model.decision_threshold = 0.0;
    return from_baseline(m, BaselineFit{std::move(model), std::move(cv)}, cfg);
  }

  Method method() const noexcept { return method_; }
  const LinearModel& model() const noexcept { return model_; }
  const std::optional<svm::CvEstimates>& cv() const noexcept { return cv_; }
  const std::optional<svm::ThresholdRow>& tuned_threshold() const noexcept { return tuned_; }
  const QuantifierConfig& config() const noexcept { return cfg_; }
  bool converged() const noexcept { return converged_; }

  Estimate estimate(std::span<const SparseVector> test) const;

 private:
  Quantifier(Method m, const QuantifierConfig& cfg) : method_(m), cfg_(cfg) {}

  Method method_;
  QuantifierConfig cfg_;
  LinearModel model_;
  std::optional<svm::CvEstimates> cv_;
  std::optional<svm::ThresholdRow> tuned_;
  bool converged_ = true;
};

namespace detail {

inline void require_test(std::span<const SparseVector> test) {
  if (test.empty()) throw error("empty test set");
}

inline void require_method(const Quantifier& q, std::initializer_list<Method> allowed) {
  for (auto m : allowed)
    if (q.method() == m) return;
  throw error("estimator does not apply to method " + std::string(to_string(q.method())));
}

inline double cc_at(const LinearModel& model, std::span<const SparseVector> test) {
  std::size_t pos = 0;
  for (const auto& x : test) pos += model.predict(x) == Label::Positive;
  return static_cast<double>(pos) / static_cast<double>(test.size());
}

inline double pcc_of(const Quantifier& q, std::span<const SparseVector> test) {
  double s = 0.0;
  for (const auto& x : test) s += q.cv()->calibrator.probability(q.model().score(x));
  return s / static_cast<double>(test.size());
}

}  // namespace detail

inline Estimate estimate_cc(const Quantifier& q, std::span<const SparseVector> test) {
  detail::require_test(test);
  return {Prevalence(detail::cc_at(q.model(), test))};
}

inline Estimate estimate_pcc(const Quantifier& q, std::span<const SparseVector> test) {
  detail::require_test(test);
  detail::require_method(q, {Method::PCC, Method::PACC});
  return {Prevalence::clipped(detail::pcc_of(q, test))};
}

inline Estimate estimate_acc(const Quantifier& q, std::span<const SparseVector> test) {
  detail::require_test(test);
  detail::require_method(q, {Method::ACC});
  return adjusted_count(detail::cc_at(q.model(), test), q.cv()->tpr, q.cv()->fpr);
}

inline Estimate estimate_pacc(const Quantifier& q, std::span<const SparseVector> test) {
  detail::require_test(test);
  detail::require_method(q, {Method::PACC});
  return adjusted_count(detail::pcc_of(q, test), q.cv()->expected_tpr, q.cv()->expected_fpr);
}

/// T50, X and MAX: ACC evaluated at the tuned threshold with that row's rates.
inline Estimate estimate_thresholded(const Quantifier& q, std::span<const SparseVector> test) {
  detail::require_test(test);
  detail::require_method(q, {Method::T50, Method::X, Method::MAX});
  const auto& row = *q.tuned_threshold();
  return adjusted_count(detail::cc_at(q.model(), test), row.tpr, row.fpr);
}

/// Median of the clipped ACC estimates over every usable CV threshold.
inline Estimate estimate_ms(const Quantifier& q, std::span<const SparseVector> test) {
  detail::require_test(test);
  detail::require_method(q, {Method::MS});
  auto scores = q.model().scores(test);
  std::sort(scores.begin(), scores.end());
  std::vector<double> estimates;
  for (const auto& row : q.cv()->threshold_table) {
    if (std::abs(row.tpr - row.fpr) < kDegenerateGap) continue;
    estimates.push_back(adjusted_count(fraction_above(scores, row.threshold), row.tpr, row.fpr)
                            .prevalence.value());
  }
  if (estimates.empty()) return {Prevalence(fraction_above(scores, 0.0)), true};
  return {Prevalence::clipped(median(std::move(estimates)))};
}

inline Estimate estimate_mm(const Quantifier& q, std::span<const SparseVector> test, MixtureFit fit,
                            const MixtureFitConfig& cfg) {
  detail::require_test(test);
  detail::require_method(q, {Method::MM_KS, Method::MM_PP});
  const auto scores = q.model().scores(test);
  return {fit_mixture(q.cv()->pos_scores, q.cv()->neg_scores, scores, fit, cfg)};
}

inline Estimate estimate_svm_kld(const Quantifier& q, std::span<const SparseVector> test) {
  detail::require_test(test);
  detail::require_method(q, {Method::SVM_KLD});
  return {Prevalence(detail::cc_at(q.model(), test))};
}

inline Estimate Quantifier::estimate(std::span<const SparseVector> test) const {
  switch (method_) {
    case Method::CC: return estimate_cc(*this, test);
    case Method::PCC: return estimate_pcc(*this, test);
    case Method::ACC: return estimate_acc(*this, test);
    case Method::PACC: return estimate_pacc(*this, test);
    case Method::T50:
    case Method::X:
    case Method::MAX: return estimate_thresholded(*this, test);
    case Method::MS: return estimate_ms(*this, test);
    case Method::MM_KS: return estimate_mm(*this, test, MixtureFit::KS, cfg_.mixture);
    case Method::MM_PP: return estimate_mm(*this, test, MixtureFit::PP, cfg_.mixture);
    case Method::SVM_KLD: return estimate_svm_kld(*this, test);
  }
  throw error("unknown method");
}

}  // namespace quant
