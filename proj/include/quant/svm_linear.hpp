#pragma once

// Baseline linear SVM, Platt calibration and k-fold cross-validated
// estimates of rates, expected rates and score distributions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "quant/core.hpp"
#include "quant/linear_model.hpp"
#include "quant/parallel.hpp"
#include "quant/svm_struct.hpp"

namespace quant::svm {

struct TrainConfig {
  // Per-example hinge-loss weight, as in 1/2|w|^2 + C sum_i hinge_i.
  double c_regularization = 1.0;
  int folds = 50;
  std::uint64_t seed = 0;
  double bias_feature = 1.0;
  double tolerance = 1e-3;
  int max_iterations = 10000;
  unsigned threads = 0;  // 0 = hardware concurrency
};

/// Structural-SVM settings equivalent to the per-example soft-margin SVM
/// with the given C on n examples. With the error-rate loss the 1-slack
/// objective equals 1/2|w|^2 + (C'/n) sum_i max(0, 1 - 2 y_i w.x_i); the
/// substitution v = 2w turns that into the usual form with C = 4C'/n.
inline StructTrainConfig struct_config_for(const TrainConfig& cfg, std::size_t n) {
  StructTrainConfig s;
  s.c_regularization = cfg.c_regularization * static_cast<double>(n) / 4.0;
  s.tolerance = cfg.tolerance;
  s.max_iterations = cfg.max_iterations;
  s.bias_feature = cfg.bias_feature;
  return s;
}

/// Soft-margin linear SVM trained through the structural engine with the
/// error-rate loss.
inline LinearModel train(const LabeledDataset& data, const TrainConfig& cfg = {}) {
  if (!(cfg.c_regularization > 0.0)) throw error("C must be positive");
  if (data.count(Label::Positive) == 0 || data.count(Label::Negative) == 0)
    throw error("training set must contain both classes");
  return train_struct(data, error_rate_loss(), struct_config_for(cfg, data.size())).model;
}

inline double score(const LinearModel& model, const SparseVector& x) noexcept {
  return model.score(x);
}

inline Label predict(const LinearModel& model, const SparseVector& x) noexcept {
  return model.predict(x);
}

/// Logistic map from scores to membership probabilities:
/// p(c|s) = 1 / (1 + exp(-(slope * s + intercept))).
struct Calibrator {
  double slope = 0.0;
  double intercept = 0.0;

  double probability(double s) const noexcept {
    const double z = slope * s + intercept;
    // evaluated so that neither branch overflows
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
  }
};

/// Platt scaling by Newton's method with backtracking (Lin, Lin & Weng's
/// formulation), using Platt's smoothed targets (N+ + 1)/(N+ + 2) and
/// 1/(N- + 2).
inline Calibrator fit_platt(std::span<const double> scores, std::span<const Label> labels) {
  if (scores.size() != labels.size()) throw error("calibration: scores and labels differ in length");
  if (scores.empty()) throw error("calibration: no scores");
  const auto [mn, mx] = std::minmax_element(scores.begin(), scores.end());
  if (*mn == *mx) throw error("calibration: all scores identical");
  double prior1 = 0, prior0 = 0;
  for (auto y : labels) (y == Label::Positive ? prior1 : prior0) += 1.0;
  if (prior1 == 0 || prior0 == 0) throw error("calibration: need both labels");

  const double hi = (prior1 + 1.0) / (prior1 + 2.0);
  const double lo = 1.0 / (prior0 + 2.0);
  const std::size_t n = scores.size();
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = labels[i] == Label::Positive ? hi : lo;

  // Platt's parameterization: p = 1 / (1 + exp(A s + B))
  double A = 0.0, B = std::log((prior0 + 1.0) / (prior1 + 1.0));
  auto objective = [&](double a, double b) {
    double f = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double fApB = scores[i] * a + b;
      if (fApB >= 0)
        f += t[i] * fApB + std::log1p(std::exp(-fApB));
      else
        f += (t[i] - 1.0) * fApB + std::log1p(std::exp(fApB));
    }
    return f;
  };
  double fval = objective(A, B);
  constexpr double kSigma = 1e-12, kMinStep = 1e-10, kEps = 1e-5;
  for (int iter = 0; iter < 100; ++iter) {
    double h11 = kSigma, h22 = kSigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double fApB = scores[i] * A + B;
      double p, q;
      if (fApB >= 0) {
        p = std::exp(-fApB) / (1.0 + std::exp(-fApB));
        q = 1.0 / (1.0 + std::exp(-fApB));
      } else {
        p = 1.0 / (1.0 + std::exp(fApB));
        q = std::exp(fApB) / (1.0 + std::exp(fApB));
      }
      const double d2 = p * q;
      h11 += scores[i] * scores[i] * d2;
      h22 += d2;
      h21 += scores[i] * d2;
      const double d1 = t[i] - p;
      g1 += scores[i] * d1;
      g2 += d1;
    }
    if (std::abs(g1) < kEps && std::abs(g2) < kEps) break;
    const double det = h11 * h22 - h21 * h21;
    const double dA = -(h22 * g1 - h21 * g2) / det;
    const double dB = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * dA + g2 * dB;
    double step = 1.0;
    bool moved = false;
    while (step >= kMinStep) {
      const double nA = A + step * dA, nB = B + step * dB;
      const double nf = objective(nA, nB);
      if (nf < fval + 1e-4 * step * gd) {
        A = nA;
        B = nB;
        fval = nf;
        moved = true;
        break;
      }
      step /= 2.0;
    }
    if (!moved) break;
  }
  return {-A, -B};
}

struct ThresholdRow {
  double threshold;
  double tpr;
  double fpr;
};

struct CvEstimates {
  double tpr = 0.0;  // at the model's default threshold 0
  double fpr = 0.0;
  double expected_tpr = 0.0;  // mean calibrated probability over gold positives
  double expected_fpr = 0.0;  // ... over gold negatives
  std::vector<double> pos_scores;  // pooled out-of-fold scores, gold positives
  std::vector<double> neg_scores;  // ... gold negatives
  std::vector<ThresholdRow> threshold_table;  // ascending threshold
  Calibrator calibrator;
  int folds_used = 0;
  bool folds_reduced = false;
};

/// Out-of-fold scores from stratified k-fold cross-validation: every
/// example is scored once by a model trained without it. Folds are reduced
/// to the minority-class count when needed.
struct OutOfFold {
  std::vector<double> scores;  // indexed like the dataset
  int folds_used = 0;
  bool folds_reduced = false;
};

inline OutOfFold out_of_fold_scores(const LabeledDataset& data, const TrainConfig& cfg) {
  if (cfg.folds < 2) throw error("cross-validation needs at least two folds");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < data.size(); ++i)
    (data[i].y == Label::Positive ? pos : neg).push_back(i);
  const std::size_t minority = std::min(pos.size(), neg.size());
  OutOfFold out;
  std::size_t k = static_cast<std::size_t>(cfg.folds);
  if (k > data.size()) k = data.size();
  if (minority < k) {
    k = minority;
    out.folds_reduced = true;
  }
  if (k < 2) throw error("cross-validation: fewer than two examples of a class");
  if (k != static_cast<std::size_t>(cfg.folds)) out.folds_reduced = true;
  out.folds_used = static_cast<int>(k);

  std::mt19937_64 rng(cfg.seed);
  std::shuffle(pos.begin(), pos.end(), rng);
  std::shuffle(neg.begin(), neg.end(), rng);
  std::vector<std::size_t> fold_of(data.size());
  for (std::size_t i = 0; i < pos.size(); ++i) fold_of[pos[i]] = i % k;
  for (std::size_t j = 0; j < neg.size(); ++j) fold_of[neg[j]] = (j + pos.size()) % k;

  out.scores.assign(data.size(), 0.0);
  quant::detail::parallel_for(
      k,
      [&](std::size_t f) {
        std::vector<std::size_t> train_idx, held;
        for (std::size_t i = 0; i < data.size(); ++i) (fold_of[i] == f ? held : train_idx).push_back(i);
        const auto model = train(data.subset(train_idx), cfg);
        for (auto i : held) out.scores[i] = model.score(data[i].x);
      },
      cfg.threads);
  return out;
}

/// Platt calibrator fitted on out-of-fold scores.
inline Calibrator calibrate(const LabeledDataset& data, const TrainConfig& cfg = {}) {
  const auto oof = out_of_fold_scores(data, cfg);
  return fit_platt(oof.scores, data.labels());
}

/// Every distinct achievable (tpr, fpr) of the rule "score > threshold":
/// -inf, midpoints between consecutive distinct scores, +inf.
inline std::vector<ThresholdRow> threshold_table(std::span<const double> pos_scores,
                                                 std::span<const double> neg_scores) {
  std::vector<double> all(pos_scores.begin(), pos_scores.end());
  all.insert(all.end(), neg_scores.begin(), neg_scores.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());

  std::vector<double> ps(pos_scores.begin(), pos_scores.end());
  std::vector<double> ns(neg_scores.begin(), neg_scores.end());
  std::sort(ps.begin(), ps.end());
  std::sort(ns.begin(), ns.end());
  auto rate_above = [](const std::vector<double>& sorted, double t) {
    if (sorted.empty()) return 0.0;
    const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), t);
    return static_cast<double>(above) / static_cast<double>(sorted.size());
  };

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<ThresholdRow> rows;
  rows.reserve(all.size() + 1);
  rows.push_back({-inf, ps.empty() ? 0.0 : 1.0, ns.empty() ? 0.0 : 1.0});
  for (std::size_t i = 0; i + 1 < all.size(); ++i) {
    const double t = all[i] + (all[i + 1] - all[i]) / 2.0;
    rows.push_back({t, rate_above(ps, t), rate_above(ns, t)});
  }
  rows.push_back({inf, 0.0, 0.0});
  return rows;
}

inline CvEstimates cv_estimates(const LabeledDataset& data, const TrainConfig& cfg = {}) {
  const auto oof = out_of_fold_scores(data, cfg);
  CvEstimates est;
  est.folds_used = oof.folds_used;
  est.folds_reduced = oof.folds_reduced;
  const auto labels = data.labels();
  for (std::size_t i = 0; i < data.size(); ++i)
    (labels[i] == Label::Positive ? est.pos_scores : est.neg_scores).push_back(oof.scores[i]);

  auto above_zero = [](const std::vector<double>& v) {
    return static_cast<double>(std::count_if(v.begin(), v.end(), [](double s) { return s > 0.0; })) /
           static_cast<double>(v.size());
  };
  est.tpr = above_zero(est.pos_scores);
  est.fpr = above_zero(est.neg_scores);

  est.calibrator = fit_platt(oof.scores, labels);
  auto mean_prob = [&](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += est.calibrator.probability(x);
    return s / static_cast<double>(v.size());
  };
  est.expected_tpr = mean_prob(est.pos_scores);
  est.expected_fpr = mean_prob(est.neg_scores);
  est.threshold_table = threshold_table(est.pos_scores, est.neg_scores);
  return est;
}

}  // namespace quant::svm
