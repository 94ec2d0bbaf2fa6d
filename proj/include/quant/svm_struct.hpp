#pragma once

// Structural SVM for losses computed from a contingency table.
//
// The joint feature map is psi(x, y) = (1/n) sum_i y_i x_i, so the best
// labeling of a set is the per-example sign of w.x_i. Training uses the
// 1-slack cutting-plane formulation
//
//   min  1/2 |w|^2 + C xi
//   s.t. w.(psi(x,y) - psi(x,y')) >= loss(y, y') - xi   for every labeling y'
//
// adding the most violated labeling at each round and re-solving the dual of
// the problem restricted to the working set.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "quant/core.hpp"
#include "quant/eval.hpp"
#include "quant/linear_model.hpp"

namespace quant::svm {

/// Shape of a loss as a function of (a, b) = (true positives, false
/// positives). Lets loss-augmented inference skip the full grid search.
enum class LossStructure {
  General,         // arbitrary function of the table
  PredictedCount,  // depends on a + b only (the predicted-positive count)
  Separable,       // f(a) + h(b)
};

struct MultivariateLoss {
  std::string name;
  std::function<double(const ContingencyTable&)> evaluate;
  LossStructure structure = LossStructure::General;

  double operator()(const ContingencyTable& t) const { return evaluate(t); }
};

/// Smoothed KLD between true and predicted prevalence of a table.
inline double delta_kld(const ContingencyTable& t, double eps) {
  if (t.total() == 0) throw error("delta_kld: empty table");
  return eval::kld(Prevalence(t.true_prevalence()), Prevalence(t.predicted_prevalence()),
                   eval::KldConfig(eps));
}

inline double delta_error_rate(const ContingencyTable& t) {
  if (t.total() == 0) throw error("delta_error_rate: empty table");
  return static_cast<double>(t.fp + t.fn) / static_cast<double>(t.total());
}

inline MultivariateLoss kld_loss(double eps) {
  eval::KldConfig check(eps);
  return {"kld", [eps](const ContingencyTable& t) { return delta_kld(t, eps); },
          LossStructure::PredictedCount};
}

/// KLD loss with eps = 1/(2n) for a training set of n examples.
inline MultivariateLoss kld_loss_for(std::size_t n) {
  return kld_loss(1.0 / (2.0 * static_cast<double>(n)));
}

inline MultivariateLoss error_rate_loss() {
  return {"error_rate", [](const ContingencyTable& t) { return delta_error_rate(t); },
          LossStructure::Separable};
}

inline MultivariateLoss zero_loss() {
  return {"zero", [](const ContingencyTable&) { return 0.0; }, LossStructure::Separable};
}

/// psi(x, y) = (1/n) sum y_i x_i as a dense vector of length `dim`.
inline std::vector<double> psi(std::span<const SparseVector> x, std::span<const Label> y,
                               std::size_t dim) {
  if (x.size() != y.size()) throw error("psi: input and label sequences differ in length");
  if (x.empty()) throw error("psi: empty input");
  std::vector<double> out(dim, 0.0);
  const double inv_n = 1.0 / static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i].extent() > dim) throw error("psi: feature index exceeds dimension");
    x[i].add_to(out, inv_n * sign_of(y[i]));
  }
  return out;
}

/// Per-example sign of the model score, ties negative. This is the
/// maximizer of w.psi(x, y') over all labelings.
inline std::vector<Label> classify_set(const LinearModel& model, std::span<const SparseVector> x) {
  std::vector<Label> out;
  out.reserve(x.size());
  for (const auto& xi : x) out.push_back(model.score(xi) > 0.0 ? Label::Positive : Label::Negative);
  return out;
}

struct Violation {
  std::vector<Label> labels;  // the maximizing labeling y'
  ContingencyTable table;     // of y' against the gold labels
  double loss = 0.0;          // loss(y, y')
  double objective = 0.0;     // loss(y, y') + w.psi(x, y')
  double violation = 0.0;     // loss(y, y') - w.(psi(x, y) - psi(x, y'))
};

/// w.psi(x, y) computed from per-example scores.
inline double joint_score(std::span<const double> scores, std::span<const Label> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) s += sign_of(y[i]) * scores[i];
  return s / static_cast<double>(scores.size());
}

/// Loss-augmented inference: argmax over labelings of loss + w.psi given
/// the per-example scores w.x_i. For a fixed count a of predicted positives
/// among the gold positives and b among the gold negatives, the score term
/// is maximized by the a (resp. b) highest-scoring examples, so only
/// (p+1)(g+1) candidates need evaluating. Ties: smaller a, then smaller b.
inline Violation most_violated(std::span<const double> scores, std::span<const Label> gold,
                               const MultivariateLoss& loss) {
  const std::size_t n = scores.size();
  if (n == 0) throw error("most_violated: empty input");
  if (gold.size() != n) throw error("most_violated: scores and labels differ in length");

  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < n; ++i) (gold[i] == Label::Positive ? pos : neg).push_back(i);
  auto by_score_desc = [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
  };
  std::sort(pos.begin(), pos.end(), by_score_desc);
  std::sort(neg.begin(), neg.end(), by_score_desc);
  const std::size_t p = pos.size(), g = neg.size();

  // prefix sums of sorted scores
  std::vector<double> pp(p + 1, 0.0), np(g + 1, 0.0);
  for (std::size_t k = 0; k < p; ++k) pp[k + 1] = pp[k] + scores[pos[k]];
  for (std::size_t k = 0; k < g; ++k) np[k + 1] = np[k] + scores[neg[k]];
  const double total = pp[p] + np[g];
  const double inv_n = 1.0 / static_cast<double>(n);

  auto table_of = [&](std::size_t a, std::size_t b) {
    return ContingencyTable{a, b, p - a, g - b};
  };
  auto objective_of = [&](std::size_t a, std::size_t b, double delta) {
    return delta + (2.0 * (pp[a] + np[b]) - total) * inv_n;
  };

  std::size_t best_a = 0, best_b = 0;
  double best = -std::numeric_limits<double>::infinity();
  double best_delta = 0.0;
  auto consider = [&](std::size_t a, std::size_t b) {
    const double d = loss(table_of(a, b));
    const double v = objective_of(a, b, d);
    if (v > best) {
      best = v;
      best_a = a;
      best_b = b;
      best_delta = d;
    }
  };

  switch (loss.structure) {
    case LossStructure::General:
      for (std::size_t a = 0; a <= p; ++a)
        for (std::size_t b = 0; b <= g; ++b) consider(a, b);
      break;
    case LossStructure::Separable: {
      // maximize over a with b fixed, then over b with that a
      double bv = -std::numeric_limits<double>::infinity();
      std::size_t ba = 0;
      for (std::size_t a = 0; a <= p; ++a) {
        const double v = loss(table_of(a, 0)) + 2.0 * pp[a] * inv_n;
        if (v > bv) {
          bv = v;
          ba = a;
        }
      }
      bv = -std::numeric_limits<double>::infinity();
      std::size_t bb = 0;
      for (std::size_t b = 0; b <= g; ++b) {
        const double v = loss(table_of(ba, b)) + 2.0 * np[b] * inv_n;
        if (v > bv) {
          bv = v;
          bb = b;
        }
      }
      consider(ba, bb);
      break;
    }
    case LossStructure::PredictedCount: {
      // For each total k the best split takes the k highest scores overall;
      // on equal scores negatives go first, which keeps a minimal.
      std::size_t a = 0, b = 0;
      consider(0, 0);
      for (std::size_t k = 1; k <= n; ++k) {
        if (b < g && (a == p || scores[neg[b]] >= scores[pos[a]]))
          ++b;
        else
          ++a;
        consider(a, b);
      }
      break;
    }
  }

  Violation out;
  out.labels.assign(n, Label::Negative);
  for (std::size_t k = 0; k < best_a; ++k) out.labels[pos[k]] = Label::Positive;
  for (std::size_t k = 0; k < best_b; ++k) out.labels[neg[k]] = Label::Positive;
  out.table = table_of(best_a, best_b);
  out.loss = best_delta;
  out.objective = best;
  out.violation = best - joint_score(scores, gold);
  return out;
}

inline Violation most_violated(const LinearModel& model, std::span<const SparseVector> x,
                               std::span<const Label> gold, const MultivariateLoss& loss) {
  return most_violated(model.scores(x), gold, loss);
}

struct StructTrainConfig {
  double c_regularization = 1.0;
  double tolerance = 1e-3;
  int max_iterations = 10000;
  // Value of the constant feature appended to every example; 0 disables
  // the intercept.
  double bias_feature = 1.0;
};

/// One entry per cutting-plane round, recorded after the re-solve.
struct CuttingPlaneRound {
  double dual_objective;        // restricted dual optimum (lower bound)
  double restricted_primal;     // 1/2|w|^2 + C * max working-set violation
  double slack;                 // xi at the restricted solution
  double working_set_excess;    // max_j violation_j - xi; <= 0 up to solver accuracy
  double full_primal;           // 1/2|w|^2 + C * max(0, most violated) before this round
};

struct StructTrainResult {
  LinearModel model;
  bool converged = false;
  int iterations = 0;
  std::size_t constraints = 0;
  double slack = 0.0;
  std::vector<CuttingPlaneRound> rounds;
};

namespace detail {

// Dual of the restricted 1-slack problem:
//   max sum_j a_j d_j - 1/2 |sum_j a_j g_j|^2   s.t. a >= 0, sum_j a_j <= C
// The inequality is turned into an equality with an extra variable whose
// loss and feature vector are zero. Solved by pairwise (SMO) ascent.
class OneSlackDual {
 public:
  explicit OneSlackDual(double c) : c_(c), idle_(c) {}

  std::size_t size() const noexcept { return delta_.size(); }
  std::span<const double> alphas() const noexcept { return alpha_; }

  /// `gram_row` holds g_new . g_j for all existing j followed by |g_new|^2.
  void add(double delta, std::vector<double> gram_row) {
    const std::size_t k = delta_.size();
    for (std::size_t j = 0; j < k; ++j) gram_[j].push_back(gram_row[j]);
    gram_.push_back(std::move(gram_row));
    delta_.push_back(delta);
    alpha_.push_back(0.0);
    double ga = 0.0;
    for (std::size_t j = 0; j < k; ++j) ga += gram_[k][j] * alpha_[j];
    grad_.push_back(delta - ga);
  }

  /// Gradient d_j - (G a)_j, i.e. the violation of constraint j at the
  /// current w.
  double gradient(std::size_t j) const { return grad_[j]; }

  void solve(double tol, long max_steps) {
    const std::size_t k = delta_.size();
    constexpr std::size_t kIdle = std::numeric_limits<std::size_t>::max();
    for (long step = 0; step < max_steps; ++step) {
      // up: largest gradient (idle variable has gradient 0)
      std::size_t up = kIdle;
      double gup = 0.0;
      for (std::size_t j = 0; j < k; ++j)
        if (grad_[j] > gup) {
          gup = grad_[j];
          up = j;
        }
      // down: smallest gradient among variables holding mass
      std::size_t down = kIdle;
      double gdown = idle_ > 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < k; ++j)
        if (alpha_[j] > 0.0 && grad_[j] < gdown) {
          gdown = grad_[j];
          down = j;
        }
      if (up == down || gup - gdown <= tol) return;

      auto g = [&](std::size_t i, std::size_t j) {
        return (i == kIdle || j == kIdle) ? 0.0 : gram_[i][j];
      };
      const double eta = g(up, up) + g(down, down) - 2.0 * g(up, down);
      const double avail = down == kIdle ? idle_ : alpha_[down];
      double t = eta > 1e-300 ? (gup - gdown) / eta : avail;
      if (t >= avail) t = avail;
      if (t <= 0.0) return;

      if (up != kIdle) alpha_[up] += t; else idle_ += t;
      if (down != kIdle) {
        alpha_[down] -= t;
        if (alpha_[down] < 1e-15 * c_) {
          if (up != kIdle) alpha_[up] += alpha_[down]; else idle_ += alpha_[down];
          alpha_[down] = 0.0;
        }
      } else {
        idle_ -= t;
        if (idle_ < 1e-15 * c_) idle_ = 0.0;
      }
      for (std::size_t j = 0; j < k; ++j) grad_[j] -= t * (g(j, up) - g(j, down));
    }
  }

  /// xi from complementary slackness: the common violation of the active
  /// constraints, zero while the idle variable holds mass.
  double slack() const {
    if (idle_ > 0.0) return 0.0;
    double xi = 0.0;
    for (std::size_t j = 0; j < delta_.size(); ++j)
      if (alpha_[j] > 0.0) xi = std::max(xi, grad_[j]);
    return xi;
  }

  double max_gradient() const {
    double m = 0.0;
    for (double v : grad_) m = std::max(m, v);
    return m;
  }

  double dual_objective(double w_norm2) const {
    double s = 0.0;
    for (std::size_t j = 0; j < delta_.size(); ++j) s += alpha_[j] * delta_[j];
    return s - 0.5 * w_norm2;
  }

 private:
  double c_;
  double idle_;
  std::vector<double> delta_;
  std::vector<double> alpha_;
  std::vector<double> grad_;
  std::vector<std::vector<double>> gram_;
};

}  // namespace detail

/// Cutting-plane training of the structural SVM. Stops when the most
/// violated labeling exceeds the current slack by at most cfg.tolerance, or
/// after cfg.max_iterations rounds (converged = false).
inline StructTrainResult train_struct(const LabeledDataset& data, const MultivariateLoss& loss,
                                      const StructTrainConfig& cfg = {}) {
  if (!(cfg.c_regularization > 0.0)) throw error("C must be positive");
  if (!(cfg.tolerance > 0.0)) throw error("tolerance must be positive");
  if (cfg.max_iterations <= 0) throw error("max_iterations must be positive");
  if (data.count(Label::Positive) == 0 || data.count(Label::Negative) == 0)
    throw error("training set must contain both classes");

  const std::size_t n = data.size();
  const std::size_t dim = data.dimensionality();
  const bool use_bias = cfg.bias_feature != 0.0;
  const std::size_t full_dim = dim + (use_bias ? 1 : 0);
  const auto xs = data.vectors();
  const auto gold = data.labels();
  const double inv_n = 1.0 / static_cast<double>(n);

  std::vector<double> w(full_dim, 0.0);
  std::vector<std::vector<double>> planes;  // g_j = psi(x,y) - psi(x,y'_j)
  detail::OneSlackDual dual(cfg.c_regularization);
  StructTrainResult result;

  auto scores_of = [&] {
    std::vector<double> s(n);
    const double b = use_bias ? w[dim] * cfg.bias_feature : 0.0;
    for (std::size_t i = 0; i < n; ++i) s[i] = xs[i].dot(std::span<const double>(w).first(dim)) + b;
    return s;
  };
  auto norm2 = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
  };

  double xi = 0.0;
  for (int it = 0; it < cfg.max_iterations; ++it) {
    const auto scores = scores_of();
    const Violation v = most_violated(scores, gold, loss);
    const double full_primal =
        0.5 * norm2(w) + cfg.c_regularization * std::max(0.0, v.violation);
    if (v.violation <= xi + cfg.tolerance) {
      result.converged = true;
      break;
    }

    // g = (2/n) sum over flipped examples of y_i x_i
    std::vector<double> plane(full_dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (v.labels[i] == gold[i]) continue;
      const double s = 2.0 * inv_n * sign_of(gold[i]);
      xs[i].add_to(plane, s);
      if (use_bias) plane[dim] += s * cfg.bias_feature;
    }
    std::vector<double> row;
    row.reserve(planes.size() + 1);
    for (const auto& q : planes) row.push_back(std::inner_product(q.begin(), q.end(), plane.begin(), 0.0));
    row.push_back(norm2(plane));
    dual.add(v.loss, std::move(row));
    planes.push_back(std::move(plane));

    dual.solve(1e-10, 1'000'000);

    std::fill(w.begin(), w.end(), 0.0);
    const auto alpha = dual.alphas();
    for (std::size_t j = 0; j < planes.size(); ++j)
      if (alpha[j] > 0.0)
        for (std::size_t d = 0; d < full_dim; ++d) w[d] += alpha[j] * planes[j][d];

    xi = dual.slack();
    const double wn = norm2(w);
    result.rounds.push_back({dual.dual_objective(wn),
                             0.5 * wn + cfg.c_regularization * dual.max_gradient(), xi,
                             dual.max_gradient() - xi, full_primal});
    result.iterations = it + 1;
  }

  result.model.weights.assign(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(dim));
  result.model.intercept = use_bias ? w[dim] * cfg.bias_feature : 0.0;
  result.constraints = planes.size();
  result.slack = xi;
  return result;
}

}  // namespace quant::svm
