#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "quant/svm_linear.hpp"
#include "quant/synthetic.hpp"

using namespace quant;
using namespace quant::svm;

namespace {
const synthetic::Generator& gen() {
  static const synthetic::Generator g({.dim = 10, .separation = 0.6, .noise = 1.0, .seed = 21});
  return g;
}
}  // namespace

TEST(StructConfig, ScalesPerExampleC) {
  TrainConfig cfg;
  cfg.c_regularization = 2.0;
  EXPECT_DOUBLE_EQ(struct_config_for(cfg, 400).c_regularization, 200.0);
}

TEST(Train, RequiresBothClassesAndPositiveC) {
  EXPECT_THROW(train(gen().sample(20, 0.0, 1)), error);
  TrainConfig cfg;
  cfg.c_regularization = -1.0;
  EXPECT_THROW(train(gen().sample(20, 0.5, 1), cfg), error);
}

TEST(Train, BeatsChanceOnHeldOutData) {
  const auto model = train(gen().sample(400, 0.3, 1));
  const auto test = gen().sample(400, 0.3, 2);
  std::size_t correct = 0;
  for (const auto& ex : test.examples()) correct += predict(model, ex.x) == ex.y;
  EXPECT_GT(correct, 320u);
}

TEST(Platt, RecoversLogisticParameters) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z(0.0, 2.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> s;
  std::vector<Label> y;
  for (int i = 0; i < 20000; ++i) {
    const double x = z(rng);
    const double p = 1.0 / (1.0 + std::exp(-(1.5 * x - 0.5)));
    s.push_back(x);
    y.push_back(u(rng) < p ? Label::Positive : Label::Negative);
  }
  const auto c = fit_platt(s, y);
  EXPECT_NEAR(c.slope, 1.5, 0.08);
  EXPECT_NEAR(c.intercept, -0.5, 0.06);
  EXPECT_GT(c.probability(1.0), c.probability(0.0));
  EXPECT_NEAR(c.probability(1e6), 1.0, 1e-12);
  EXPECT_NEAR(c.probability(-1e6), 0.0, 1e-12);
}

TEST(Platt, RejectsDegenerateInput) {
  const std::vector<double> same{1.0, 1.0};
  const std::vector<Label> y{Label::Positive, Label::Negative};
  EXPECT_THROW(fit_platt(same, y), error);
  const std::vector<double> s{0.0, 1.0};
  const std::vector<Label> one{Label::Positive, Label::Positive};
  EXPECT_THROW(fit_platt(s, one), error);
}

TEST(ThresholdTable, EnumeratesAchievableRates) {
  const std::vector<double> pos{0.5, 2.0}, neg{-1.0, 0.5};
  const auto t = threshold_table(pos, neg);
  ASSERT_EQ(t.size(), 4u);
  EXPECT_TRUE(std::isinf(t[0].threshold) && t[0].threshold < 0);
  EXPECT_EQ(t[0].tpr, 1.0);
  EXPECT_EQ(t[0].fpr, 1.0);
  EXPECT_EQ(t[1].threshold, -0.25);
  EXPECT_EQ(t[1].tpr, 1.0);
  EXPECT_EQ(t[1].fpr, 0.5);
  EXPECT_EQ(t[2].threshold, 1.25);
  EXPECT_EQ(t[2].tpr, 0.5);
  EXPECT_EQ(t[2].fpr, 0.0);
  EXPECT_TRUE(std::isinf(t[3].threshold) && t[3].threshold > 0);
  EXPECT_EQ(t[3].tpr, 0.0);
}

TEST(CrossValidation, DeterministicAndConsistent) {
  const auto data = gen().sample(300, 0.2, 5);
  TrainConfig cfg;
  cfg.folds = 10;
  cfg.seed = 17;
  const auto a = cv_estimates(data, cfg);
  const auto b = cv_estimates(data, cfg);
  EXPECT_EQ(a.pos_scores, b.pos_scores);
  EXPECT_EQ(a.neg_scores, b.neg_scores);
  EXPECT_EQ(a.folds_used, 10);
  EXPECT_FALSE(a.folds_reduced);
  EXPECT_EQ(a.pos_scores.size(), 60u);
  EXPECT_EQ(a.neg_scores.size(), 240u);

  std::size_t above = 0;
  for (double s : a.pos_scores) above += s > 0.0;
  EXPECT_DOUBLE_EQ(a.tpr, above / 60.0);
  EXPECT_GT(a.expected_tpr, a.expected_fpr);
  EXPECT_GT(a.tpr, a.fpr);

  cfg.threads = 1;
  const auto serial = cv_estimates(data, cfg);
  EXPECT_EQ(serial.pos_scores, a.pos_scores);
}

TEST(CrossValidation, ReducesFoldsToMinorityCount) {
  const auto data = gen().sample(100, 0.05, 6);  // five positives
  TrainConfig cfg;
  cfg.folds = 50;
  const auto oof = out_of_fold_scores(data, cfg);
  EXPECT_EQ(oof.folds_used, 5);
  EXPECT_TRUE(oof.folds_reduced);

  const auto tiny = gen().sample(40, 0.025, 6);  // one positive
  EXPECT_THROW(out_of_fold_scores(tiny, cfg), error);
  cfg.folds = 1;
  EXPECT_THROW(out_of_fold_scores(data, cfg), error);
}

TEST(ThresholdTable, RatesNonIncreasingInThreshold) {
  const auto cv = [] {
    TrainConfig cfg;
    cfg.folds = 5;
    return cv_estimates(gen().sample(200, 0.3, 8), cfg);
  }();
  const auto& t = cv.threshold_table;
  ASSERT_GT(t.size(), 3u);
  for (std::size_t k = 1; k < t.size(); ++k) {
    EXPECT_LT(t[k - 1].threshold, t[k].threshold);
    EXPECT_LE(t[k].tpr, t[k - 1].tpr);
    EXPECT_LE(t[k].fpr, t[k - 1].fpr);
  }
}
