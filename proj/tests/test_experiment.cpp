#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "quant/experiment.hpp"
#include "quant/synthetic.hpp"

using namespace quant;

namespace {

RunOptions options(std::vector<Method> methods) {
  RunOptions opt;
  opt.methods = std::move(methods);
  opt.quantifier.train.folds = 5;
  opt.quantifier.train.seed = 1;
  return opt;
}

ClassTask task_from(const synthetic::Generator& g, const std::string& id, double train_prev,
                    std::vector<double> test_prevs, std::uint64_t seed) {
  ClassTask t{id, g.sample(300, train_prev, seed), {}};
  for (std::size_t k = 0; k < test_prevs.size(); ++k)
    t.tests.push_back({id + "_t" + std::to_string(k), g.sample(200, test_prevs[k], seed * 100 + k)});
  return t;
}

const synthetic::Generator& noisy() {
  static const synthetic::Generator g({.dim = 8, .separation = 0.6, .noise = 1.0, .seed = 12});
  return g;
}

const synthetic::Generator& separable() {
  static const synthetic::Generator g({.dim = 5, .separation = 4.0, .noise = 0.2, .seed = 3});
  return g;
}

}  // namespace

TEST(RunExperiment, OneMethodOneTestSetGivesOneRow) {
  const std::vector<ClassTask> tasks{task_from(noisy(), "c", 0.2, {0.3}, 1)};
  const auto rep = run_experiment(tasks, options({Method::CC}));
  ASSERT_EQ(rep.rows.size(), 1u);
  EXPECT_EQ(rep.rows[0].test_size, 200u);
  EXPECT_FALSE(rep.rows[0].drift_quartile);
  EXPECT_TRUE(rep.failures.empty());
}

TEST(RunExperiment, PerfectEstimatesScoreZero) {
  const std::vector<ClassTask> tasks{task_from(separable(), "c", 0.3, {0.1, 0.3, 0.5, 0.7}, 2)};
  const auto rep = run_experiment(tasks, options({Method::CC, Method::ACC}));
  ASSERT_EQ(rep.rows.size(), 8u);
  for (const auto& r : rep.rows) {
    EXPECT_EQ(r.est_prev, r.true_prev);
    EXPECT_LT(r.kld, 1e-12);
  }
  for (const auto& s : rep.summaries) EXPECT_LT(s.kld, 1e-12);
  ASSERT_FALSE(rep.tests.empty());
  for (const auto& t : rep.tests) {
    EXPECT_EQ(t.p_value, 1.0);
    EXPECT_FALSE(t.significant);
  }
}

TEST(RunExperiment, RowsAreRecomputableAndGroupsPartition) {
  const std::vector<ClassTask> tasks{task_from(noisy(), "a", 0.04, {0.02, 0.1, 0.04}, 3),
                                     task_from(noisy(), "b", 0.2, {0.3, 0.15, 0.5}, 4)};
  const std::vector<Method> methods{Method::CC, Method::PACC, Method::MM_KS, Method::SVM_KLD};
  const auto rep = run_experiment(tasks, options(methods));
  ASSERT_EQ(rep.rows.size(), 6u * methods.size());

  std::set<std::tuple<std::string, std::string, Method>> keys;
  for (const auto& r : rep.rows) {
    keys.insert({r.class_id, r.test_set, r.method});
    const eval::KldConfig cfg = eval::KldConfig::for_test_size(r.test_size);
    EXPECT_NEAR(r.kld, eval::kld(Prevalence(r.true_prev), Prevalence(r.est_prev), cfg), 1e-12);
    EXPECT_TRUE(r.drift_quartile.has_value());
  }
  EXPECT_EQ(keys.size(), rep.rows.size());

  // per method, the bin groups and the quartile groups each cover every row once
  for (auto m : methods) {
    std::size_t bins = 0, quartiles = 0, all = 0;
    for (const auto& s : rep.summaries) {
      if (s.method != m) continue;
      if (s.group == "ALL") all = s.count;
      else if (s.group.ends_with("P")) bins += s.count;
      else quartiles += s.count;
    }
    EXPECT_EQ(all, 6u);
    EXPECT_EQ(bins, 6u);
    EXPECT_EQ(quartiles, 6u);
  }
  // six methods pairs per group that has rows for all methods
  std::size_t all_tests = 0;
  for (const auto& t : rep.tests) all_tests += t.group == "ALL";
  EXPECT_EQ(all_tests, 6u);
}

TEST(RunExperiment, FixedEpsilonOverridesTheDefault) {
  const std::vector<ClassTask> tasks{task_from(noisy(), "c", 0.2, {0.05}, 5)};
  auto opt = options({Method::CC});
  opt.fixed_epsilon = 0.01;
  const auto r = run_experiment(tasks, opt).rows.at(0);
  EXPECT_NEAR(r.kld, eval::kld(Prevalence(r.true_prev), Prevalence(r.est_prev), eval::KldConfig(0.01)), 1e-15);
}

TEST(RunExperiment, FailuresAreIsolatedPerMethod) {
  // one positive example: the classifier trains but cross-validation cannot
  ClassTask t{"rare", noisy().sample(100, 0.01, 6), {{"t", noisy().sample(50, 0.1, 7)}}};
  const std::vector<ClassTask> tasks{t};
  const auto rep = run_experiment(tasks, options({Method::CC, Method::ACC, Method::SVM_KLD}));
  ASSERT_EQ(rep.failures.size(), 1u);
  EXPECT_EQ(rep.failures[0].method, Method::ACC);
  EXPECT_EQ(rep.rows.size(), 2u);
}

TEST(RunExperiment, RejectsEmptyConfigurations) {
  const std::vector<ClassTask> tasks{task_from(noisy(), "c", 0.2, {0.3}, 1)};
  EXPECT_THROW(run_experiment(tasks, options({})), error);
  EXPECT_THROW(run_experiment(std::span<const ClassTask>{}, options({Method::CC})), error);
  ExperimentConfig cfg;
  cfg.train_path = "x";
  cfg.methods = {Method::CC};
  EXPECT_THROW(run_experiment(cfg), error);  // no test sets
}

TEST(RunExperiment, IsBitReproducible) {
  const std::vector<ClassTask> tasks{task_from(noisy(), "a", 0.1, {0.05, 0.2, 0.1, 0.3, 0.02}, 8)};
  std::vector<Method> all(kAllMethods.begin(), kAllMethods.end());
  std::ostringstream a, b;
  report::write_tsv(a, run_experiment(tasks, options(all)));
  report::write_tsv(b, run_experiment(tasks, options(all)));
  EXPECT_EQ(a.str(), b.str());
}

TEST(Invariance, IdenticalDistributionKeepsRatesClose) {
  const synthetic::Generator g({.dim = 8, .separation = 0.6, .noise = 1.0, .seed = 14});
  ClassTask t{"c", g.sample(2000, 0.3, 1), {}};
  for (int k = 0; k < 3; ++k) t.tests.push_back({"t" + std::to_string(k), g.sample(2000, 0.3, 10 + k)});
  svm::TrainConfig cfg;
  cfg.folds = 5;
  const std::vector<ClassTask> tasks{t};
  const auto row = invariance_study(tasks, cfg, "synthetic");
  ASSERT_TRUE(row.tpr_relative && row.fpr_relative);
  EXPECT_LT(std::abs(*row.tpr_relative), 0.1);
  EXPECT_EQ(row.tpr_test_sets, 3u);

  std::ostringstream out;
  const std::vector<InvarianceRow> rows{row};
  write_invariance_tsv(out, rows);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')),
            "dataset\tavg(tpr_Tr)\tavg(tpr_Te)\trel_%_diff\tavg(fpr_Tr)\tavg(fpr_Te)\trel_%_diff");
}

TEST(Invariance, UndefinedRelativeDifferenceIsBlank) {
  InvarianceRow r;
  r.dataset = "d";
  r.tpr_relative = -0.1929;
  std::ostringstream out;
  const std::vector<InvarianceRow> rows{r};
  write_invariance_tsv(out, rows);
  const auto line = out.str().substr(out.str().find('\n') + 1);
  EXPECT_NE(line.find("\t-19.29%\t"), std::string::npos);
  EXPECT_EQ(line.substr(line.size() - 2), "\t\n");
}
