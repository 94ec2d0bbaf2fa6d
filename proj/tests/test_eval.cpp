#include <gtest/gtest.h>

#include <cmath>

#include "quant/eval.hpp"

using namespace quant;
using namespace quant::eval;

namespace {
Prevalence P(double v) { return Prevalence(v); }
}  // namespace

TEST(Kld, MatchesOracleValues) {
  EXPECT_NEAR(kld(P(0.3), P(0.2), KldConfig(1e-4)), 0.028151624918256364762, 1e-14);
  EXPECT_NEAR(kld(P(0.01), P(0.0), KldConfig(0.005)), 0.0064644568436744618753, 1e-15);
}

TEST(Kld, ZeroAtEqualityAndFiniteAtBoundaries) {
  const KldConfig cfg(1e-3);
  for (double p : {0.0, 0.1, 0.5, 1.0}) EXPECT_LT(kld(P(p), P(p), cfg), 1e-12);
  EXPECT_TRUE(std::isfinite(kld(P(0.5), P(0.0), cfg)));
  EXPECT_TRUE(std::isfinite(kld(P(0.5), P(1.0), cfg)));
  EXPECT_TRUE(std::isfinite(kld(P(1.0), P(0.0), cfg)));
}

TEST(Kld, ComplementSymmetricAndNonNegative) {
  const KldConfig cfg(0.005);
  for (int i = 0; i <= 20; ++i)
    for (int j = 0; j <= 20; ++j) {
      const double p = i / 20.0, q = j / 20.0;
      const double a = kld(P(p), P(q), cfg);
      EXPECT_GE(a, 0.0);
      EXPECT_NEAR(a, kld(P(1 - p), P(1 - q), cfg), 1e-12);
    }
}

TEST(Kld, ConfigRejectsNonPositiveEpsilon) {
  EXPECT_THROW(KldConfig(0.0), error);
  EXPECT_THROW(KldConfig(-1.0), error);
  EXPECT_DOUBLE_EQ(KldConfig::for_test_size(100).epsilon, 0.005);
  EXPECT_THROW(KldConfig::for_test_size(0), error);
}

TEST(ErrorMeasures, AbsoluteBiasAndRae) {
  EXPECT_NEAR(absolute_error(P(0.2), P(0.05)), 0.15, 1e-15);
  EXPECT_NEAR(bias(P(0.2), P(0.05)), -0.15, 1e-15);
  EXPECT_EQ(relative_absolute_error(P(0.01), P(0.10)), 9.0);
  EXPECT_THROW(relative_absolute_error(P(0.0), P(0.1)), error);
  const double smoothed = relative_absolute_error(P(0.0), P(0.1), 0.005);
  EXPECT_NEAR(smoothed, 0.1 / 0.005, 1e-9);
}

TEST(F1, Conventions) {
  EXPECT_DOUBLE_EQ(f1({1, 0, 1, 0}), 2.0 / 3.0);
  EXPECT_EQ(f1({0, 0, 0, 2}), 1.0);
  EXPECT_THROW(f1({}), error);
  const std::vector<ContingencyTable> tables{{1, 0, 1, 0}, {0, 0, 0, 2}};
  EXPECT_DOUBLE_EQ(micro_f1(tables), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(macro_f1(tables), 5.0 / 6.0);
}

TEST(Aggregates, MacroaverageAndPopulationVariance) {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  EXPECT_DOUBLE_EQ(macroaverage(v), 2.5);
  EXPECT_DOUBLE_EQ(variance(v), 1.25);
  EXPECT_THROW(macroaverage(std::span<const double>{}), error);
}

TEST(PairedTTest, MatchesOracleValues) {
  const std::vector<double> a{1, 2, 3, 4}, b{2, 3, 4, 6};
  EXPECT_NEAR(paired_t_test(a, b), 0.015392438073302296, 1e-12);
  const std::vector<double> c{0.1, 0.5, 0.3, 0.9, 0.7}, d{0.2, 0.4, 0.35, 0.6, 0.65};
  EXPECT_NEAR(paired_t_test(c, d), 0.43751978747715914, 1e-12);
}

TEST(PairedTTest, DegenerateDifferences) {
  const std::vector<double> a{0.1, 0.2, 0.3};
  EXPECT_EQ(paired_t_test(a, a), 1.0);
  const std::vector<double> shifted{1.1, 1.2, 1.3};
  EXPECT_EQ(paired_t_test(a, shifted), 0.0);
  EXPECT_THROW(paired_t_test(std::span<const double>(a).first(1), std::span<const double>(a).first(1)), error);
}

TEST(Grouping, PrevalenceBins) {
  EXPECT_EQ(prevalence_bin(P(0.0)), PrevalenceBin::VLP);
  EXPECT_EQ(prevalence_bin(P(0.0099)), PrevalenceBin::VLP);
  EXPECT_EQ(prevalence_bin(P(0.01)), PrevalenceBin::LP);
  EXPECT_EQ(prevalence_bin(P(0.05)), PrevalenceBin::HP);
  EXPECT_EQ(prevalence_bin(P(0.10)), PrevalenceBin::VHP);
  EXPECT_EQ(to_string(PrevalenceBin::HP), "HP");
}

TEST(Grouping, DriftQuartilesPartitionByKld) {
  // train 0.5 throughout; drift grows with |test - 0.5|
  std::vector<PrevalencePair> pairs;
  for (double t : {0.9, 0.5, 0.6, 0.1, 0.45, 0.7, 0.55, 0.3, 0.52})
    pairs.push_back({P(0.5), P(t)});
  const auto q = drift_quartiles(pairs, KldConfig(1e-3));
  ASSERT_EQ(q.size(), pairs.size());
  // nine pairs: quartile sizes 3, 2, 2, 2
  int counts[4] = {0, 0, 0, 0};
  for (auto x : q) ++counts[static_cast<int>(x)];
  EXPECT_EQ(counts[0], 3);
  EXPECT_EQ(counts[1], 2);
  EXPECT_EQ(counts[2], 2);
  EXPECT_EQ(counts[3], 2);
  EXPECT_EQ(q[1], DriftQuartile::VLD);  // 0.5
  EXPECT_EQ(q[8], DriftQuartile::VLD);  // 0.52
  EXPECT_EQ(q[0], DriftQuartile::VHD);  // 0.9
  EXPECT_EQ(q[3], DriftQuartile::VHD);  // 0.1
  EXPECT_THROW(drift_quartiles(std::span<const PrevalencePair>(pairs).first(3), KldConfig(1e-3)), error);
}
