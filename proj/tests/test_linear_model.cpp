#include <gtest/gtest.h>

#include <sstream>

#include "quant/linear_model.hpp"

using namespace quant;

TEST(LinearModel, ScoreAndPredict) {
  LinearModel m{{1.0, -2.0, 0.5}, 0.25, 0.0};
  const SparseVector x({{0, 2.0}, {2, 1.0}});
  EXPECT_DOUBLE_EQ(m.score(x), 2.75);
  EXPECT_EQ(m.predict(x), Label::Positive);
  m.decision_threshold = 2.75;  // ties go negative
  EXPECT_EQ(m.predict(x), Label::Negative);
  // indices beyond the weight vector contribute nothing
  EXPECT_DOUBLE_EQ(m.score(SparseVector({{10, 3.0}})), 0.25);
}

TEST(LinearModel, TextRoundTripIsExact) {
  const LinearModel m{{0.1, -1.0 / 3.0, 1e-300, 123456.789, -0.0}, -2.0 / 7.0, 0.3 + 1e-17};
  std::stringstream ss;
  write_model(ss, m);
  const auto back = read_model(ss);
  EXPECT_EQ(back, m);
}

TEST(LinearModel, ReadRejectsMalformedFiles) {
  std::istringstream truncated("dim 3\nintercept 0\nthreshold 0\n1.0\n");
  EXPECT_THROW(read_model(truncated), data_error);
  std::istringstream bad("dim 1\nintercept x\nthreshold 0\n1.0\n");
  EXPECT_THROW(read_model(bad), data_error);
  std::istringstream wrong_key("size 1\n");
  EXPECT_THROW(read_model(wrong_key), data_error);
}
