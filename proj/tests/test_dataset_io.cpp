#include <gtest/gtest.h>

#include <sstream>

#include "quant/bundle.hpp"
#include "quant/dataset_io.hpp"
#include "quant/synthetic.hpp"

using namespace quant;

namespace {
LabeledDataset parse(const std::string& text) {
  std::istringstream in(text);
  return io::parse_dataset(in, "mem");
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const data_error& e) {
    return e.what();
  }
  return "";
}
}  // namespace

TEST(DatasetIo, ParsesLabelsAndFeatures) {
  const auto d = parse("+1 1:0.5 7:0.25\n-1\n\n# comment\n-1 2:1e-3  # trailing\n");
  ASSERT_EQ(d.size(), 3u);
  EXPECT_EQ(d[0].y, Label::Positive);
  EXPECT_EQ(d[0].x.nnz(), 2u);
  EXPECT_EQ(d[0].x.entries()[1], (SparseEntry{7, 0.25}));
  EXPECT_EQ(d[1].y, Label::Negative);
  EXPECT_TRUE(d[1].x.empty());
  EXPECT_EQ(d[2].x.entries()[0].weight, 1e-3);
  EXPECT_EQ(d.dimensionality(), 8u);
}

TEST(DatasetIo, HonorsDimHeaderAndDropsZeros) {
  const auto d = parse("# dim 100\n1 3:0 4:2\n");
  EXPECT_EQ(d.dimensionality(), 100u);
  EXPECT_EQ(d[0].x.nnz(), 1u);
  EXPECT_NE(error_of("# dim 3\n1 5:1\n"), "");
}

TEST(DatasetIo, ErrorsCarryLineNumbers) {
  EXPECT_NE(error_of("1 1:1\n2 1:1\n").find("mem:2:"), std::string::npos);
  EXPECT_NE(error_of("1 3:1 2:1\n").find("ascending"), std::string::npos);
  EXPECT_NE(error_of("1 3:1 3:2\n").find("ascending"), std::string::npos);
  EXPECT_NE(error_of("-1 a:1\n").find("mem:1:"), std::string::npos);
  EXPECT_NE(error_of("-1 1:x\n").find("mem:1:"), std::string::npos);
  EXPECT_NE(error_of("-1 1-2\n").find("mem:1:"), std::string::npos);
  EXPECT_NE(error_of("# only comments\n"), "");
  EXPECT_THROW(io::load_dataset("/nonexistent/file.dat"), data_error);
}

TEST(DatasetIo, RoundTripIsBitExact) {
  const synthetic::Generator gen({.dim = 8, .separation = 1.0, .noise = 1.0, .seed = 5});
  const auto d = gen.sample(50, 0.3, 2);
  std::stringstream ss;
  io::write_dataset(ss, d);
  const auto back = io::parse_dataset(ss);
  ASSERT_EQ(back.size(), d.size());
  EXPECT_EQ(back.dimensionality(), d.dimensionality());
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_EQ(back[i].y, d[i].y);
    EXPECT_EQ(back[i].x, d[i].x);
  }
}

TEST(Bundle, RoundTripPreservesEstimates) {
  const synthetic::Generator gen({.dim = 6, .separation = 0.8, .noise = 1.0, .seed = 9});
  const auto train = gen.sample(200, 0.3, 1);
  const auto test = gen.sample(200, 0.5, 2).vectors();
  QuantifierConfig cfg;
  cfg.train.folds = 5;
  const auto base = fit_baseline(train, cfg.train);
  std::vector<Quantifier> qs;
  for (auto m : kAllMethods)
    qs.push_back(m == Method::SVM_KLD ? Quantifier::fit(m, train, cfg) : Quantifier::from_baseline(m, base, cfg));
  std::stringstream ss;
  io::write_bundle(ss, qs);
  const auto back = io::read_bundle(ss);
  ASSERT_EQ(back.size(), qs.size());
  for (std::size_t i = 0; i < qs.size(); ++i) {
    EXPECT_EQ(back[i].method(), qs[i].method());
    EXPECT_EQ(back[i].model(), qs[i].model());
    EXPECT_EQ(back[i].estimate(test).prevalence, qs[i].estimate(test).prevalence);
  }
}

TEST(Bundle, MalformedInputIsADataError) {
  std::istringstream bad("{\"quantifiers\": [{\"method\": \"CC\"}]}");
  EXPECT_THROW(io::read_bundle(bad), data_error);
  std::istringstream garbage("not json");
  EXPECT_THROW(io::read_bundle(garbage), data_error);
  std::istringstream unknown("{\"quantifiers\": [{\"method\": \"XYZ\"}]}");
  EXPECT_THROW(io::read_bundle(unknown), data_error);
}
