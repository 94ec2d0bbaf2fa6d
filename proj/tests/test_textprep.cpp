#include <gtest/gtest.h>

#include <cmath>

#include "quant/textprep.hpp"

using namespace quant;
using namespace quant::text;

TEST(Tokenize, DefaultsLowercaseAndStrip) {
  EXPECT_EQ(tokenize("The Cat, sat on 2 mats!"), (Terms{"the", "cat", "sat", "on", "mats"}));
}

TEST(Tokenize, StopwordsAndStemmer) {
  TokenizerConfig cfg;
  cfg.stopwords = std::unordered_set<std::string>{"the", "on"};
  cfg.stemmer = [](std::string_view w) {
    std::string s(w);
    if (s.size() > 3 && s.back() == 's') s.pop_back();
    return s;
  };
  EXPECT_EQ(tokenize("The cats sat on the mats", cfg), (Terms{"cat", "sat", "mat"}));
}

TEST(Tokenize, KeepsPunctuationWhenAsked) {
  TokenizerConfig cfg;
  cfg.lowercase = false;
  cfg.strip_punctuation = false;
  cfg.strip_numbers = false;
  const auto t = tokenize("Hi, 42", cfg);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0], "Hi,");
  EXPECT_EQ(t[1], "42");
}

TEST(Vocabulary, FirstOccurrenceOrderAndDf) {
  const std::vector<Terms> docs{{"b", "a", "b"}, {"a", "c"}, {"a"}};
  const auto v = build_vocabulary(docs);
  EXPECT_EQ(v.size(), 3u);
  EXPECT_EQ(v.index_of("b"), 0u);
  EXPECT_EQ(v.index_of("a"), 1u);
  EXPECT_EQ(v.index_of("c"), 2u);
  EXPECT_FALSE(v.index_of("zzz"));
  EXPECT_EQ(v.document_frequency(0), 1u);
  EXPECT_EQ(v.document_frequency(1), 3u);
  EXPECT_EQ(v.idf(1), 0.0);
  EXPECT_DOUBLE_EQ(v.idf(2), std::log(3.0));
  EXPECT_THROW(build_vocabulary(std::span<const Terms>{}), error);
}

TEST(Vectorize, LtcWeightsMatchOracle) {
  // Ten training documents; "a" and "b" each occur in exactly one.
  std::vector<Terms> docs(10, Terms{"filler"});
  docs[0] = {"a", "filler"};
  docs[1] = {"b", "filler"};
  const auto v = build_vocabulary(docs);
  const auto x = vectorize({"a", "a", "b"}, v);
  ASSERT_EQ(x.nnz(), 2u);
  EXPECT_NEAR(x.entries()[0].weight, 0.86103699594397640693, 1e-15);
  EXPECT_NEAR(x.entries()[1].weight, 0.50854232037832677959, 1e-15);
}

TEST(Vectorize, UbiquitousTermsVanishAndAllZeroIsEmpty) {
  const std::vector<Terms> docs{{"x", "y"}, {"x"}, {"x", "z"}};
  const auto v = build_vocabulary(docs);
  const auto only_x = vectorize({"x", "x"}, v);
  EXPECT_TRUE(only_x.empty());
  const auto mixed = vectorize({"x", "y", "unknown"}, v);
  ASSERT_EQ(mixed.nnz(), 1u);
  EXPECT_EQ(mixed.entries()[0].index, *v.index_of("y"));
  EXPECT_NEAR(mixed.squared_norm(), 1.0, 1e-12);
}

TEST(Tokenize, StopwordsApplyAfterLowercasing) {
  TokenizerConfig cfg;
  cfg.stopwords = std::unordered_set<std::string>{"the"};
  EXPECT_EQ(tokenize("The CAT, the cat!", cfg), (Terms{"cat", "cat"}));
}
