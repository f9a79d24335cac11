#include <cmath>

#include <gtest/gtest.h>

#include "faithkit/error.hpp"
#include "faithkit/genprob.hpp"
#include "faithkit/rng.hpp"
#include "faithkit/stubs.hpp"
#include "test_util.hpp"

using namespace faithkit;

namespace {

GenProbConfig config(Aggregation agg) {
  GenProbConfig cfg;
  cfg.aggregation = agg;
  return cfg;
}

class PromptEchoScorer final : public ConditionalScorer {
 public:
  std::vector<Segment> segment(std::string_view t) const override { return whitespace_segments(t); }
  std::vector<double> token_logprobs(std::string_view source, std::string_view t) const override {
    // Longer conditioning text => lower probability, so the template matters.
    return std::vector<double>(whitespace_segments(t).size(),
                               -static_cast<double>(source.size()) / 100.0);
  }
};

}  // namespace

TEST(GenProb, CertainScorerGivesZero) {
  const auto s = make_table_scorer({}, 1.0);
  EXPECT_EQ(genprob_score("src", "a b c", *s, config(Aggregation::kMean)).value, 0.0);
  EXPECT_EQ(genprob_score("src", "a b c", *s, config(Aggregation::kSum)).value, 0.0);
}

TEST(GenProb, HalfProbabilityFourTokens) {
  const auto s = make_table_scorer({}, 0.5);
  const auto mean = genprob_score("src", "a b c d", *s, config(Aggregation::kMean));
  const auto sum = genprob_score("src", "a b c d", *s, config(Aggregation::kSum));
  EXPECT_NEAR(mean.value, -0.6931, 1e-4);
  EXPECT_NEAR(sum.value, -2.7726, 1e-4);
  EXPECT_EQ(mean.token_count, 4u);
}

TEST(GenProb, LoweringOneTokenLowersScore) {
  const auto base = make_table_scorer({}, 0.5);
  ProbabilityTable table;
  table[{"src", {"a", "b"}}] = 0.4;
  const auto lowered = make_table_scorer(table, 0.5);
  for (auto agg : {Aggregation::kMean, Aggregation::kSum}) {
    EXPECT_LT(genprob_score("src", "a b c", *lowered, config(agg)).value,
              genprob_score("src", "a b c", *base, config(agg)).value);
  }
}

TEST(GenProb, EmptyHypothesisIsAnError) {
  const auto s = make_table_scorer({}, 0.5);
  EXPECT_THROW(genprob_score("src", "", *s, {}), DataError);
  EXPECT_THROW(genprob_score("src", "   ", *s, {}), DataError);
}

TEST(GenProb, SumEqualsMeanTimesCount) {
  const auto s = make_overlap_scorer(0.7, 0.05);
  Rng rng(4);
  const std::vector<std::string> words = {"amanda", "baked", "cookies", "jerry", "pizza", "the"};
  for (int i = 0; i < 50; ++i) {
    std::string hyp;
    const auto len = 1 + uniform_index(rng, 8);
    for (std::size_t k = 0; k < len; ++k) hyp += words[uniform_index(rng, words.size())] + " ";
    const auto mean = genprob_score("amanda baked cookies", hyp, *s, config(Aggregation::kMean));
    const auto sum = genprob_score("amanda baked cookies", hyp, *s, config(Aggregation::kSum));
    EXPECT_DOUBLE_EQ(sum.value, mean.value * static_cast<double>(mean.token_count));
  }
}

TEST(GenProb, ProbabilityFloorBoundsMean) {
  const auto s = make_table_scorer({}, 1e-9);
  GenProbConfig cfg;
  cfg.prob_floor = 1e-3;
  EXPECT_GE(genprob_score("src", "a b", *s, cfg).value, std::log(1e-3));
}

TEST(GenProb, IdentityTemplateMakesModesCoincide) {
  PromptEchoScorer scorer;
  GenProbConfig bart;
  GenProbConfig t0;
  t0.prompt_template = std::string(kIdentityTemplate);
  EXPECT_EQ(genprob_score("some source", "a b", scorer, bart).value,
            genprob_score("some source", "a b", scorer, t0).value);
  t0.prompt_template = std::string(kDefaultPromptTemplate);
  EXPECT_NE(genprob_score("some source", "a b", scorer, bart).value,
            genprob_score("some source", "a b", scorer, t0).value);
}

TEST(GenProb, TemplateValidation) {
  EXPECT_NO_THROW(validate_template("{source}"));
  EXPECT_THROW(validate_template("no placeholder"), ArgumentError);
  EXPECT_THROW(validate_template("{source} and {source}"), ArgumentError);
  EXPECT_EQ(apply_template("Q: {source}\nA:", "hi"), "Q: hi\nA:");
  GenProbConfig bad;
  bad.prompt_template = "nothing";
  const auto s = make_table_scorer({}, 0.5);
  EXPECT_THROW(genprob_score("src", "a", *s, bad), ArgumentError);
}

TEST(GenProb, BatchMatchesSingleCalls) {
  const auto s = make_overlap_scorer(0.6, 0.02);
  Rng rng(9);
  const std::vector<std::string> words = {"a", "b", "c", "d", "e"};
  std::vector<std::pair<std::string, std::string>> pairs;
  for (int i = 0; i < 20; ++i) {
    std::string src;
    std::string hyp;
    for (int k = 0; k < 5; ++k) src += words[uniform_index(rng, words.size())] + " ";
    for (std::size_t k = 0; k < 1 + uniform_index(rng, 5); ++k) {
      hyp += words[uniform_index(rng, words.size())] + " ";
    }
    pairs.emplace_back(src, hyp);
  }
  for (std::size_t workers : {1u, 4u}) {
    const auto batch = genprob_score_batch(pairs, *s, {}, workers);
    ASSERT_EQ(batch.size(), pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      EXPECT_EQ(batch[i].value, genprob_score(pairs[i].first, pairs[i].second, *s, {}).value);
    }
  }
  const auto one = genprob_score_batch({pairs[0]}, *s, {});
  EXPECT_EQ(one[0].value, genprob_score(pairs[0].first, pairs[0].second, *s, {}).value);

  auto reversed = pairs;
  std::reverse(reversed.begin(), reversed.end());
  const auto fwd = genprob_score_batch(pairs, *s, {});
  const auto rev = genprob_score_batch(reversed, *s, {});
  for (std::size_t i = 0; i < pairs.size(); ++i) EXPECT_EQ(fwd[i].value, rev[pairs.size() - 1 - i].value);
}

TEST(GenProb, BatchErrorCitesIndex) {
  const auto s = make_table_scorer({}, 0.5);
  try {
    genprob_score_batch({{"s", "a"}, {"s", "b"}, {"s", ""}}, *s, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("batch element 2"), std::string::npos) << e.what();
  }
}

TEST(GenProb, PromptFile) {
  testutil::TempDir dir;
  testutil::write_file(dir / "p.txt",
                       "# prompts\nsummarize = {source}\\n\\nSummarize the conversation above.\n"
                       "tldr={source} TL;DR:\n");
  const auto t = load_prompt_templates(dir / "p.txt");
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t.at("summarize"), kDefaultPromptTemplate);
  EXPECT_EQ(t.at("tldr"), "{source} TL;DR:");
  EXPECT_THROW(parse_prompt_templates("bad line\n", "x"), ParseError);
  EXPECT_THROW(parse_prompt_templates("a = no placeholder\n", "x"), Error);
}
