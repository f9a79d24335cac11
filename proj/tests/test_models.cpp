#include <cmath>

#include <gtest/gtest.h>

#include "faithkit/error.hpp"
#include "faithkit/models.hpp"
#include "faithkit/stubs.hpp"

using namespace faithkit;

namespace {

const double kLnHalf = std::log(0.5);

class PositiveLogprobScorer final : public ConditionalScorer {
 public:
  std::vector<Segment> segment(std::string_view t) const override { return whitespace_segments(t); }
  std::vector<double> token_logprobs(std::string_view, std::string_view t) const override {
    return std::vector<double>(whitespace_segments(t).size(), 0.1);
  }
};

class ShortScorer final : public ConditionalScorer {
 public:
  std::vector<Segment> segment(std::string_view t) const override { return whitespace_segments(t); }
  std::vector<double> token_logprobs(std::string_view, std::string_view) const override {
    return {-1.0};
  }
};

class MaskEchoInfiller final : public Infiller {
 public:
  std::string fill(std::string_view masked) const override { return std::string(masked); }
};

class RewritingInfiller final : public Infiller {
 public:
  std::string fill(std::string_view) const override { return "completely different"; }
};

class BadSpanTagger final : public EntityTagger {
 public:
  std::vector<EntitySpan> tag(std::string_view) const override { return {{0, 3, "xyz", "PERSON"}}; }
};

class OutOfRangeAligner final : public TokenConsistencyAligner {
 public:
  std::vector<Segment> segment(std::string_view h) const override { return toolkit_segments(h); }
  std::vector<double> consistency(std::string_view, std::string_view h) const override {
    return std::vector<double>(toolkit_segments(h).size(), 1.5);
  }
};

class VerboseGenerator final : public Generator {
 public:
  std::string generate(std::string_view, std::string_view, const SamplingConfig&) const override {
    return "one two three four five";
  }
};

template <typename Fn>
std::string contract_message(Fn&& fn) {
  try {
    fn();
  } catch (const ContractError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(TableScorer, DefaultOneGivesZeros) {
  const auto s = make_table_scorer({}, 1.0);
  EXPECT_EQ(s->token_logprobs("src", "a b c d"), (std::vector<double>{0, 0, 0, 0}));
}

TEST(TableScorer, DefaultHalf) {
  const auto s = make_table_scorer({}, 0.5);
  const auto lp = s->token_logprobs("src", "a b c");
  ASSERT_EQ(lp.size(), 3u);
  for (double v : lp) EXPECT_NEAR(v, -0.6931, 1e-4);
}

TEST(TableScorer, PinnedToken) {
  ProbabilityTable table;
  table[{"src", {"a", "b"}}] = 0.25;
  const auto s = make_table_scorer(table, 0.5);
  const auto lp = s->token_logprobs("src", "a b c");
  ASSERT_EQ(lp.size(), 3u);
  EXPECT_DOUBLE_EQ(lp[0], kLnHalf);
  EXPECT_DOUBLE_EQ(lp[1], std::log(0.25));
  EXPECT_NEAR(lp[1], -1.3863, 1e-4);
  EXPECT_DOUBLE_EQ(lp[2], kLnHalf);
}

TEST(TableScorer, RejectsBadDefault) {
  EXPECT_THROW(make_table_scorer({}, 0.0), ArgumentError);
  EXPECT_THROW(make_table_scorer({}, 1.5), ArgumentError);
}

TEST(FixedGenerator, MapsPrompts) {
  const auto g = make_fixed_generator({{"p1", "hi"}});
  SamplingConfig cfg;
  EXPECT_EQ(g->generate("whatever", "p1", cfg), "hi");
  EXPECT_EQ(g->generate("whatever", "p1", cfg), g->generate("other", "p1", cfg));
  EXPECT_THROW(g->generate("whatever", "p2", cfg), ArgumentError);
}

TEST(CheckedScorer, RejectsPositiveLogprob) {
  PositiveLogprobScorer bad;
  CheckedScorer checked(bad);
  const auto msg = contract_message([&] { checked.token_logprobs("s", "a b"); });
  EXPECT_NE(msg.find("ConditionalScorer"), std::string::npos) << msg;
}

TEST(CheckedScorer, RejectsWrongCount) {
  ShortScorer bad;
  CheckedScorer checked(bad);
  EXPECT_THROW(checked.token_logprobs("s", "a b"), ContractError);
}

TEST(CheckedGenerator, EnforcesMaxTokens) {
  VerboseGenerator g;
  CheckedGenerator checked(g);
  SamplingConfig cfg;
  cfg.max_tokens = 3;
  const auto msg = contract_message([&] { checked.generate("s", "p", cfg); });
  EXPECT_NE(msg.find("Generator"), std::string::npos) << msg;
  cfg.max_tokens = 5;
  EXPECT_EQ(checked.generate("s", "p", cfg), "one two three four five");
}

TEST(CheckedInfiller, RejectsResidualMask) {
  MaskEchoInfiller echo;
  CheckedInfiller checked(echo);
  const auto msg = contract_message([&] { checked.fill("a <mask> b"); });
  EXPECT_NE(msg.find("Infiller"), std::string::npos) << msg;
}

TEST(CheckedInfiller, RejectsRewrittenContext) {
  RewritingInfiller bad;
  CheckedInfiller checked(bad);
  EXPECT_THROW(checked.fill("keep <mask> this"), ContractError);
  const auto good = make_constant_infiller("someone");
  EXPECT_EQ(CheckedInfiller(*good).fill("keep <mask> this"), "keep someone this");
}

TEST(CheckedTagger, RejectsSurfaceMismatch) {
  BadSpanTagger bad;
  CheckedTagger checked(bad);
  const auto msg = contract_message([&] { checked.tag("abc def"); });
  EXPECT_NE(msg.find("EntityTagger"), std::string::npos) << msg;
}

TEST(CheckedAligner, RejectsOutOfRange) {
  OutOfRangeAligner bad;
  CheckedAligner checked(bad);
  const auto msg = contract_message([&] { checked.consistency("s", "a b"); });
  EXPECT_NE(msg.find("TokenConsistencyAligner"), std::string::npos) << msg;
}

TEST(CheckedEncoder, CountAndDimension) {
  const auto enc = make_lookup_encoder({}, 8, 1);
  CheckedEncoder checked(*enc);
  const auto e = checked.encode("Amanda baked cookies.");
  ASSERT_EQ(e.vectors.size(), 4u);
  for (const auto& v : e.vectors) {
    ASSERT_EQ(v.size(), 8u);
    double norm = 0;
    for (double x : v) norm += x * x;
    EXPECT_NEAR(norm, 1.0, 1e-12);
  }
  EXPECT_EQ(e.vectors[0], checked.encode("amanda").vectors[0]);
}

TEST(Gazetteer, LongestWholeWordMatch) {
  const auto tagger = make_gazetteer_tagger({{"New York", "LOCATION"}, {"York", "PERSON"},
                                             {"Amanda", "PERSON"}});
  const std::string text = "Amanda flew to New York; Amandas and York stayed.";
  const auto spans = CheckedTagger(*tagger).tag(text);
  ASSERT_EQ(spans.size(), 3u);
  EXPECT_EQ(spans[0].surface, "Amanda");
  EXPECT_EQ(spans[1].surface, "New York");
  EXPECT_EQ(spans[1].type, "LOCATION");
  EXPECT_EQ(spans[2].surface, "York");
  EXPECT_EQ(spans[2].type, "PERSON");
}

TEST(EntitySpans, Validation) {
  const std::string text = "Amanda and Jerry";
  EXPECT_NO_THROW(check_entity_spans(text, {{0, 6, "Amanda", "P"}, {11, 16, "Jerry", "P"}}, true));
  EXPECT_THROW(check_entity_spans(text, {{0, 6, "Amanda", "P"}, {3, 8, "nda a", "P"}}, false),
               ArgumentError);
  EXPECT_THROW(check_entity_spans(text, {{11, 16, "Jerry", "P"}, {0, 6, "Amanda", "P"}}, true),
               ArgumentError);
  EXPECT_NO_THROW(check_entity_spans(text, {{11, 16, "Jerry", "P"}, {0, 6, "Amanda", "P"}}, false));
  EXPECT_THROW(check_entity_spans(text, {{11, 17, "Jerry", "P"}}, false), ArgumentError);
}

TEST(Infill, PreservesUnmaskedText) {
  EXPECT_TRUE(preserves_unmasked_text("<mask> baked cookies", "I have baked cookies"));
  EXPECT_TRUE(preserves_unmasked_text("a <mask> b <mask>", "a x b y z"));
  EXPECT_FALSE(preserves_unmasked_text("a <mask> b", "a x c"));
  EXPECT_FALSE(preserves_unmasked_text("a <mask> b", "z a x b"));
}
