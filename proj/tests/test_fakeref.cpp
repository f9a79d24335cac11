#include <gtest/gtest.h>

#include "faithkit/error.hpp"
#include "faithkit/fakeref.hpp"
#include "faithkit/rouge.hpp"
#include "faithkit/stubs.hpp"
#include "test_util.hpp"

using namespace faithkit;

namespace {

const Dialogue kDialogue{"d1", {{"Amanda", "I baked cookies for you"}, {"Jerry", "Thanks a lot"}}};

SamplingConfig sampling() {
  SamplingConfig s;
  s.strategy = SamplingStrategy::kTopP;
  s.p = 1.0;
  s.seed = 0;
  return s;
}

}  // namespace

TEST(FakeRef, SinglePromptReturnedRegardlessOfScore) {
  const auto gen = make_fixed_generator({{"only", "zzz qqq"}});
  const auto r = generate_pseudo_reference(kDialogue, *gen, {"only"}, sampling());
  EXPECT_EQ(r.text, "zzz qqq");
  EXPECT_EQ(r.chosen_prompt, "only");
  EXPECT_EQ(r.rouge_l_vs_source, 0.0);
}

TEST(FakeRef, CopyBeatsDisjoint) {
  // A copies six source tokens; B shares none.
  const auto gen = make_fixed_generator({{"A", "I baked cookies for you Jerry"},
                                         {"B", "weather is sunny in paris today"}});
  const auto r = generate_pseudo_reference(kDialogue, *gen, {"B", "A"}, sampling());
  EXPECT_EQ(r.chosen_prompt, "A");
  // Source tokens: amanda : i baked cookies for you jerry : thanks a lot (12).
  // LCS with "i baked cookies for you jerry" is 6: P = 6/6, R = 6/12.
  const double p = 1.0;
  const double rec = 0.5;
  EXPECT_DOUBLE_EQ(r.rouge_l_vs_source, 2 * p * rec / (p + rec));
}

TEST(FakeRef, TieGoesToFirstPrompt) {
  const auto gen = make_fixed_generator({{"x", "baked cookies"}, {"y", "baked cookies"}});
  EXPECT_EQ(generate_pseudo_reference(kDialogue, *gen, {"y", "x"}, sampling()).chosen_prompt, "y");
  EXPECT_EQ(generate_pseudo_reference(kDialogue, *gen, {"x", "y"}, sampling()).chosen_prompt, "x");
}

TEST(FakeRef, ReturnedScoreIsMaxOverCandidates) {
  const std::map<std::string, std::string> outputs = {
      {"p1", "Amanda baked cookies"}, {"p2", "Jerry says thanks"}, {"p3", "cookies"},
      {"p4", "nothing relevant"},     {"p5", "I baked cookies for you"}};
  const auto gen = make_fixed_generator(outputs);
  const auto r = generate_pseudo_reference(kDialogue, *gen, {"p1", "p2", "p3", "p4", "p5"},
                                           sampling());
  const auto src = tokenize(render_dialogue(kDialogue));
  double best = -1;
  for (const auto& [id, text] : outputs) best = std::max(best, rouge_l(tokenize(text), src).f1);
  EXPECT_DOUBLE_EQ(r.rouge_l_vs_source, best);
  EXPECT_DOUBLE_EQ(rouge_l(tokenize(r.text), src).f1, best);
}

TEST(FakeRef, AllEmptyIsAnError) {
  const auto gen = make_fixed_generator({{"a", ""}, {"b", ""}});
  EXPECT_THROW(generate_pseudo_reference(kDialogue, *gen, {"a", "b"}, sampling()), DataError);
  const auto mixed = make_fixed_generator({{"a", ""}, {"b", "cookies"}});
  EXPECT_EQ(generate_pseudo_reference(kDialogue, *mixed, {"a", "b"}, sampling()).text, "cookies");
}

TEST(FakeRef, CorpusOutputSchema) {
  const auto gen = make_fixed_generator({{"a", "I baked cookies"}});
  const auto refs = generate_pseudo_references({kDialogue}, *gen, {"a"}, sampling());
  ASSERT_EQ(refs.size(), 1u);
  EXPECT_EQ(refs[0].id, "d1-pseudo");
  EXPECT_EQ(refs[0].system, "pseudo-ref");
  EXPECT_EQ(refs[0].label, Label::kPositive);
  EXPECT_EQ(refs[0].dialogue_id, "d1");
  EXPECT_EQ(default_pseudo_ref_prompts().size(), 5u);
}
