#include <cmath>

#include <gtest/gtest.h>

#include "faithkit/error.hpp"
#include "faithkit/rouge.hpp"
#include "oracles.hpp"
#include "rouge_fixtures.hpp"

using namespace faithkit;

namespace {

TokenSeq words(std::string_view s) { return tokenize(s); }

}  // namespace

TEST(RougeN, HandCountedFixtures) {
  for (const auto& f : fixtures::kNgramFixtures) {
    const auto s = rouge_n(words(f.hyp), words(f.ref), f.n);
    const double p = f.hyp_count ? static_cast<double>(f.overlap) / f.hyp_count : 0.0;
    const double r = f.ref_count ? static_cast<double>(f.overlap) / f.ref_count : 0.0;
    const double f1 = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
    EXPECT_DOUBLE_EQ(s.precision, p) << f.hyp << " | " << f.ref << " n=" << f.n;
    EXPECT_DOUBLE_EQ(s.recall, r) << f.hyp << " | " << f.ref << " n=" << f.n;
    EXPECT_DOUBLE_EQ(s.f1, f1) << f.hyp << " | " << f.ref << " n=" << f.n;
  }
}

TEST(RougeN, Identity) {
  const auto s = rouge_n(words("a b c d"), words("a b c d"), 2);
  EXPECT_EQ(s.precision, 1.0);
  EXPECT_EQ(s.recall, 1.0);
  EXPECT_EQ(s.f1, 1.0);
}

TEST(RougeN, BigramExample) {
  const auto s = rouge_n({"a", "b", "c"}, {"a", "b", "d"}, 2);
  EXPECT_DOUBLE_EQ(s.precision, 0.5);
  EXPECT_DOUBLE_EQ(s.recall, 0.5);
  EXPECT_DOUBLE_EQ(s.f1, 0.5);
}

TEST(RougeN, EmptyHypothesisScoresZero) {
  const auto s = rouge_n({}, {"a"}, 1);
  EXPECT_EQ(s.precision, 0.0);
  EXPECT_EQ(s.recall, 0.0);
  EXPECT_EQ(s.f1, 0.0);
}

TEST(RougeN, RejectsNonPositiveN) {
  EXPECT_THROW(rouge_n({"a"}, {"a"}, 0), ArgumentError);
  EXPECT_THROW(rouge_n({"a"}, {"a"}, -1), ArgumentError);
}

TEST(RougeN, PrecisionRecallSymmetry) {
  for (std::uint64_t i = 0; i < 300; ++i) {
    const auto h = oracle::random_tokens(2 * i, 10, 3);
    const auto r = oracle::random_tokens(2 * i + 1, 10, 3);
    for (int n = 1; n <= 3; ++n) {
      EXPECT_DOUBLE_EQ(rouge_n(h, r, n).precision, rouge_n(r, h, n).recall);
    }
  }
}

TEST(RougeN, RecallMonotoneUnderSharedDuplication) {
  for (std::uint64_t i = 0; i < 300; ++i) {
    auto h = oracle::random_tokens(3 * i, 8, 3);
    const auto r = oracle::random_tokens(3 * i + 1, 8, 3);
    for (int n = 1; n <= 2; ++n) {
      const double before = rouge_n(h, r, n).recall;
      // Append a copy of an n-gram that occurs in the reference.
      if (r.size() < static_cast<std::size_t>(n)) continue;
      auto dup = h;
      dup.insert(dup.end(), r.begin(), r.begin() + n);
      EXPECT_GE(rouge_n(dup, r, n).recall, before);
    }
  }
}

TEST(RougeN, ScoresBounded) {
  for (std::uint64_t i = 0; i < 200; ++i) {
    const auto h = oracle::random_tokens(5 * i, 10, 4);
    const auto r = oracle::random_tokens(5 * i + 2, 10, 4);
    for (int n = 1; n <= 3; ++n) {
      const auto s = rouge_n(h, r, n);
      for (double v : {s.precision, s.recall, s.f1}) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
      }
      EXPECT_LE(s.f1, std::max(s.precision, s.recall) + 1e-15);
    }
  }
}

TEST(RougeL, Identity) { EXPECT_EQ(rouge_l(words("a b c"), words("a b c")).f1, 1.0); }

TEST(RougeL, CatExample) {
  const auto s = rouge_l({"the", "cat", "sat"}, {"the", "cat", "ate", "fish"});
  EXPECT_DOUBLE_EQ(s.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.recall, 0.5);
  EXPECT_DOUBLE_EQ(s.f1, 4.0 / 7.0);
  EXPECT_NEAR(s.f1, 0.5714, 1e-4);
}

TEST(RougeL, EmptyScoresZero) {
  EXPECT_EQ(rouge_l({}, {"a"}).f1, 0.0);
  EXPECT_EQ(rouge_l({"a"}, {}).f1, 0.0);
}

TEST(RougeL, LcsMatchesBruteForce) {
  for (std::uint64_t i = 0; i < 300; ++i) {
    const auto a = oracle::random_tokens(7 * i, 10, 3);
    const auto b = oracle::random_tokens(7 * i + 3, 10, 3);
    EXPECT_EQ(lcs_length(a, b), oracle::brute_force_lcs(a, b));
  }
}

TEST(RougeL, AlignmentIsACommonSubsequence) {
  for (std::uint64_t i = 0; i < 200; ++i) {
    const auto a = oracle::random_tokens(11 * i, 10, 3);
    const auto b = oracle::random_tokens(11 * i + 1, 10, 3);
    const auto align = lcs_alignment(a, b);
    ASSERT_EQ(align.size(), lcs_length(a, b));
    for (std::size_t k = 0; k < align.size(); ++k) {
      EXPECT_EQ(a[align[k].first], b[align[k].second]);
      if (k > 0) {
        EXPECT_LT(align[k - 1].first, align[k].first);
        EXPECT_LT(align[k - 1].second, align[k].second);
      }
    }
  }
}
