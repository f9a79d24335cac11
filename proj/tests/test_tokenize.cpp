#include <gtest/gtest.h>

#include "faithkit/rng.hpp"
#include "faithkit/tokenize.hpp"

using namespace faithkit;

TEST(Tokenize, SplitsPunctuation) {
  EXPECT_EQ(tokenize("Amanda baked cookies."), (TokenSeq{"amanda", "baked", "cookies", "."}));
}

TEST(Tokenize, EmptyText) {
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_TRUE(tokenize(" \t\n ").empty());
}

TEST(Tokenize, CookiesReference) {
  EXPECT_EQ(tokenize("Amanda baked cookies and will bring Jerry some tomorrow."),
            (TokenSeq{"amanda", "baked", "cookies", "and", "will", "bring", "jerry", "some",
                      "tomorrow", "."}));
}

TEST(Tokenize, KeepsInternalApostrophe) {
  EXPECT_EQ(tokenize("I'll bring you tomorrow :-)"),
            (TokenSeq{"i'll", "bring", "you", "tomorrow", ":", "-", ")"}));
}

TEST(Tokenize, NormalizesCompatibilityForms) {
  // Full-width letters and the "ﬁ" ligature fold under NFKC.
  EXPECT_EQ(tokenize("ＡＢＣ ﬁne"), (TokenSeq{"abc", "fine"}));
  EXPECT_EQ(tokenize("ÉCOLE"), (TokenSeq{"école"}));
}

TEST(Tokenize, SpansPointIntoOriginalText) {
  const std::string text = "  Hi, Jerry!";
  const auto toks = tokenize_with_spans(text);
  ASSERT_EQ(toks.size(), 4u);
  EXPECT_EQ(text.substr(toks[0].begin, toks[0].end - toks[0].begin), "Hi");
  EXPECT_EQ(text.substr(toks[1].begin, toks[1].end - toks[1].begin), ",");
  EXPECT_EQ(text.substr(toks[2].begin, toks[2].end - toks[2].begin), "Jerry");
  EXPECT_EQ(text.substr(toks[3].begin, toks[3].end - toks[3].begin), "!");
}

TEST(Tokenize, NoEmptyTokensAndLowercase) {
  Rng rng(5);
  const std::string alphabet[] = {"A", "b", " ", ".", "É", "ß", "\t", "!", "'", "x", "Ω", "-", "ﬁ", "7"};
  for (int i = 0; i < 200; ++i) {
    std::string s;
    const auto len = uniform_index(rng, 20);
    for (std::size_t k = 0; k < len; ++k) s += alphabet[uniform_index(rng, std::size(alphabet))];
    for (const auto& t : tokenize(s)) {
      EXPECT_FALSE(t.empty());
      EXPECT_EQ(t.find_first_of("ABCDEFGHIJKLMNOPQRSTUVWXYZ"), std::string::npos) << t;
    }
  }
}

TEST(Tokenize, IdempotentOverRandomStrings) {
  Rng rng(11);
  const std::string alphabet[] = {"Amanda", "cookies", " ", ".", ",", "I'll", ":-)", "É", "ﬁ",
                                  "\n", "Ｊｅｒｒｙ", "!", "\"", "(", "x)", "'", "--"};
  for (int i = 0; i < 200; ++i) {
    std::string s;
    const auto len = uniform_index(rng, 12);
    for (std::size_t k = 0; k < len; ++k) {
      s += alphabet[uniform_index(rng, std::size(alphabet))];
      if (uniform_index(rng, 3) == 0) s += " ";
    }
    const auto once = tokenize(s);
    EXPECT_EQ(tokenize(join_tokens(once)), once) << "input: " << s;
  }
}

TEST(Tokenize, PorterStemmer) {
  EXPECT_EQ(porter_stem("caresses"), "caress");
  EXPECT_EQ(porter_stem("ponies"), "poni");
  EXPECT_EQ(porter_stem("relational"), "relat");
  EXPECT_EQ(porter_stem("hopping"), "hop");
  EXPECT_EQ(porter_stem("baked"), "bake");
  EXPECT_EQ(porter_stem("generalization"), "gener");
  EXPECT_EQ(porter_stem("a"), "a");
  EXPECT_EQ(porter_stem("école"), "école");
}

TEST(Tokenize, StemAndStopwordOptions) {
  TokenizerOptions opts;
  opts.stem = true;
  opts.stopwords = default_stopwords();
  EXPECT_EQ(tokenize("The cookies are baking", opts), (TokenSeq{"cooki", "bake"}));
  TokenizerOptions keep_case;
  keep_case.lowercase = false;
  EXPECT_EQ(tokenize("Amanda", keep_case), (TokenSeq{"Amanda"}));
}
