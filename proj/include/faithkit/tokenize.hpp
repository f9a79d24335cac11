#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace faithkit {

using TokenSeq = std::vector<std::string>;

// A token plus the byte range [begin, end) it was cut from in the input text.
struct Token {
  std::string text;
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct TokenizerOptions {
  bool lowercase = true;
  bool stem = false;                // Porter stemmer on word tokens
  std::set<std::string> stopwords;  // dropped after normalization; empty = keep all
};

// NFKC-normalize, lowercase, split on whitespace, then peel leading and
// trailing punctuation code points off each chunk as single-character tokens.
// Offsets always refer to the original (unnormalized) text.
std::vector<Token> tokenize_with_spans(std::string_view text, const TokenizerOptions& opts = {});

TokenSeq tokenize(std::string_view text, const TokenizerOptions& opts = {});

// Space-joined tokens; tokenize(join_tokens(tokenize(t))) == tokenize(t).
std::string join_tokens(const TokenSeq& tokens);

// Porter (1980) suffix stripping over a lowercase ASCII word. Words with
// non-ASCII letters are returned unchanged.
std::string porter_stem(std::string_view word);

// A small English stopword list for the optional filter.
const std::set<std::string>& default_stopwords();

}  // namespace faithkit
