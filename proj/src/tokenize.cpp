#include "faithkit/tokenize.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <utility>

#include "faithkit/error.hpp"

namespace faithkit {
namespace {

struct CodePoint {
  UChar32 value;
  std::size_t begin;
  std::size_t end;
};

std::vector<CodePoint> decode(std::string_view text) {
  std::vector<CodePoint> out;
  out.reserve(text.size());
  const auto* s = reinterpret_cast<const std::uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < length) {
    const auto begin = static_cast<std::size_t>(i);
    UChar32 c;
    U8_NEXT(s, i, length, c);
    // Ill-formed bytes decode to a negative value; treat them as U+FFFD.
    out.push_back({c < 0 ? 0xFFFD : c, begin, static_cast<std::size_t>(i)});
  }
  return out;
}

bool is_space(UChar32 c) { return u_isUWhiteSpace(c) || u_iscntrl(c); }

// Byte ranges of whitespace-separated chunks with leading/trailing
// punctuation split into one range per code point.
std::vector<std::pair<std::size_t, std::size_t>> segment(std::string_view text) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  const auto cps = decode(text);
  std::size_t i = 0;
  while (i < cps.size()) {
    if (is_space(cps[i].value)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < cps.size() && !is_space(cps[j].value)) ++j;
    std::size_t lo = i;
    std::size_t hi = j;
    while (lo < hi && u_ispunct(cps[lo].value)) {
      out.emplace_back(cps[lo].begin, cps[lo].end);
      ++lo;
    }
    std::vector<std::pair<std::size_t, std::size_t>> trailing;
    while (hi > lo && u_ispunct(cps[hi - 1].value)) {
      trailing.emplace_back(cps[hi - 1].begin, cps[hi - 1].end);
      --hi;
    }
    if (lo < hi) out.emplace_back(cps[lo].begin, cps[hi - 1].end);
    out.insert(out.end(), trailing.rbegin(), trailing.rend());
    i = j;
  }
  return out;
}

const icu::Normalizer2& nfkc() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFKCInstance(status);
  if (U_FAILURE(status) || n == nullptr) throw Error("ICU NFKC normalizer unavailable");
  return *n;
}

std::string normalize(std::string_view piece, bool lowercase) {
  const auto& norm = nfkc();
  UErrorCode status = U_ZERO_ERROR;
  auto u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(piece.data(), static_cast<int32_t>(piece.size())));
  u = norm.normalize(u, status);
  if (lowercase) {
    u.toLower(icu::Locale::getRoot());
    u = norm.normalize(u, status);
  }
  if (U_FAILURE(status)) throw Error("unicode normalization failed");
  std::string out;
  u.toUTF8String(out);
  return out;
}

bool is_word(std::string_view token) {
  const auto cps = decode(token);
  for (const auto& cp : cps) {
    if (u_isalnum(cp.value)) return true;
  }
  return false;
}

}  // namespace

std::vector<Token> tokenize_with_spans(std::string_view text, const TokenizerOptions& opts) {
  std::vector<Token> out;
  for (const auto& [begin, end] : segment(text)) {
    std::string norm = normalize(text.substr(begin, end - begin), opts.lowercase);
    // Compatibility decomposition can introduce new punctuation or spaces
    // ("…" -> "..."); re-segment so the output is a fixed point.
    const auto sub = segment(norm);
    for (const auto& [b, e] : sub) {
      std::string piece = (sub.size() == 1 && b == 0 && e == norm.size())
                              ? std::move(norm)
                              : norm.substr(b, e - b);
      if (piece.empty() || opts.stopwords.contains(piece)) continue;
      if (opts.stem && is_word(piece)) piece = porter_stem(piece);
      out.push_back({std::move(piece), begin, end});
    }
  }
  return out;
}

TokenSeq tokenize(std::string_view text, const TokenizerOptions& opts) {
  TokenSeq out;
  for (auto& t : tokenize_with_spans(text, opts)) out.push_back(std::move(t.text));
  return out;
}

std::string join_tokens(const TokenSeq& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

const std::set<std::string>& default_stopwords() {
  static const std::set<std::string> words = {
      "a",    "an",   "and",  "are",  "as",   "at",    "be",   "but",  "by",   "for",
      "from", "has",  "have", "he",   "her",  "his",   "i",    "in",   "is",   "it",
      "its",  "me",   "my",   "not",  "of",   "on",    "or",   "she",  "so",   "that",
      "the",  "them", "they", "this", "to",   "was",   "we",   "were", "will", "with",
      "you",  "your", "our",  "their", "what", "which", "who", "do",   "did",  "does"};
  return words;
}

}  // namespace faithkit
