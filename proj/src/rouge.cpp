#include "faithkit/rouge.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "faithkit/error.hpp"

namespace faithkit {
namespace {

using NgramCounts = std::map<std::vector<std::string>, int>;

NgramCounts count_ngrams(const TokenSeq& tokens, int n) {
  NgramCounts counts;
  const auto len = static_cast<std::size_t>(n);
  if (tokens.size() < len) return counts;
  for (std::size_t i = 0; i + len <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + i, tokens.begin() + i + len)];
  }
  return counts;
}

int total(const NgramCounts& counts) {
  int sum = 0;
  for (const auto& [gram, c] : counts) sum += c;
  return sum;
}

// (|a|+1) x (|b|+1) LCS length table, row-major.
std::vector<std::size_t> lcs_table(const TokenSeq& a, const TokenSeq& b) {
  const std::size_t cols = b.size() + 1;
  std::vector<std::size_t> dp((a.size() + 1) * cols, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      dp[i * cols + j] = a[i - 1] == b[j - 1]
                             ? dp[(i - 1) * cols + j - 1] + 1
                             : std::max(dp[(i - 1) * cols + j], dp[i * cols + j - 1]);
    }
  }
  return dp;
}

}  // namespace

OverlapScore make_overlap(double precision, double recall) {
  const double denom = precision + recall;
  return {precision, recall, denom > 0.0 ? 2.0 * precision * recall / denom : 0.0};
}

OverlapScore rouge_n(const TokenSeq& hyp, const TokenSeq& ref, int n) {
  if (n < 1) throw ArgumentError("rouge_n: n must be >= 1, got " + std::to_string(n));
  const auto hyp_counts = count_ngrams(hyp, n);
  const auto ref_counts = count_ngrams(ref, n);
  const int hyp_total = total(hyp_counts);
  const int ref_total = total(ref_counts);
  if (hyp_total == 0 || ref_total == 0) return {};
  int overlap = 0;
  for (const auto& [gram, c] : hyp_counts) {
    if (auto it = ref_counts.find(gram); it != ref_counts.end()) overlap += std::min(c, it->second);
  }
  return make_overlap(static_cast<double>(overlap) / hyp_total,
                      static_cast<double>(overlap) / ref_total);
}

std::size_t lcs_length(const TokenSeq& a, const TokenSeq& b) {
  // Two rolling rows are enough for the length alone.
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::vector<std::pair<std::size_t, std::size_t>> lcs_alignment(const TokenSeq& a,
                                                               const TokenSeq& b) {
  const auto dp = lcs_table(a, b);
  const std::size_t cols = b.size() + 1;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::size_t i = a.size();
  std::size_t j = b.size();
  while (i > 0 && j > 0) {
    if (a[i - 1] == b[j - 1] && dp[i * cols + j] == dp[(i - 1) * cols + j - 1] + 1) {
      pairs.emplace_back(i - 1, j - 1);
      --i;
      --j;
    } else if (dp[(i - 1) * cols + j] >= dp[i * cols + j - 1]) {
      --i;
    } else {
      --j;
    }
  }
  std::reverse(pairs.begin(), pairs.end());
  return pairs;
}

OverlapScore rouge_l(const TokenSeq& hyp, const TokenSeq& ref) {
  if (hyp.empty() || ref.empty()) return {};
  const auto lcs = static_cast<double>(lcs_length(hyp, ref));
  return make_overlap(lcs / static_cast<double>(hyp.size()), lcs / static_cast<double>(ref.size()));
}

}  // namespace faithkit
