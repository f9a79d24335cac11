#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "faithkit/tokenize.hpp"

namespace faithkit {

struct OverlapScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// f1 = 2PR/(P+R), or 0 when P+R == 0.
OverlapScore make_overlap(double precision, double recall);

// Clipped n-gram overlap. Empty n-gram sets score 0. Throws ArgumentError for n < 1.
OverlapScore rouge_n(const TokenSeq& hyp, const TokenSeq& ref, int n);

// LCS-based ROUGE-L over whole token sequences.
OverlapScore rouge_l(const TokenSeq& hyp, const TokenSeq& ref);

std::size_t lcs_length(const TokenSeq& a, const TokenSeq& b);

// One longest common subsequence as (index in a, index in b) pairs, increasing
// in both coordinates. Backtracks from the end and takes a diagonal match
// whenever it is optimal, so the choice among equal-length alignments is fixed.
std::vector<std::pair<std::size_t, std::size_t>> lcs_alignment(const TokenSeq& a,
                                                               const TokenSeq& b);

}  // namespace faithkit
