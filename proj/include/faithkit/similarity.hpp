#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "faithkit/models.hpp"
#include "faithkit/rouge.hpp"

namespace faithkit {

using IdfTable = std::map<std::string, double>;

// Greedy-matching embedding similarity. Precision averages, over hypothesis
// tokens, the best cosine similarity to any reference token; recall does the
// same from the reference side. With use_idf each token's contribution is
// weighted by its idf (tokens absent from the table get the table maximum).
OverlapScore bertscore(std::string_view hyp, std::string_view ref, const TokenEncoder& encoder,
                       bool use_idf = false, const IdfTable* idf = nullptr);

// idf(w) = ln((M + 1) / (df(w) + 1)) over M documents, toolkit tokens.
IdfTable compute_idf(const std::vector<std::string>& documents);

// Two whitespace-separated columns per line: token, idf.
IdfTable load_idf(const std::filesystem::path& path);
void save_idf(const IdfTable& table, const std::filesystem::path& path);

// Mean per-token consistency probability, in [0, 1].
double ctc_consistency(std::string_view source, std::string_view hyp,
                       const TokenConsistencyAligner& aligner);

}  // namespace faithkit
