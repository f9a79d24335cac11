#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "faithkit/models.hpp"

namespace faithkit {

enum class Aggregation { kMean, kSum };

inline constexpr std::string_view kSourcePlaceholder = "{source}";
// Identity template: plain source-conditioned scoring (BARTScore mode).
inline constexpr std::string_view kIdentityTemplate = "{source}";
// Default instruction template for prompted scoring (T0-Score mode).
inline constexpr std::string_view kDefaultPromptTemplate =
    "{source}\n\nSummarize the conversation above.";

struct GenProbConfig {
  std::string prompt_template{kIdentityTemplate};
  Aggregation aggregation = Aggregation::kMean;
  // When set, each token probability is floored at this value before the log.
  std::optional<double> prob_floor;
};

struct FaithfulnessScore {
  double value = 0.0;  // log domain, <= 0; higher is more faithful
  std::size_t token_count = 0;
};

// Throws ArgumentError unless the template holds exactly one {source}.
void validate_template(std::string_view prompt_template);
std::string apply_template(std::string_view prompt_template, std::string_view source);

FaithfulnessScore genprob_score(std::string_view source, std::string_view hypothesis,
                                const ConditionalScorer& scorer, const GenProbConfig& cfg);

// Element i equals genprob_score(pairs[i]). A failing element is rethrown as
// an error citing its index. `workers` > 1 fans out over threads and requires
// a reentrant scorer.
std::vector<FaithfulnessScore> genprob_score_batch(
    const std::vector<std::pair<std::string, std::string>>& pairs,
    const ConditionalScorer& scorer, const GenProbConfig& cfg, std::size_t workers = 1);

// Named templates from a text file: one `name = template` entry per line, '#'
// comments, and \n, \t, \\ escapes inside the template.
std::map<std::string, std::string> load_prompt_templates(const std::filesystem::path& path);
std::map<std::string, std::string> parse_prompt_templates(std::string_view content,
                                                          const std::string& origin = "<prompts>");

Aggregation parse_aggregation(std::string_view s);

}  // namespace faithkit
