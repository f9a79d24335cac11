#pragma once

#include <string>
#include <vector>

#include "faithkit/corpus.hpp"
#include "faithkit/models.hpp"

namespace faithkit {

struct PseudoReference {
  std::string text;
  std::string chosen_prompt;
  double rouge_l_vs_source = 0.0;  // ROUGE-L F1 of text against the rendered dialogue
};

// One candidate per prompt id; returns the candidate with the highest ROUGE-L
// F1 against the rendered source, ties going to the earliest prompt. Empty
// candidates are skipped; throws DataError if all are empty. Each prompt gets
// its own sampling seed derived from sampling.seed and its position.
PseudoReference generate_pseudo_reference(const Dialogue& dialogue, const Generator& generator,
                                          const std::vector<std::string>& prompts,
                                          const SamplingConfig& sampling);

inline constexpr const char* kPseudoRefSystem = "pseudo-ref";

// Pseudo-reference for every dialogue as positive summaries with ids
// "<dialogue id>-pseudo".
std::vector<LabeledSummary> generate_pseudo_references(const std::vector<Dialogue>& dialogues,
                                                       const Generator& generator,
                                                       const std::vector<std::string>& prompts,
                                                       const SamplingConfig& sampling);

// The five prompt ids used when none are configured.
std::vector<std::string> default_pseudo_ref_prompts();

}  // namespace faithkit
