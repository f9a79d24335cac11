#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "faithkit/corpus.hpp"
#include "faithkit/models.hpp"

namespace faithkit {

struct NegativeSample {
  std::string text;
  NegType neg_type = NegType::kSwapEnt;
  std::set<int> negative_indices;  // toolkit-tokenizer positions in `text`
  std::string source_summary_id;
};

inline constexpr std::string_view kHalluPromptId = "hallu";

// Candidate token positions left unmatched by an LCS alignment against the
// reference tokens.
std::set<int> negative_token_indices(std::string_view reference, std::string_view candidate);

// Permutes entity surfaces within each type so that no span keeps its own
// surface. Types where that is impossible are left alone; returns nullopt when
// nothing could be permuted. Throws ArgumentError for invalid or overlapping spans.
std::optional<NegativeSample> swap_entities(std::string_view reference,
                                            const std::vector<EntitySpan>& spans,
                                            std::uint64_t seed);

// Masks one seeded-uniform span per entity type and fills all masks with one
// infiller call. Returns nullopt when there are no spans or the fill
// reproduces the reference.
std::optional<NegativeSample> mask_and_fill(std::string_view reference,
                                            const std::vector<EntitySpan>& spans,
                                            const Infiller& infiller, std::uint64_t seed);

// Samples a summary of the rendered dialogue with top-p = 1.0; every token is negative.
NegativeSample hallucinate(const Dialogue& dialogue, const Generator& generator,
                           std::uint64_t seed, std::size_t max_len);

struct NegativeBackends {
  const EntityTagger* tagger = nullptr;  // required for swapent and maskent
  const Infiller* infiller = nullptr;    // required for maskent
  const Generator* generator = nullptr;  // required for hallu
};

// Runs the requested generators over every positive summary and returns the
// accepted samples as negative LabeledSummary records with ids
// "<summary id>-<type>". Per-record seeds derive from (seed, summary id, type).
std::vector<LabeledSummary> generate_negatives(const std::vector<LabeledSummary>& positives,
                                               const std::vector<Dialogue>& dialogues,
                                               const NegativeBackends& backends,
                                               const std::set<NegType>& types,
                                               std::uint64_t seed, std::size_t hallu_max_len = 48);

}  // namespace faithkit
