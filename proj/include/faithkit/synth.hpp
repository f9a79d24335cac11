#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "faithkit/corpus.hpp"
#include "faithkit/tiny_model.hpp"

namespace faithkit {

// Template-generated toy dialogues over a closed vocabulary of names, items,
// days and places, with rule-derived reference summaries and negatives from
// all three generators.
struct SynthCorpus {
  std::vector<Dialogue> dialogues;
  std::vector<LabeledSummary> positives;  // one "reference" per dialogue, id "<dialogue>-ref"
  std::vector<LabeledSummary> negatives;
};

SynthCorpus synth_corpus(std::size_t n, std::uint64_t seed);

// Dialogues and reference summaries only; no negatives.
SynthCorpus synth_dialogues(std::size_t n, std::uint64_t seed);

// Copies `summaries` and, in each with probability `rate`, replaces one entity
// mention with a same-category filler that does not occur in the dialogue.
// Models the unsupported details found in crowd-written references.
std::vector<LabeledSummary> add_extrinsic_noise(const std::vector<LabeledSummary>& summaries,
                                                const std::vector<Dialogue>& dialogues,
                                                double rate, std::uint64_t seed);

// Surface -> entity type for every filler (PERSON, ITEM, DATE, LOCATION).
const std::map<std::string, std::string>& synth_gazetteer();

// Every toolkit token any synthetic dialogue, summary or hallucination can contain.
const std::vector<std::string>& synth_vocabulary();

// Summarizer trained briefly on a disjoint news-like style, used as the
// out-of-domain source of hallucinated summaries.
TinyModel make_out_of_domain_generator(std::uint64_t seed);

}  // namespace faithkit
