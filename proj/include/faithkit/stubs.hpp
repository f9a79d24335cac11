#pragma once

// Deterministic in-process backends for the model interfaces. All of them are
// immutable after construction and safe to share across threads.

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "faithkit/models.hpp"

namespace faithkit {

// Key for the table scorer: the source text and the target tokens up to and
// including the token being scored.
struct TablePrefix {
  std::string source;
  std::vector<std::string> prefix;

  auto operator<=>(const TablePrefix&) const = default;
};

using ProbabilityTable = std::map<TablePrefix, double>;

// Whitespace-segmented scorer returning log(table[key]) or log(default_p).
std::unique_ptr<ConditionalScorer> make_table_scorer(ProbabilityTable table, double default_p);

// Scores a target token with p_supported if it occurs in the source's toolkit
// tokens and p_unsupported otherwise.
std::unique_ptr<ConditionalScorer> make_overlap_scorer(double p_supported, double p_unsupported);

// Returns outputs.at(prompt_id) regardless of source and sampling config.
std::unique_ptr<Generator> make_fixed_generator(std::map<std::string, std::string> outputs);

// Toolkit-tokenized encoder. Known tokens map to their table vector; unknown
// tokens get a pseudo-random unit vector derived from (seed, token).
std::unique_ptr<TokenEncoder> make_lookup_encoder(std::map<std::string, std::vector<double>> table,
                                                  std::size_t dim, std::uint64_t seed);

std::unique_ptr<Infiller> make_constant_infiller(std::string fill);

// Fills each mask with one of `candidates`, chosen from a hash of (seed, text, mask ordinal).
std::unique_ptr<Infiller> make_choice_infiller(std::vector<std::string> candidates,
                                               std::uint64_t seed);

// Case-sensitive whole-word gazetteer lookup; longer surfaces win.
std::unique_ptr<EntityTagger> make_gazetteer_tagger(std::map<std::string, std::string> surface_to_type);

// Returns `values` verbatim for every call; segmentation is the toolkit tokenizer.
std::unique_ptr<TokenConsistencyAligner> make_fixed_aligner(std::vector<double> values);

// 1.0 for hypothesis tokens present in the source's toolkit tokens, else 0.0.
std::unique_ptr<TokenConsistencyAligner> make_lexical_aligner();

// Whitespace segmentation with byte spans.
std::vector<Segment> whitespace_segments(std::string_view text);

// Toolkit-tokenizer segmentation with byte spans.
std::vector<Segment> toolkit_segments(std::string_view text);

}  // namespace faithkit
