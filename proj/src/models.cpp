#include "faithkit/models.hpp"

#include <algorithm>
#include <cmath>

#include "faithkit/error.hpp"
#include "faithkit/tokenize.hpp"

namespace faithkit {
namespace {

void check_segments(const char* iface, std::string_view text,
                    const std::vector<Segment>& segments) {
  std::size_t last_end = 0;
  for (const auto& s : segments) {
    if (s.begin > s.end || s.end > text.size()) {
      throw ContractError(iface, "segment \"" + s.token + "\" out of bounds");
    }
    if (s.begin < last_end) throw ContractError(iface, "segments overlap or are unordered");
    last_end = s.end;
  }
}

}  // namespace

std::vector<Segment> CheckedScorer::segment(std::string_view target) const {
  auto segments = inner_.segment(target);
  check_segments("ConditionalScorer", target, segments);
  return segments;
}

std::vector<double> CheckedScorer::token_logprobs(std::string_view source,
                                                  std::string_view target) const {
  auto logprobs = inner_.token_logprobs(source, target);
  const auto segments = segment(target);
  if (logprobs.size() != segments.size()) {
    throw ContractError("ConditionalScorer",
                        "returned " + std::to_string(logprobs.size()) + " log-probabilities for " +
                            std::to_string(segments.size()) + " target tokens");
  }
  for (double lp : logprobs) {
    if (std::isnan(lp) || lp > 0.0) {
      throw ContractError("ConditionalScorer", "log-probability " + std::to_string(lp) + " > 0");
    }
  }
  return logprobs;
}

std::string CheckedGenerator::generate(std::string_view source, std::string_view prompt_id,
                                       const SamplingConfig& sampling) const {
  if (sampling.strategy == SamplingStrategy::kTopP && !(sampling.p > 0.0 && sampling.p <= 1.0)) {
    throw ArgumentError("top-p mass must lie in (0, 1]");
  }
  auto text = inner_.generate(source, prompt_id, sampling);
  const auto n = tokenize(text).size();
  if (n > sampling.max_tokens) {
    throw ContractError("Generator", "output has " + std::to_string(n) +
                                         " tokens, limit is " +
                                         std::to_string(sampling.max_tokens));
  }
  return text;
}

Encoding CheckedEncoder::encode(std::string_view text) const {
  auto enc = inner_.encode(text);
  check_segments("TokenEncoder", text, enc.segments);
  if (enc.vectors.size() != enc.segments.size()) {
    throw ContractError("TokenEncoder", "vector count differs from token count");
  }
  const auto d = inner_.dim();
  for (const auto& v : enc.vectors) {
    if (v.size() != d) {
      throw ContractError("TokenEncoder", "vector of dimension " + std::to_string(v.size()) +
                                              ", expected " + std::to_string(d));
    }
  }
  return enc;
}

bool preserves_unmasked_text(std::string_view masked, std::string_view output) {
  std::vector<std::string_view> pieces;
  std::size_t pos = 0;
  while (true) {
    const auto next = masked.find(kMaskToken, pos);
    if (next == std::string_view::npos) {
      pieces.push_back(masked.substr(pos));
      break;
    }
    pieces.push_back(masked.substr(pos, next - pos));
    pos = next + kMaskToken.size();
  }
  if (!output.starts_with(pieces.front())) return false;
  std::size_t cursor = pieces.front().size();
  for (std::size_t i = 1; i + 1 < pieces.size(); ++i) {
    const auto found = output.find(pieces[i], cursor);
    if (found == std::string_view::npos) return false;
    cursor = found + pieces[i].size();
  }
  if (pieces.size() > 1) {
    const auto& last = pieces.back();
    if (output.size() < cursor + last.size() || !output.ends_with(last)) return false;
  }
  return true;
}

std::string CheckedInfiller::fill(std::string_view masked_text) const {
  auto out = inner_.fill(masked_text);
  if (out.find(kMaskToken) != std::string::npos) {
    throw ContractError("Infiller", "output still contains a mask placeholder");
  }
  if (!preserves_unmasked_text(masked_text, out)) {
    throw ContractError("Infiller", "unmasked text was not preserved");
  }
  return out;
}

void check_entity_spans(std::string_view text, const std::vector<EntitySpan>& spans,
                        bool require_sorted) {
  std::vector<const EntitySpan*> order;
  for (const auto& s : spans) {
    if (!(s.char_start < s.char_end && s.char_end <= text.size())) {
      throw ArgumentError("entity span [" + std::to_string(s.char_start) + ", " +
                          std::to_string(s.char_end) + ") out of bounds");
    }
    if (text.substr(s.char_start, s.char_end - s.char_start) != s.surface) {
      throw ArgumentError("entity surface \"" + s.surface + "\" does not match its slice");
    }
    order.push_back(&s);
  }
  if (require_sorted) {
    for (std::size_t i = 1; i < order.size(); ++i) {
      if (order[i]->char_start < order[i - 1]->char_start) {
        throw ArgumentError("entity spans are not sorted by start");
      }
    }
  }
  std::sort(order.begin(), order.end(),
            [](const auto* a, const auto* b) { return a->char_start < b->char_start; });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (order[i]->char_start < order[i - 1]->char_end) {
      throw ArgumentError("entity spans \"" + order[i - 1]->surface + "\" and \"" +
                          order[i]->surface + "\" overlap");
    }
  }
}

std::vector<EntitySpan> CheckedTagger::tag(std::string_view text) const {
  auto spans = inner_.tag(text);
  try {
    check_entity_spans(text, spans, true);
  } catch (const ArgumentError& e) {
    throw ContractError("EntityTagger", e.what());
  }
  return spans;
}

std::vector<double> CheckedAligner::consistency(std::string_view source,
                                                std::string_view hypothesis) const {
  auto probs = inner_.consistency(source, hypothesis);
  const auto n = inner_.segment(hypothesis).size();
  if (probs.size() != n) {
    throw ContractError("TokenConsistencyAligner",
                        "returned " + std::to_string(probs.size()) + " values for " +
                            std::to_string(n) + " hypothesis tokens");
  }
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ContractError("TokenConsistencyAligner",
                          "probability " + std::to_string(p) + " outside [0, 1]");
    }
  }
  return probs;
}

}  // namespace faithkit
