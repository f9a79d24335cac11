#include "faithkit/fakeref.hpp"

#include <optional>

#include "faithkit/error.hpp"
#include "faithkit/rng.hpp"
#include "faithkit/rouge.hpp"
#include "faithkit/tokenize.hpp"

namespace faithkit {

PseudoReference generate_pseudo_reference(const Dialogue& dialogue, const Generator& generator,
                                          const std::vector<std::string>& prompts,
                                          const SamplingConfig& sampling) {
  if (prompts.empty()) throw ArgumentError("pseudo-reference generation needs at least one prompt");
  const CheckedGenerator checked(generator);
  const auto source = render_dialogue(dialogue);
  const auto source_tokens = tokenize(source);

  std::optional<PseudoReference> best;
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    SamplingConfig cfg = sampling;
    cfg.seed = derive_seed(sampling.seed, i);
    auto text = checked.generate(source, prompts[i], cfg);
    const auto tokens = tokenize(text);
    if (tokens.empty()) continue;
    const double f1 = rouge_l(tokens, source_tokens).f1;
    if (!best || f1 > best->rouge_l_vs_source) best = PseudoReference{std::move(text), prompts[i], f1};
  }
  if (!best) throw DataError("every pseudo-reference candidate for \"" + dialogue.id + "\" is empty");
  return *best;
}

std::vector<LabeledSummary> generate_pseudo_references(const std::vector<Dialogue>& dialogues,
                                                       const Generator& generator,
                                                       const std::vector<std::string>& prompts,
                                                       const SamplingConfig& sampling) {
  std::vector<LabeledSummary> out;
  for (const auto& d : dialogues) {
    SamplingConfig cfg = sampling;
    cfg.seed = derive_seed(sampling.seed, d.id);
    auto ref = generate_pseudo_reference(d, generator, prompts, cfg);
    LabeledSummary s;
    s.id = d.id + "-pseudo";
    s.dialogue_id = d.id;
    s.system = kPseudoRefSystem;
    s.text = std::move(ref.text);
    s.label = Label::kPositive;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<std::string> default_pseudo_ref_prompts() {
  return {"summarize", "tldr", "gist", "brief", "recap"};
}

}  // namespace faithkit
