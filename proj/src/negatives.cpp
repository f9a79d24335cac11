#include "faithkit/negatives.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "faithkit/error.hpp"
#include "faithkit/rng.hpp"
#include "faithkit/rouge.hpp"
#include "faithkit/tokenize.hpp"

namespace faithkit {
namespace {

constexpr std::size_t kEnumerateLimit = 8;
constexpr int kRejectionTries = 10000;

bool is_surface_derangement(const std::vector<std::size_t>& perm,
                            const std::vector<std::string>& surfaces) {
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (surfaces[perm[i]] == surfaces[i]) return false;
  }
  return true;
}

// A uniformly drawn permutation `perm` with surfaces[perm[i]] != surfaces[i]
// for every i, or nullopt if none exists.
std::optional<std::vector<std::size_t>> draw_derangement(const std::vector<std::string>& surfaces,
                                                         Rng& rng) {
  const std::size_t k = surfaces.size();
  std::map<std::string_view, std::size_t> counts;
  for (const auto& s : surfaces) ++counts[s];
  for (const auto& [s, c] : counts) {
    if (2 * c > k) return std::nullopt;  // pigeonhole: no derangement exists
  }
  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  if (k <= kEnumerateLimit) {
    std::vector<std::vector<std::size_t>> all;
    do {
      if (is_surface_derangement(perm, surfaces)) all.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    if (all.empty()) return std::nullopt;
    return all[uniform_index(rng, all.size())];
  }
  for (int attempt = 0; attempt < kRejectionTries; ++attempt) {
    stable_shuffle(perm.begin(), perm.end(), rng);
    if (is_surface_derangement(perm, surfaces)) return perm;
  }
  return std::nullopt;
}

std::vector<EntitySpan> sorted_spans(std::string_view text, const std::vector<EntitySpan>& spans) {
  check_entity_spans(text, spans, false);
  auto out = spans;
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.char_start < b.char_start; });
  return out;
}

// Replaces each span's slice with replacements[i]; spans sorted, disjoint.
std::string rebuild(std::string_view text, const std::vector<EntitySpan>& spans,
                    const std::vector<std::string>& replacements) {
  std::string out;
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    out.append(text.substr(cursor, spans[i].char_start - cursor));
    out += replacements[i];
    cursor = spans[i].char_end;
  }
  out.append(text.substr(cursor));
  return out;
}

std::map<std::string, std::vector<std::size_t>> group_by_type(const std::vector<EntitySpan>& spans) {
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < spans.size(); ++i) groups[spans[i].type].push_back(i);
  return groups;
}

}  // namespace

std::set<int> negative_token_indices(std::string_view reference, std::string_view candidate) {
  const auto ref = tokenize(reference);
  const auto cand = tokenize(candidate);
  std::vector<bool> matched(cand.size(), false);
  for (const auto& [ri, ci] : lcs_alignment(ref, cand)) matched[ci] = true;
  std::set<int> out;
  for (std::size_t i = 0; i < cand.size(); ++i) {
    if (!matched[i]) out.insert(static_cast<int>(i));
  }
  return out;
}

std::optional<NegativeSample> swap_entities(std::string_view reference,
                                            const std::vector<EntitySpan>& spans,
                                            std::uint64_t seed) {
  const auto sorted = sorted_spans(reference, spans);
  std::vector<std::string> replacement;
  for (const auto& s : sorted) replacement.push_back(s.surface);

  Rng rng(derive_seed(seed, "swapent"));
  bool changed = false;
  for (const auto& [type, members] : group_by_type(sorted)) {
    std::vector<std::string> surfaces;
    for (auto i : members) surfaces.push_back(sorted[i].surface);
    const auto perm = draw_derangement(surfaces, rng);
    if (!perm) continue;
    for (std::size_t i = 0; i < members.size(); ++i) {
      replacement[members[i]] = surfaces[(*perm)[i]];
    }
    changed = true;
  }
  if (!changed) return std::nullopt;

  NegativeSample sample;
  sample.text = rebuild(reference, sorted, replacement);
  sample.neg_type = NegType::kSwapEnt;
  if (sample.text == reference) return std::nullopt;
  sample.negative_indices = negative_token_indices(reference, sample.text);
  if (sample.negative_indices.empty()) return std::nullopt;
  return sample;
}

std::optional<NegativeSample> mask_and_fill(std::string_view reference,
                                            const std::vector<EntitySpan>& spans,
                                            const Infiller& infiller, std::uint64_t seed) {
  const auto sorted = sorted_spans(reference, spans);
  if (sorted.empty()) return std::nullopt;

  Rng rng(derive_seed(seed, "maskent"));
  std::vector<EntitySpan> chosen;
  for (const auto& [type, members] : group_by_type(sorted)) {
    chosen.push_back(sorted[members[uniform_index(rng, members.size())]]);
  }
  std::sort(chosen.begin(), chosen.end(),
            [](const auto& a, const auto& b) { return a.char_start < b.char_start; });
  const std::vector<std::string> masks(chosen.size(), std::string(kMaskToken));
  const auto masked = rebuild(reference, chosen, masks);

  NegativeSample sample;
  sample.text = CheckedInfiller(infiller).fill(masked);
  sample.neg_type = NegType::kMaskEnt;
  if (sample.text == reference) return std::nullopt;
  sample.negative_indices = negative_token_indices(reference, sample.text);
  if (sample.negative_indices.empty()) return std::nullopt;
  return sample;
}

NegativeSample hallucinate(const Dialogue& dialogue, const Generator& generator,
                           std::uint64_t seed, std::size_t max_len) {
  SamplingConfig sampling;
  sampling.strategy = SamplingStrategy::kTopP;
  sampling.p = 1.0;
  sampling.seed = derive_seed(seed, "hallu");
  sampling.max_tokens = max_len;

  NegativeSample sample;
  sample.text = CheckedGenerator(generator).generate(render_dialogue(dialogue), kHalluPromptId,
                                                     sampling);
  sample.neg_type = NegType::kHallu;
  const auto n = tokenize(sample.text).size();
  if (n == 0) throw DataError("hallucination generator produced an empty summary");
  for (std::size_t i = 0; i < n; ++i) sample.negative_indices.insert(static_cast<int>(i));
  return sample;
}

std::vector<LabeledSummary> generate_negatives(const std::vector<LabeledSummary>& positives,
                                               const std::vector<Dialogue>& dialogues,
                                               const NegativeBackends& backends,
                                               const std::set<NegType>& types,
                                               std::uint64_t seed, std::size_t hallu_max_len) {
  const bool needs_tags = types.contains(NegType::kSwapEnt) || types.contains(NegType::kMaskEnt);
  if (needs_tags && backends.tagger == nullptr) {
    throw ArgumentError("swapent/maskent need an entity tagger");
  }
  if (types.contains(NegType::kMaskEnt) && backends.infiller == nullptr) {
    throw ArgumentError("maskent needs an infiller");
  }
  if (types.contains(NegType::kHallu) && backends.generator == nullptr) {
    throw ArgumentError("hallu needs a generator");
  }

  std::vector<LabeledSummary> out;
  for (const auto& ref : positives) {
    if (ref.label != Label::kPositive) continue;
    std::vector<EntitySpan> spans;
    if (needs_tags) spans = CheckedTagger(*backends.tagger).tag(ref.text);
    for (const NegType type : types) {
      const auto record_seed = derive_seed(seed, ref.id + "/" + std::string(to_string(type)));
      std::optional<NegativeSample> sample;
      switch (type) {
        case NegType::kSwapEnt:
          sample = swap_entities(ref.text, spans, record_seed);
          break;
        case NegType::kMaskEnt:
          sample = mask_and_fill(ref.text, spans, *backends.infiller, record_seed);
          break;
        case NegType::kHallu:
          sample = hallucinate(find_dialogue(dialogues, ref.dialogue_id), *backends.generator,
                               record_seed, hallu_max_len);
          break;
      }
      if (!sample || sample->text == ref.text) continue;
      LabeledSummary s;
      s.id = ref.id + "-" + std::string(to_string(type));
      s.dialogue_id = ref.dialogue_id;
      s.system = std::string(to_string(type));
      s.text = std::move(sample->text);
      s.label = Label::kNegative;
      s.neg_type = type;
      s.negative_indices = std::move(sample->negative_indices);
      validate(s);
      out.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace faithkit
