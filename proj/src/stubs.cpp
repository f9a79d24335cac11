#include "faithkit/stubs.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "faithkit/error.hpp"
#include "faithkit/rng.hpp"
#include "faithkit/tokenize.hpp"

namespace faithkit {
namespace {

class TableScorer final : public ConditionalScorer {
 public:
  TableScorer(ProbabilityTable table, double default_p)
      : table_(std::move(table)), default_logp_(std::log(default_p)) {}

  std::vector<Segment> segment(std::string_view target) const override {
    return whitespace_segments(target);
  }

  std::vector<double> token_logprobs(std::string_view source,
                                     std::string_view target) const override {
    TablePrefix key{std::string(source), {}};
    std::vector<double> out;
    for (const auto& seg : segment(target)) {
      key.prefix.push_back(seg.token);
      auto it = table_.find(key);
      out.push_back(it == table_.end() ? default_logp_ : std::log(it->second));
    }
    return out;
  }

 private:
  ProbabilityTable table_;
  double default_logp_;
};

class OverlapScorer final : public ConditionalScorer {
 public:
  OverlapScorer(double p_in, double p_out) : logp_in_(std::log(p_in)), logp_out_(std::log(p_out)) {}

  std::vector<Segment> segment(std::string_view target) const override {
    return toolkit_segments(target);
  }

  std::vector<double> token_logprobs(std::string_view source,
                                     std::string_view target) const override {
    const auto src = tokenize(source);
    const std::set<std::string> vocab(src.begin(), src.end());
    std::vector<double> out;
    for (const auto& seg : segment(target)) {
      out.push_back(vocab.contains(seg.token) ? logp_in_ : logp_out_);
    }
    return out;
  }

 private:
  double logp_in_;
  double logp_out_;
};

class FixedGenerator final : public Generator {
 public:
  explicit FixedGenerator(std::map<std::string, std::string> outputs)
      : outputs_(std::move(outputs)) {}

  std::string generate(std::string_view, std::string_view prompt_id,
                       const SamplingConfig&) const override {
    auto it = outputs_.find(std::string(prompt_id));
    if (it == outputs_.end()) {
      throw ArgumentError("unknown prompt template \"" + std::string(prompt_id) + "\"");
    }
    return it->second;
  }

 private:
  std::map<std::string, std::string> outputs_;
};

class LookupEncoder final : public TokenEncoder {
 public:
  LookupEncoder(std::map<std::string, std::vector<double>> table, std::size_t dim,
                std::uint64_t seed)
      : table_(std::move(table)), dim_(dim), seed_(seed) {}

  std::size_t dim() const override { return dim_; }

  Encoding encode(std::string_view text) const override {
    Encoding enc;
    enc.segments = toolkit_segments(text);
    for (const auto& seg : enc.segments) {
      if (auto it = table_.find(seg.token); it != table_.end()) {
        enc.vectors.push_back(it->second);
      } else {
        enc.vectors.push_back(hashed_unit_vector(seg.token));
      }
    }
    return enc;
  }

 private:
  std::vector<double> hashed_unit_vector(const std::string& token) const {
    Rng rng(derive_seed(seed_, token));
    std::vector<double> v(dim_);
    double norm = 0.0;
    for (auto& x : v) {
      x = uniform01(rng) * 2.0 - 1.0;
      norm += x * x;
    }
    norm = std::sqrt(norm);
    for (auto& x : v) x /= norm;
    return v;
  }

  std::map<std::string, std::vector<double>> table_;
  std::size_t dim_;
  std::uint64_t seed_;
};

template <typename Choose>
std::string replace_masks(std::string_view text, Choose choose) {
  std::string out;
  std::size_t pos = 0;
  std::size_t ordinal = 0;
  while (true) {
    const auto next = text.find(kMaskToken, pos);
    if (next == std::string_view::npos) break;
    out.append(text.substr(pos, next - pos));
    out += choose(ordinal++);
    pos = next + kMaskToken.size();
  }
  out.append(text.substr(pos));
  return out;
}

class ConstantInfiller final : public Infiller {
 public:
  explicit ConstantInfiller(std::string fill) : fill_(std::move(fill)) {}
  std::string fill(std::string_view masked) const override {
    return replace_masks(masked, [&](std::size_t) { return fill_; });
  }

 private:
  std::string fill_;
};

class ChoiceInfiller final : public Infiller {
 public:
  ChoiceInfiller(std::vector<std::string> candidates, std::uint64_t seed)
      : candidates_(std::move(candidates)), seed_(seed) {
    if (candidates_.empty()) throw ArgumentError("choice infiller needs candidates");
  }

  std::string fill(std::string_view masked) const override {
    const auto base = derive_seed(seed_, masked);
    return replace_masks(masked, [&](std::size_t ordinal) {
      Rng rng(derive_seed(base, ordinal));
      return candidates_[uniform_index(rng, candidates_.size())];
    });
  }

 private:
  std::vector<std::string> candidates_;
  std::uint64_t seed_;
};

bool is_word_byte(char c) {
  const auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) || c == '_' || u >= 0x80;
}

class GazetteerTagger final : public EntityTagger {
 public:
  explicit GazetteerTagger(std::map<std::string, std::string> entries) {
    for (auto& [surface, type] : entries) {
      if (surface.empty()) throw ArgumentError("gazetteer surface is empty");
      entries_.emplace_back(surface, type);
    }
    std::stable_sort(entries_.begin(), entries_.end(), [](const auto& a, const auto& b) {
      return a.first.size() > b.first.size();
    });
  }

  std::vector<EntitySpan> tag(std::string_view text) const override {
    std::vector<EntitySpan> spans;
    std::vector<bool> taken(text.size(), false);
    for (const auto& [surface, type] : entries_) {
      std::size_t pos = 0;
      while ((pos = text.find(surface, pos)) != std::string_view::npos) {
        const auto end = pos + surface.size();
        const bool left_ok = pos == 0 || !is_word_byte(text[pos - 1]);
        const bool right_ok = end == text.size() || !is_word_byte(text[end]);
        const bool free = std::none_of(taken.begin() + pos, taken.begin() + end,
                                       [](bool b) { return b; });
        if (left_ok && right_ok && free) {
          std::fill(taken.begin() + pos, taken.begin() + end, true);
          spans.push_back({pos, end, surface, type});
        }
        pos = end;
      }
    }
    std::sort(spans.begin(), spans.end(),
              [](const auto& a, const auto& b) { return a.char_start < b.char_start; });
    return spans;
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

class FixedAligner final : public TokenConsistencyAligner {
 public:
  explicit FixedAligner(std::vector<double> values) : values_(std::move(values)) {}
  std::vector<Segment> segment(std::string_view hyp) const override {
    return toolkit_segments(hyp);
  }
  std::vector<double> consistency(std::string_view, std::string_view) const override {
    return values_;
  }

 private:
  std::vector<double> values_;
};

class LexicalAligner final : public TokenConsistencyAligner {
 public:
  std::vector<Segment> segment(std::string_view hyp) const override {
    return toolkit_segments(hyp);
  }
  std::vector<double> consistency(std::string_view source, std::string_view hyp) const override {
    const auto src = tokenize(source);
    const std::set<std::string> vocab(src.begin(), src.end());
    std::vector<double> out;
    for (const auto& seg : segment(hyp)) out.push_back(vocab.contains(seg.token) ? 1.0 : 0.0);
    return out;
  }
};

}  // namespace

std::vector<Segment> whitespace_segments(std::string_view text) {
  std::vector<Segment> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    out.push_back({std::string(text.substr(i, j - i)), i, j});
    i = j;
  }
  return out;
}

std::vector<Segment> toolkit_segments(std::string_view text) {
  std::vector<Segment> out;
  for (auto& t : tokenize_with_spans(text)) out.push_back({std::move(t.text), t.begin, t.end});
  return out;
}

std::unique_ptr<ConditionalScorer> make_table_scorer(ProbabilityTable table, double default_p) {
  if (!(default_p > 0.0 && default_p <= 1.0)) {
    throw ArgumentError("table scorer default_p must lie in (0, 1]");
  }
  for (const auto& [key, p] : table) {
    if (!(p > 0.0 && p <= 1.0)) throw ArgumentError("table probabilities must lie in (0, 1]");
  }
  return std::make_unique<TableScorer>(std::move(table), default_p);
}

std::unique_ptr<ConditionalScorer> make_overlap_scorer(double p_supported, double p_unsupported) {
  if (!(p_supported > 0.0 && p_supported <= 1.0 && p_unsupported > 0.0 && p_unsupported <= 1.0)) {
    throw ArgumentError("overlap scorer probabilities must lie in (0, 1]");
  }
  return std::make_unique<OverlapScorer>(p_supported, p_unsupported);
}

std::unique_ptr<Generator> make_fixed_generator(std::map<std::string, std::string> outputs) {
  if (outputs.empty()) throw ArgumentError("fixed generator needs at least one output");
  return std::make_unique<FixedGenerator>(std::move(outputs));
}

std::unique_ptr<TokenEncoder> make_lookup_encoder(std::map<std::string, std::vector<double>> table,
                                                  std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw ArgumentError("encoder dimension must be positive");
  for (const auto& [token, v] : table) {
    if (v.size() != dim) throw ArgumentError("vector for \"" + token + "\" has wrong dimension");
  }
  return std::make_unique<LookupEncoder>(std::move(table), dim, seed);
}

std::unique_ptr<Infiller> make_constant_infiller(std::string fill) {
  return std::make_unique<ConstantInfiller>(std::move(fill));
}

std::unique_ptr<Infiller> make_choice_infiller(std::vector<std::string> candidates,
                                               std::uint64_t seed) {
  return std::make_unique<ChoiceInfiller>(std::move(candidates), seed);
}

std::unique_ptr<EntityTagger> make_gazetteer_tagger(
    std::map<std::string, std::string> surface_to_type) {
  return std::make_unique<GazetteerTagger>(std::move(surface_to_type));
}

std::unique_ptr<TokenConsistencyAligner> make_fixed_aligner(std::vector<double> values) {
  return std::make_unique<FixedAligner>(std::move(values));
}

std::unique_ptr<TokenConsistencyAligner> make_lexical_aligner() {
  return std::make_unique<LexicalAligner>();
}

}  // namespace faithkit
