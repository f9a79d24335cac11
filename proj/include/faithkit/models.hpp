#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace faithkit {

// A model token and the byte range of the target text it covers. Sentinels
// such as end-of-sequence have an empty range at the end of the text.
struct Segment {
  std::string token;
  std::size_t begin = 0;
  std::size_t end = 0;

  bool operator==(const Segment&) const = default;
};

struct EntitySpan {
  std::size_t char_start = 0;  // byte offsets into the tagged text
  std::size_t char_end = 0;
  std::string surface;
  std::string type;

  bool operator==(const EntitySpan&) const = default;
};

enum class SamplingStrategy { kGreedy, kTopP };

struct SamplingConfig {
  SamplingStrategy strategy = SamplingStrategy::kGreedy;
  double p = 1.0;  // nucleus mass, (0, 1]
  std::uint64_t seed = 0;
  std::size_t max_tokens = 64;
};

// Teacher-forced log p(target token | source, target prefix) under the
// model's own segmentation of the target.
class ConditionalScorer {
 public:
  virtual ~ConditionalScorer() = default;
  virtual std::vector<Segment> segment(std::string_view target) const = 0;
  virtual std::vector<double> token_logprobs(std::string_view source,
                                             std::string_view target) const = 0;
};

class Generator {
 public:
  virtual ~Generator() = default;
  virtual std::string generate(std::string_view source, std::string_view prompt_id,
                               const SamplingConfig& sampling) const = 0;
};

struct Encoding {
  std::vector<Segment> segments;
  std::vector<std::vector<double>> vectors;  // one per segment
};

class TokenEncoder {
 public:
  virtual ~TokenEncoder() = default;
  virtual std::size_t dim() const = 0;
  virtual Encoding encode(std::string_view text) const = 0;
};

inline constexpr std::string_view kMaskToken = "<mask>";

class Infiller {
 public:
  virtual ~Infiller() = default;
  // Replaces every kMaskToken occurrence; all other text must survive verbatim.
  virtual std::string fill(std::string_view masked_text) const = 0;
};

class EntityTagger {
 public:
  virtual ~EntityTagger() = default;
  virtual std::vector<EntitySpan> tag(std::string_view text) const = 0;
};

class TokenConsistencyAligner {
 public:
  virtual ~TokenConsistencyAligner() = default;
  virtual std::vector<Segment> segment(std::string_view hypothesis) const = 0;
  // Probability that each hypothesis token is supported by the source.
  virtual std::vector<double> consistency(std::string_view source,
                                          std::string_view hypothesis) const = 0;
};

// A scorer whose parameters can be trained by gradient steps. The caller
// supplies d(loss)/d(log p_t) for each target token; the model back-propagates
// it into an internal gradient buffer.
class TrainableScorer : public ConditionalScorer {
 public:
  virtual void zero_grad() = 0;
  virtual void accumulate_gradient(std::string_view source, std::string_view target,
                                   std::span<const double> dloss_dlogprob) = 0;
  virtual void apply_gradient(double learning_rate) = 0;
  virtual std::span<double> parameters() = 0;
  virtual std::span<const double> gradient() const = 0;
};

// Validation wrappers. Each forwards to `inner` and checks the interface's
// invariants on every call, throwing ContractError naming the interface.
// The wrapped backend must outlive the wrapper.
class CheckedScorer final : public ConditionalScorer {
 public:
  explicit CheckedScorer(const ConditionalScorer& inner) : inner_(inner) {}
  std::vector<Segment> segment(std::string_view target) const override;
  std::vector<double> token_logprobs(std::string_view source,
                                     std::string_view target) const override;

 private:
  const ConditionalScorer& inner_;
};

class CheckedGenerator final : public Generator {
 public:
  explicit CheckedGenerator(const Generator& inner) : inner_(inner) {}
  std::string generate(std::string_view source, std::string_view prompt_id,
                       const SamplingConfig& sampling) const override;

 private:
  const Generator& inner_;
};

class CheckedEncoder final : public TokenEncoder {
 public:
  explicit CheckedEncoder(const TokenEncoder& inner) : inner_(inner) {}
  std::size_t dim() const override { return inner_.dim(); }
  Encoding encode(std::string_view text) const override;

 private:
  const TokenEncoder& inner_;
};

class CheckedInfiller final : public Infiller {
 public:
  explicit CheckedInfiller(const Infiller& inner) : inner_(inner) {}
  std::string fill(std::string_view masked_text) const override;

 private:
  const Infiller& inner_;
};

class CheckedTagger final : public EntityTagger {
 public:
  explicit CheckedTagger(const EntityTagger& inner) : inner_(inner) {}
  std::vector<EntitySpan> tag(std::string_view text) const override;

 private:
  const EntityTagger& inner_;
};

class CheckedAligner final : public TokenConsistencyAligner {
 public:
  explicit CheckedAligner(const TokenConsistencyAligner& inner) : inner_(inner) {}
  std::vector<Segment> segment(std::string_view hypothesis) const override {
    return inner_.segment(hypothesis);
  }
  std::vector<double> consistency(std::string_view source,
                                  std::string_view hypothesis) const override;

 private:
  const TokenConsistencyAligner& inner_;
};

// Throws ArgumentError when a span is out of bounds, its surface differs from
// the slice, spans overlap, or (with require_sorted) starts are not increasing.
void check_entity_spans(std::string_view text, const std::vector<EntitySpan>& spans,
                        bool require_sorted);

// True when `output` keeps every unmasked piece of `masked` in order, with the
// first piece as a prefix and the last as a suffix.
bool preserves_unmasked_text(std::string_view masked, std::string_view output);

}  // namespace faithkit
