#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "faithkit/models.hpp"

namespace faithkit {

// A small attention-based pointer-generator over a closed vocabulary.
//
// Source tokens (framed by <bos>/<eos>) get keys built from their own and
// their neighbours' embeddings. At each target step the query is the sum of
// the previous two target-token embeddings; attention over the source yields
// a context vector, and the next-token distribution mixes a vocabulary
// softmax with a copy distribution given by the attention weights:
//
//   h  = tanh(q + sum_j a_j v_j)
//   p  = lambda * softmax(O h + b) + (1 - lambda) * copy(a),  lambda = sigmoid(u.h + u0)
//
// Source and target are split with the toolkit tokenizer; the scored target
// always ends with a zero-width <eos> segment.
// Const members are safe to call concurrently; the gradient members are not.
class TinyModel final : public TrainableScorer, public Generator {
 public:
  static constexpr std::string_view kBos = "<bos>";
  static constexpr std::string_view kEos = "<eos>";
  static constexpr std::size_t kMaxParameters = 100000;

  // `vocab` must contain kBos and kEos; dim >= 2.
  TinyModel(std::vector<std::string> vocab, std::size_t dim, std::uint64_t seed);

  std::vector<Segment> segment(std::string_view target) const override;
  std::vector<double> token_logprobs(std::string_view source,
                                     std::string_view target) const override;

  // Ignores prompt_id except as a salt for the sampling seed.
  std::string generate(std::string_view source, std::string_view prompt_id,
                       const SamplingConfig& sampling) const override;

  void zero_grad() override;
  void accumulate_gradient(std::string_view source, std::string_view target,
                           std::span<const double> dloss_dlogprob) override;
  void apply_gradient(double learning_rate) override;
  std::span<double> parameters() override { return params_; }
  std::span<const double> gradient() const override { return grad_; }

  // Log-probabilities of every vocabulary entry after `prefix` (toolkit tokens).
  std::vector<double> next_token_logprobs(std::string_view source,
                                          const std::vector<std::string>& prefix) const;

  const std::vector<std::string>& vocab() const { return vocab_; }
  std::size_t dim() const { return dim_; }
  std::size_t parameter_count() const { return params_.size(); }

  void save(const std::filesystem::path& path) const;
  static TinyModel load(const std::filesystem::path& path);

 private:
  struct Offsets {
    std::size_t key_self, key_prev, key_next, value, query_prev1, query_prev2, out, bias,
        gate, gate_bias, total;
  };
  struct StepCache;
  struct SourceCache;

  TinyModel(std::vector<std::string> vocab, std::size_t dim);
  std::vector<int> encode(std::string_view text, const char* what) const;
  SourceCache encode_source(const std::vector<int>& source_ids) const;
  void step_forward(const SourceCache& src, int prev1, int prev2, StepCache& out) const;
  double* row(std::size_t block, int token) { return params_.data() + block + token * dim_; }
  const double* row(std::size_t block, int token) const {
    return params_.data() + block + token * dim_;
  }

  std::vector<std::string> vocab_;
  std::unordered_map<std::string, int> index_;
  std::size_t dim_;
  int bos_ = 0;
  int eos_ = 0;
  Offsets off_{};
  std::vector<double> params_;
  std::vector<double> grad_;
};

// <bos>, <eos>, then the sorted distinct toolkit tokens of `texts`.
std::vector<std::string> build_vocab(const std::vector<std::string>& texts);

}  // namespace faithkit
