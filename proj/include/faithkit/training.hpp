#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "faithkit/corpus.hpp"
#include "faithkit/models.hpp"

namespace faithkit {

struct TrainItem {
  std::string source;
  std::string target;
  Label label = Label::kPositive;
  std::set<int> negative_indices;          // toolkit-tokenizer positions
  std::set<int> model_negative_positions;  // positions in the model's segmentation
};

struct LossConfig {
  double alpha = 0.1;               // unlikelihood weight
  double prob_ceiling_eps = 1e-6;   // p is clamped to <= 1 - eps before log(1 - p)
};

// Defaults suit the tiny model. Pretrained backends typically want AdamW,
// lr 2e-5 and batch 64.
struct TrainConfig {
  double learning_rate = 0.05;
  std::size_t batch_size = 16;
  std::size_t steps = 500;
  std::uint64_t seed = 0;
  std::size_t num_runs = 3;
  // Negatives drawn per positive in each epoch; nullopt uses the data as given.
  std::optional<double> negative_ratio;
};

void validate(const LossConfig& cfg);
void validate(const TrainConfig& cfg);

// Model positions whose byte span overlaps a negative toolkit token. Throws
// DataError if part of a negative toolkit token is not covered by the
// segmentation, ArgumentError for out-of-range toolkit indices.
std::set<int> align_negative_positions(std::string_view target, const std::set<int>& toolkit_indices,
                                       const std::vector<Segment>& model_segmentation);

TrainItem make_train_item(std::string source, const LabeledSummary& summary,
                          const ConditionalScorer& model);

// Positive: -sum_t log p_t. Negative: -alpha * sum_{t in N} log(1 - min(p_t, 1 - eps)).
double unlikelihood_loss(const TrainItem& item, std::span<const double> token_logprobs,
                         const LossConfig& cfg);

// d(loss)/d(log p_t) for every target token.
std::vector<double> unlikelihood_gradient(const TrainItem& item,
                                          std::span<const double> token_logprobs,
                                          const LossConfig& cfg);

// Mean per-item loss of `items` under the current model.
double batch_loss(const ConditionalScorer& model, std::span<const TrainItem> items,
                  const LossConfig& cfg);

// Adds d(batch_loss)/d(params) into the model's gradient buffer (does not
// zero it first) and returns the batch loss.
double accumulate_batch_gradient(TrainableScorer& model, std::span<const TrainItem> items,
                                 const LossConfig& cfg);

struct TrainResult {
  std::vector<double> loss_trace;  // batch loss at each step, before the update
};

// Seeded shuffled mini-batch gradient descent. Throws TrainingDiverged on a
// non-finite batch loss.
TrainResult train(TrainableScorer& model, const std::vector<TrainItem>& data,
                  const LossConfig& loss_cfg, const TrainConfig& train_cfg);

// {"step": i, "loss": x} per line.
void save_loss_trace(const std::vector<double>& trace, const std::filesystem::path& path);

}  // namespace faithkit
