#include "faithkit/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "faithkit/error.hpp"
#include "faithkit/rng.hpp"
#include "faithkit/tokenize.hpp"
#include "json.hpp"

namespace faithkit {
namespace {

void check_logprobs(const TrainItem& item, std::span<const double> logprobs) {
  for (double lp : logprobs) {
    if (std::isnan(lp)) throw DataError("NaN log-probability for target \"" + item.target + "\"");
  }
  if (!item.model_negative_positions.empty() &&
      *item.model_negative_positions.rbegin() >= static_cast<int>(logprobs.size())) {
    throw DataError("negative position out of range for target \"" + item.target + "\"");
  }
}

}  // namespace

void validate(const LossConfig& cfg) {
  if (!(cfg.alpha >= 0.0)) throw ArgumentError("alpha must be >= 0");
  if (!(cfg.prob_ceiling_eps > 0.0 && cfg.prob_ceiling_eps < 0.5)) {
    throw ArgumentError("prob_ceiling_eps must lie in (0, 0.5)");
  }
}

void validate(const TrainConfig& cfg) {
  if (!(cfg.learning_rate > 0.0)) throw ArgumentError("learning_rate must be > 0");
  if (cfg.batch_size == 0) throw ArgumentError("batch_size must be > 0");
  if (cfg.steps == 0) throw ArgumentError("steps must be > 0");
  if (cfg.num_runs == 0) throw ArgumentError("num_runs must be > 0");
  if (cfg.negative_ratio && !(*cfg.negative_ratio >= 0.0)) {
    throw ArgumentError("negative_ratio must be >= 0");
  }
}

std::set<int> align_negative_positions(std::string_view target, const std::set<int>& toolkit_indices,
                                       const std::vector<Segment>& model_segmentation) {
  std::set<int> out;
  if (toolkit_indices.empty()) return out;
  const auto tokens = tokenize_with_spans(target);
  for (const int idx : toolkit_indices) {
    if (idx < 0 || idx >= static_cast<int>(tokens.size())) {
      throw ArgumentError("toolkit index " + std::to_string(idx) + " out of range");
    }
    const auto& tok = tokens[idx];
    std::vector<std::pair<std::size_t, std::size_t>> covering;
    for (std::size_t j = 0; j < model_segmentation.size(); ++j) {
      const auto& seg = model_segmentation[j];
      if (seg.begin < tok.end && tok.begin < seg.end) {
        out.insert(static_cast<int>(j));
        covering.emplace_back(seg.begin, seg.end);
      }
    }
    std::sort(covering.begin(), covering.end());
    std::size_t cursor = tok.begin;
    for (const auto& [b, e] : covering) {
      if (b > cursor) break;
      cursor = std::max(cursor, e);
    }
    if (cursor < tok.end) {
      throw DataError("model segmentation leaves a gap inside negative token \"" + tok.text + "\"");
    }
  }
  return out;
}

TrainItem make_train_item(std::string source, const LabeledSummary& summary,
                          const ConditionalScorer& model) {
  TrainItem item;
  item.source = std::move(source);
  item.target = summary.text;
  item.label = summary.label;
  if (summary.label == Label::kNegative) {
    item.negative_indices = summary.negative_indices;
    item.model_negative_positions =
        align_negative_positions(summary.text, summary.negative_indices, model.segment(summary.text));
  }
  return item;
}

double unlikelihood_loss(const TrainItem& item, std::span<const double> token_logprobs,
                         const LossConfig& cfg) {
  validate(cfg);
  check_logprobs(item, token_logprobs);
  double loss = 0.0;
  if (item.label == Label::kPositive) {
    for (double lp : token_logprobs) loss -= lp;
    return loss;
  }
  const double ceiling = 1.0 - cfg.prob_ceiling_eps;
  for (const int t : item.model_negative_positions) {
    const double p = std::min(std::exp(token_logprobs[t]), ceiling);
    loss -= std::log1p(-p);
  }
  return cfg.alpha * loss;
}

std::vector<double> unlikelihood_gradient(const TrainItem& item,
                                          std::span<const double> token_logprobs,
                                          const LossConfig& cfg) {
  validate(cfg);
  check_logprobs(item, token_logprobs);
  std::vector<double> grad(token_logprobs.size(), 0.0);
  if (item.label == Label::kPositive) {
    std::fill(grad.begin(), grad.end(), -1.0);
    return grad;
  }
  const double ceiling = 1.0 - cfg.prob_ceiling_eps;
  for (const int t : item.model_negative_positions) {
    const double p = std::exp(token_logprobs[t]);
    // d/dlogp of -alpha*log(1-p) is alpha*p/(1-p); flat where the clamp binds.
    if (p < ceiling) grad[t] = cfg.alpha * p / (1.0 - p);
  }
  return grad;
}

double batch_loss(const ConditionalScorer& model, std::span<const TrainItem> items,
                  const LossConfig& cfg) {
  if (items.empty()) throw ArgumentError("batch is empty");
  double total = 0.0;
  for (const auto& item : items) {
    const auto lp = model.token_logprobs(item.source, item.target);
    total += unlikelihood_loss(item, lp, cfg);
  }
  return total / static_cast<double>(items.size());
}

double accumulate_batch_gradient(TrainableScorer& model, std::span<const TrainItem> items,
                                 const LossConfig& cfg) {
  if (items.empty()) throw ArgumentError("batch is empty");
  const double scale = 1.0 / static_cast<double>(items.size());
  double total = 0.0;
  for (const auto& item : items) {
    const auto lp = model.token_logprobs(item.source, item.target);
    total += unlikelihood_loss(item, lp, cfg);
    if (item.label == Label::kNegative && (cfg.alpha == 0.0 || item.model_negative_positions.empty())) {
      continue;  // contributes nothing
    }
    auto grad = unlikelihood_gradient(item, lp, cfg);
    for (auto& g : grad) g *= scale;
    model.accumulate_gradient(item.source, item.target, grad);
  }
  return total * scale;
}

TrainResult train(TrainableScorer& model, const std::vector<TrainItem>& data,
                  const LossConfig& loss_cfg, const TrainConfig& train_cfg) {
  validate(loss_cfg);
  validate(train_cfg);
  if (data.empty()) throw ArgumentError("training data is empty");

  std::vector<std::size_t> positives;
  std::vector<std::size_t> negatives;
  for (std::size_t i = 0; i < data.size(); ++i) {
    (data[i].label == Label::kPositive ? positives : negatives).push_back(i);
  }

  Rng rng(derive_seed(train_cfg.seed, "train"));
  auto next_epoch = [&] {
    std::vector<std::size_t> order;
    if (!train_cfg.negative_ratio) {
      order.resize(data.size());
      for (std::size_t i = 0; i < data.size(); ++i) order[i] = i;
    } else {
      order = positives;
      const auto want = static_cast<std::size_t>(
          std::llround(*train_cfg.negative_ratio * static_cast<double>(positives.size())));
      for (std::size_t k = 0; k < want && !negatives.empty(); ++k) {
        order.push_back(negatives[uniform_index(rng, negatives.size())]);
      }
      if (order.empty()) order = negatives;
    }
    stable_shuffle(order.begin(), order.end(), rng);
    return order;
  };

  TrainResult result;
  result.loss_trace.reserve(train_cfg.steps);
  auto order = next_epoch();
  std::size_t cursor = 0;
  std::vector<TrainItem> batch;
  for (std::size_t step = 0; step < train_cfg.steps; ++step) {
    batch.clear();
    while (batch.size() < train_cfg.batch_size) {
      if (cursor == order.size()) {
        order = next_epoch();
        cursor = 0;
      }
      batch.push_back(data[order[cursor++]]);
    }
    model.zero_grad();
    const double loss = accumulate_batch_gradient(model, batch, loss_cfg);
    if (!std::isfinite(loss)) throw TrainingDiverged(step, "batch loss is " + std::to_string(loss));
    for (double g : model.gradient()) {
      if (!std::isfinite(g)) throw TrainingDiverged(step, "non-finite gradient");
    }
    model.apply_gradient(train_cfg.learning_rate);
    result.loss_trace.push_back(loss);
  }
  return result;
}

void save_loss_trace(const std::vector<double>& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out << nlohmann::json{{"step", i}, {"loss", trace[i]}}.dump() << '\n';
  }
}

}  // namespace faithkit
