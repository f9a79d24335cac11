#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "faithkit/corpus.hpp"
#include "faithkit/metaeval.hpp"
#include "faithkit/training.hpp"

namespace faithkit {

// Desk-scale version of the in-domain / unlikelihood comparison: a tiny model
// scored untrained, after MLE on reference summaries, and after MLE plus
// unlikelihood on negatives, each averaged over several seeds.
struct ExperimentConfig {
  static TrainConfig default_train() {
    TrainConfig c;
    c.learning_rate = 0.1;
    c.steps = 300;
    return c;
  }
  std::size_t corpus_size = 500;
  std::size_t heldout = 100;
  std::size_t runs = 3;
  std::uint64_t seed = 0;
  std::size_t dim = 16;
  // Fraction of training references given an unsupported entity; held-out
  // positives stay clean.
  double reference_noise = 0.0;
  // Step budget and batch of positives shared by both trained conditions.
  TrainConfig train = default_train();
  // The unlikelihood condition draws this many negatives per positive; its
  // batch and learning rate are scaled by (1 + ratio) so the positive-token
  // gradient matches the MLE condition and the unlikelihood term is extra.
  double negative_ratio = 3.0;
  LossConfig loss;
  std::size_t bootstrap_resamples = 200;
  double ci_level = 0.95;
  std::size_t workers = 1;
};

struct ConditionResult {
  std::string name;                    // untrained | mle | unlikelihood
  std::vector<double> rho;             // per run: Spearman(score, label)
  std::vector<double> pair_accuracy;   // per run: P(score(pos) > score(matched neg))
  double mean_rho = 0.0;
  double mean_pair_accuracy = 0.0;
};

struct ExperimentResult {
  std::vector<Dialogue> dialogues;
  std::vector<LabeledSummary> heldout_summaries;
  std::vector<ConditionResult> conditions;
  std::vector<ScoreRecord> scores;  // metric "genprob/<condition>/run<r>"
  std::vector<CorrelationReport> reports;
};

using ExperimentLog = std::function<void(const std::string&)>;

ExperimentResult run_experiment(const ExperimentConfig& cfg, const ExperimentLog& log = {});

const ConditionResult& condition(const ExperimentResult& result, std::string_view name);

// Fraction of (positive, negative) pairs from the same dialogue where the
// positive scores strictly higher.
double pairwise_accuracy(const std::vector<LabeledSummary>& summaries,
                         const std::vector<double>& scores);

// scores.jsonl, report.tsv, report.json, conditions.tsv, dialogues.jsonl and
// summaries.jsonl (held-out) under `dir`.
void write_experiment(const ExperimentResult& result, const std::filesystem::path& dir);

}  // namespace faithkit
