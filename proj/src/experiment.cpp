#include "faithkit/experiment.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "faithkit/error.hpp"
#include "faithkit/genprob.hpp"
#include "faithkit/report.hpp"
#include "faithkit/rng.hpp"
#include "faithkit/synth.hpp"
#include "faithkit/tiny_model.hpp"

namespace faithkit {
namespace {

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

double pairwise_accuracy(const std::vector<LabeledSummary>& summaries,
                         const std::vector<double>& scores) {
  std::map<std::string, double> positive;
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    if (summaries[i].label == Label::kPositive) positive[summaries[i].dialogue_id] = scores[i];
  }
  std::size_t wins = 0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    if (summaries[i].label != Label::kNegative) continue;
    auto it = positive.find(summaries[i].dialogue_id);
    if (it == positive.end()) continue;
    ++pairs;
    if (it->second > scores[i]) ++wins;
  }
  if (pairs == 0) throw DataError("no positive/negative pairs to compare");
  return static_cast<double>(wins) / static_cast<double>(pairs);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const ExperimentLog& log) {
  if (cfg.heldout == 0 || cfg.heldout >= cfg.corpus_size) {
    throw ArgumentError("held-out size must be in [1, corpus size)");
  }
  if (cfg.runs == 0) throw ArgumentError("experiment needs at least one run");
  auto say = [&](const std::string& msg) {
    if (log) log(msg);
  };

  const auto corpus = synth_corpus(cfg.corpus_size, derive_seed(cfg.seed, "corpus"));
  const std::size_t n_train = cfg.corpus_size - cfg.heldout;
  std::map<std::string, std::string> source_of;
  std::map<std::string, bool> is_train;
  for (std::size_t i = 0; i < corpus.dialogues.size(); ++i) {
    source_of[corpus.dialogues[i].id] = render_dialogue(corpus.dialogues[i]);
    is_train[corpus.dialogues[i].id] = i < n_train;
  }

  ExperimentResult result;
  result.dialogues.assign(corpus.dialogues.begin() + static_cast<std::ptrdiff_t>(n_train),
                          corpus.dialogues.end());
  // Held-out summaries: each reference followed by its negatives.
  std::map<std::string, std::vector<const LabeledSummary*>> negatives_of;
  for (const auto& s : corpus.negatives) negatives_of[s.dialogue_id].push_back(&s);
  for (const auto& pos : corpus.positives) {
    if (is_train[pos.dialogue_id]) continue;
    result.heldout_summaries.push_back(pos);
    for (const auto* neg : negatives_of[pos.dialogue_id]) result.heldout_summaries.push_back(*neg);
  }
  std::vector<double> labels;
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& s : result.heldout_summaries) {
    labels.push_back(s.label == Label::kPositive ? 1.0 : 0.0);
    pairs.emplace_back(source_of[s.dialogue_id], s.text);
  }
  say(fmt::format("corpus: {} dialogues ({} train), {} negatives, {} held-out summaries",
                  corpus.dialogues.size(), n_train, corpus.negatives.size(),
                  result.heldout_summaries.size()));

  const auto& vocab = synth_vocabulary();
  const TinyModel probe(vocab, cfg.dim, 0);
  std::vector<TrainItem> mle_data;
  std::vector<TrainItem> ul_data;
  const auto noisy_positives = add_extrinsic_noise(corpus.positives, corpus.dialogues,
                                                   cfg.reference_noise,
                                                   derive_seed(cfg.seed, "reference-noise"));
  for (const auto* set : {&noisy_positives, &corpus.negatives}) {
    for (const auto& s : *set) {
      if (!is_train[s.dialogue_id]) continue;
      auto item = make_train_item(source_of[s.dialogue_id], s, probe);
      if (s.label == Label::kPositive) mle_data.push_back(item);
      ul_data.push_back(std::move(item));
    }
  }

  std::vector<ConditionResult> conditions(3);
  conditions[0].name = "untrained";
  conditions[1].name = "mle";
  conditions[2].name = "unlikelihood";
  const GenProbConfig genprob_cfg;  // identity template, mean aggregation
  for (std::size_t run = 0; run < cfg.runs; ++run) {
    const auto run_seed = derive_seed(cfg.seed, fmt::format("run{}", run));
    const TinyModel init(vocab, cfg.dim, derive_seed(run_seed, "init"));
    TinyModel mle = init;
    TinyModel ul = init;
    TrainConfig mle_cfg = cfg.train;
    mle_cfg.seed = derive_seed(run_seed, "mle");
    TrainConfig ul_cfg = cfg.train;
    ul_cfg.seed = derive_seed(run_seed, "unlikelihood");
    ul_cfg.negative_ratio = cfg.negative_ratio;
    ul_cfg.batch_size = static_cast<std::size_t>(
        std::llround(static_cast<double>(cfg.train.batch_size) * (1.0 + cfg.negative_ratio)));
    ul_cfg.learning_rate = cfg.train.learning_rate * (1.0 + cfg.negative_ratio);
    const auto mle_trace = train(mle, mle_data, cfg.loss, mle_cfg);
    const auto ul_trace = train(ul, ul_data, cfg.loss, ul_cfg);
    say(fmt::format("run {}: mle loss {:.4f} -> {:.4f}, unlikelihood loss {:.4f} -> {:.4f}", run,
                    mle_trace.loss_trace.front(), mle_trace.loss_trace.back(),
                    ul_trace.loss_trace.front(), ul_trace.loss_trace.back()));

    const TinyModel* models[] = {&init, &mle, &ul};
    for (std::size_t c = 0; c < conditions.size(); ++c) {
      const auto scored = genprob_score_batch(pairs, *models[c], genprob_cfg, cfg.workers);
      std::vector<double> values;
      PairedSeries series;
      const auto metric = fmt::format("genprob/{}/run{}", conditions[c].name, run);
      for (std::size_t i = 0; i < scored.size(); ++i) {
        values.push_back(scored[i].value);
        result.scores.push_back({result.heldout_summaries[i].id, metric, scored[i].value});
        series.ids.push_back(result.heldout_summaries[i].id);
      }
      series.metric_values = values;
      series.human_values = labels;
      CorrelationReport report;
      report.metric = metric;
      report.n = values.size();
      report.rho = spearman(values, labels);
      report.pearson = pearson(values, labels);
      report.kendall_tau_b = kendall_tau_b(values, labels);
      attach_bootstrap_ci(report, series, cfg.bootstrap_resamples, cfg.ci_level,
                          derive_seed(run_seed, metric));
      result.reports.push_back(report);
      conditions[c].rho.push_back(report.rho);
      conditions[c].pair_accuracy.push_back(pairwise_accuracy(result.heldout_summaries, values));
      say(fmt::format("run {} {:>12}: rho {:.4f}, pair accuracy {:.4f}", run, conditions[c].name,
                      report.rho, conditions[c].pair_accuracy.back()));
    }
  }
  for (auto& c : conditions) {
    c.mean_rho = mean(c.rho);
    c.mean_pair_accuracy = mean(c.pair_accuracy);
  }
  result.conditions = std::move(conditions);
  return result;
}

const ConditionResult& condition(const ExperimentResult& result, std::string_view name) {
  for (const auto& c : result.conditions) {
    if (c.name == name) return c;
  }
  throw ArgumentError("no experiment condition \"" + std::string(name) + "\"");
}

void write_experiment(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_scores(result.scores, dir / "scores.jsonl");
  save_dialogues(result.dialogues, dir / "dialogues.jsonl");
  save_summaries(result.heldout_summaries, dir / "summaries.jsonl");
  write_report(result.reports, dir / "report.tsv", dir / "report.json");

  std::ofstream out(dir / "conditions.tsv", std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + (dir / "conditions.tsv").string());
  out << "condition\truns\tmean_rho\tmean_pair_accuracy\n";
  for (const auto& c : result.conditions) {
    out << fmt::format("{}\t{}\t{:.6f}\t{:.6f}\n", c.name, c.rho.size(), c.mean_rho,
                       c.mean_pair_accuracy);
  }
}

}  // namespace faithkit
