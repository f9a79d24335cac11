#include "faithkit/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "faithkit/corpus.hpp"
#include "faithkit/error.hpp"
#include "faithkit/experiment.hpp"
#include "faithkit/fakeref.hpp"
#include "faithkit/genprob.hpp"
#include "faithkit/metaeval.hpp"
#include "faithkit/negatives.hpp"
#include "faithkit/parallel.hpp"
#include "faithkit/report.hpp"
#include "faithkit/rng.hpp"
#include "faithkit/rouge.hpp"
#include "faithkit/similarity.hpp"
#include "faithkit/stubs.hpp"
#include "faithkit/synth.hpp"
#include "faithkit/tiny_model.hpp"
#include "faithkit/tokenize.hpp"
#include "faithkit/training.hpp"

namespace faithkit {
namespace {

namespace fs = std::filesystem;

std::shared_ptr<spdlog::logger> logger() {
  static auto log = [] {
    auto l = spdlog::stderr_color_mt("faithkit");
    l->set_pattern("[%H:%M:%S.%e] [%l] %v");
    return l;
  }();
  return log;
}

// Resolves relative model paths against $FAITHKIT_CACHE when they do not
// exist relative to the working directory.
fs::path resolve_model_path(const fs::path& p) {
  if (p.is_absolute() || fs::exists(p)) return p;
  if (const char* cache = std::getenv("FAITHKIT_CACHE"); cache != nullptr && *cache != '\0') {
    return fs::path(cache) / p;
  }
  return p;
}

fs::path default_model_path() {
  if (const char* cache = std::getenv("FAITHKIT_CACHE"); cache != nullptr && *cache != '\0') {
    return fs::path(cache) / "tiny-model.json";
  }
  return "tiny-model.json";
}

// Extractive stand-in generator: returns a line of the source chosen by a hash
// of (seed, prompt id), with the speaker prefix dropped and truncated to
// max_tokens whitespace tokens.
class LeadGenerator final : public Generator {
 public:
  std::string generate(std::string_view source, std::string_view prompt_id,
                       const SamplingConfig& sampling) const override {
    std::vector<std::string> lines;
    std::istringstream in{std::string(source)};
    for (std::string line; std::getline(in, line);) {
      if (line.find_first_not_of(" \t\r") != std::string::npos) lines.push_back(line);
    }
    if (lines.empty()) return {};
    const auto salt = derive_seed(sampling.seed, prompt_id);
    std::string line = lines[salt % lines.size()];
    if (auto colon = line.find(": "); colon != std::string::npos) line = line.substr(colon + 2);
    std::string out;
    std::size_t count = 0;
    for (const auto& seg : whitespace_segments(line)) {
      if (count == sampling.max_tokens) break;
      if (!out.empty()) out += ' ';
      out += seg.token;
      ++count;
    }
    return out;
  }
};

struct Common {
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::string backend = "stub";
  std::string model;
};

void add_common(CLI::App* sub, Common& c, bool with_backend) {
  sub->add_option("--seed", c.seed, "Base seed for all randomness")->capture_default_str();
  sub->add_option("--workers", c.workers, "Worker threads for per-sample work")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  if (with_backend) {
    sub->add_option("--backend", c.backend, "Model backend")
        ->check(CLI::IsMember({"stub", "tiny"}))
        ->capture_default_str();
    sub->add_option("--model", c.model,
                    "Tiny model file (relative paths also tried under $FAITHKIT_CACHE)");
  }
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw ArgumentError(fmt::format("{} is required", flag));
}

std::unique_ptr<TinyModel> load_tiny(const Common& c) {
  if (c.model.empty()) return nullptr;
  const auto path = resolve_model_path(c.model);
  logger()->info("loading tiny model from {}", path.string());
  return std::make_unique<TinyModel>(TinyModel::load(path));
}

std::map<std::string, std::string> load_gazetteer(const std::string& path) {
  if (path.empty()) return synth_gazetteer();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open gazetteer " + path);
  std::map<std::string, std::string> out;
  std::size_t lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
      throw ParseError(path, lineno, "expected <surface>\\t<type>");
    }
    out[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return out;
}

std::set<NegType> parse_types(const std::vector<std::string>& names) {
  std::set<NegType> out;
  for (const auto& n : names) out.insert(parse_neg_type(n));
  return out;
}

// ---- score ----------------------------------------------------------------

struct ScoreArgs {
  Common common;
  std::string metric;
  std::string dialogues;
  std::string summaries;
  std::string references;
  std::string out;
  std::string against = "source";
  std::string prompt;
  std::string prompt_file;
  std::string prompt_name;
  std::string aggregation = "mean";
  std::string idf;
  bool use_idf = false;
};

int run_score(const ScoreArgs& a) {
  const auto& names = metric_names();
  if (std::find(names.begin(), names.end(), a.metric) == names.end()) {
    throw ArgumentError(fmt::format("unknown metric \"{}\"; available: {}", a.metric,
                                    fmt::join(names, ", ")));
  }
  require(a.dialogues, "--dialogues");
  require(a.summaries, "--summaries");
  require(a.out, "--out");
  const auto dialogues = load_dialogues(a.dialogues);
  const auto summaries = load_summaries(a.summaries);
  check_references(summaries, dialogues);

  std::map<std::string, std::string> source_of;
  for (const auto& d : dialogues) source_of[d.id] = render_dialogue(d);

  // Reference text per dialogue for overlap and similarity metrics.
  std::map<std::string, std::string> reference_of;
  if (a.against == "reference") {
    require(a.references, "--references");
    for (const auto& r : load_summaries(a.references)) {
      if (r.label == Label::kPositive) reference_of.emplace(r.dialogue_id, r.text);
    }
  }
  auto comparand = [&](const LabeledSummary& s) -> const std::string& {
    if (a.against == "source") return source_of.at(s.dialogue_id);
    auto it = reference_of.find(s.dialogue_id);
    if (it == reference_of.end()) {
      throw DataError(fmt::format("no reference summary for dialogue {}", s.dialogue_id));
    }
    return it->second;
  };

  std::vector<double> values(summaries.size());
  const bool genprob = a.metric == "bartscore" || a.metric == "t0score";
  if (genprob) {
    GenProbConfig cfg;
    cfg.aggregation = parse_aggregation(a.aggregation);
    cfg.prompt_template = a.metric == "t0score" ? kDefaultPromptTemplate : kIdentityTemplate;
    if (!a.prompt_file.empty()) {
      require(a.prompt_name, "--prompt-name");
      const auto templates = load_prompt_templates(a.prompt_file);
      auto it = templates.find(a.prompt_name);
      if (it == templates.end()) {
        throw ArgumentError(fmt::format("prompt \"{}\" not found in {}", a.prompt_name,
                                        a.prompt_file));
      }
      cfg.prompt_template = it->second;
    }
    if (!a.prompt.empty()) cfg.prompt_template = a.prompt;
    validate_template(cfg.prompt_template);

    std::unique_ptr<ConditionalScorer> scorer;
    if (a.common.backend == "tiny") {
      if (a.common.model.empty()) throw ArgumentError("--backend tiny needs --model");
      scorer = load_tiny(a.common);
    } else {
      scorer = make_overlap_scorer(0.5, 0.01);
    }
    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& s : summaries) pairs.emplace_back(source_of.at(s.dialogue_id), s.text);
    const auto scores = genprob_score_batch(pairs, *scorer, cfg, a.common.workers);
    for (std::size_t i = 0; i < scores.size(); ++i) values[i] = scores[i].value;
  } else if (a.metric == "bertscore") {
    const auto encoder = make_lookup_encoder({}, 32, derive_seed(a.common.seed, "encoder"));
    std::optional<IdfTable> idf;
    if (a.use_idf) {
      if (!a.idf.empty()) {
        idf = load_idf(a.idf);
      } else {
        std::vector<std::string> docs;
        for (const auto& s : summaries) docs.push_back(comparand(s));
        idf = compute_idf(docs);
      }
    }
    parallel_for(summaries.size(), a.common.workers, [&](std::size_t i) {
      values[i] = bertscore(summaries[i].text, comparand(summaries[i]), *encoder, a.use_idf,
                            idf ? &*idf : nullptr)
                      .f1;
    });
  } else if (a.metric == "ctc") {
    const auto aligner = make_lexical_aligner();
    parallel_for(summaries.size(), a.common.workers, [&](std::size_t i) {
      values[i] = ctc_consistency(comparand(summaries[i]), summaries[i].text, *aligner);
    });
  } else {
    parallel_for(summaries.size(), a.common.workers, [&](std::size_t i) {
      const auto hyp = tokenize(summaries[i].text);
      const auto ref = tokenize(comparand(summaries[i]));
      if (a.metric == "rouge-l") {
        values[i] = rouge_l(hyp, ref).f1;
      } else {
        values[i] = rouge_n(hyp, ref, a.metric.back() - '0').f1;
      }
    });
  }

  std::vector<ScoreRecord> records;
  records.reserve(summaries.size());
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    records.push_back({summaries[i].id, a.metric, values[i]});
  }
  save_scores(records, a.out);
  logger()->info("wrote {} scores to {}", records.size(), a.out);
  return 0;
}

// ---- negatives ------------------------------------------------------------

struct NegativesArgs {
  Common common;
  std::string dialogues;
  std::string summaries;
  std::string out;
  std::string gazetteer;
  std::vector<std::string> types{"swapent", "maskent", "hallu"};
  std::size_t hallu_max_len = 48;
};

int run_negatives(const NegativesArgs& a) {
  require(a.dialogues, "--dialogues");
  require(a.summaries, "--summaries");
  require(a.out, "--out");
  const auto dialogues = load_dialogues(a.dialogues);
  auto summaries = load_summaries(a.summaries);
  check_references(summaries, dialogues);
  std::erase_if(summaries, [](const LabeledSummary& s) { return s.label != Label::kPositive; });
  const auto types = parse_types(a.types);

  const auto gazetteer = load_gazetteer(a.gazetteer);
  const auto tagger = make_gazetteer_tagger(gazetteer);
  std::vector<std::string> fillers;
  for (const auto& [surface, type] : gazetteer) fillers.push_back(surface);
  const auto infiller = make_choice_infiller(fillers, derive_seed(a.common.seed, "infiller"));

  std::unique_ptr<Generator> generator;
  if (types.contains(NegType::kHallu)) {
    if (a.common.backend == "tiny") {
      if (a.common.model.empty()) {
        generator = std::make_unique<TinyModel>(
            make_out_of_domain_generator(derive_seed(a.common.seed, "ood")));
      } else {
        generator = load_tiny(a.common);
      }
    } else {
      generator = std::make_unique<LeadGenerator>();
    }
  }
  NegativeBackends backends{tagger.get(), infiller.get(), generator.get()};
  const auto negatives =
      generate_negatives(summaries, dialogues, backends, types, a.common.seed, a.hallu_max_len);
  save_summaries(negatives, a.out);
  logger()->info("wrote {} negatives for {} positives to {}", negatives.size(), summaries.size(),
                 a.out);
  return 0;
}

// ---- fakerefs -------------------------------------------------------------

struct FakerefsArgs {
  Common common;
  std::string dialogues;
  std::string out;
  std::vector<std::string> prompts;
  double top_p = 1.0;
  std::size_t max_tokens = 48;
};

int run_fakerefs(const FakerefsArgs& a) {
  require(a.dialogues, "--dialogues");
  require(a.out, "--out");
  const auto dialogues = load_dialogues(a.dialogues);
  std::unique_ptr<Generator> generator;
  if (a.common.backend == "tiny") {
    if (a.common.model.empty()) throw ArgumentError("--backend tiny needs --model");
    generator = load_tiny(a.common);
  } else {
    generator = std::make_unique<LeadGenerator>();
  }
  SamplingConfig sampling;
  sampling.strategy = SamplingStrategy::kTopP;
  sampling.p = a.top_p;
  sampling.seed = a.common.seed;
  sampling.max_tokens = a.max_tokens;
  const auto prompts = a.prompts.empty() ? default_pseudo_ref_prompts() : a.prompts;
  const auto refs = generate_pseudo_references(dialogues, *generator, prompts, sampling);
  save_summaries(refs, a.out);
  logger()->info("wrote {} pseudo-references to {}", refs.size(), a.out);
  return 0;
}

// ---- train ----------------------------------------------------------------

struct TrainArgs {
  Common common;
  std::string dialogues;
  std::string summaries;
  std::string out;
  std::string loss_trace;
  std::string objective = "unlikelihood";
  std::size_t dim = 16;
  double learning_rate = 0.1;
  std::size_t batch_size = 16;
  std::size_t steps = 500;
  double alpha = 0.1;
  double negative_ratio = 0.0;
};

int run_train(const TrainArgs& a) {
  require(a.dialogues, "--dialogues");
  require(a.summaries, "--summaries");
  const auto dialogues = load_dialogues(a.dialogues);
  auto summaries = load_summaries(a.summaries);
  check_references(summaries, dialogues);
  if (a.objective == "mle") {
    std::erase_if(summaries, [](const LabeledSummary& s) { return s.label != Label::kPositive; });
  }
  std::map<std::string, std::string> source_of;
  for (const auto& d : dialogues) source_of[d.id] = render_dialogue(d);

  std::unique_ptr<TinyModel> model = load_tiny(a.common);
  if (!model) {
    std::vector<std::string> texts;
    for (const auto& [id, text] : source_of) texts.push_back(text);
    for (const auto& s : summaries) texts.push_back(s.text);
    model = std::make_unique<TinyModel>(build_vocab(texts), a.dim,
                                        derive_seed(a.common.seed, "init"));
  }
  logger()->info("tiny model: vocab {}, dim {}, {} parameters", model->vocab().size(),
                 model->dim(), model->parameter_count());

  std::vector<TrainItem> items;
  items.reserve(summaries.size());
  for (const auto& s : summaries) items.push_back(make_train_item(source_of.at(s.dialogue_id), s, *model));

  LossConfig loss;
  loss.alpha = a.alpha;
  TrainConfig cfg;
  cfg.learning_rate = a.learning_rate;
  cfg.batch_size = a.batch_size;
  cfg.steps = a.steps;
  cfg.seed = derive_seed(a.common.seed, "train");
  if (a.negative_ratio > 0.0) cfg.negative_ratio = a.negative_ratio;
  const auto result = train(*model, items, loss, cfg);
  logger()->info("loss {:.6f} -> {:.6f} over {} steps", result.loss_trace.front(),
                 result.loss_trace.back(), result.loss_trace.size());

  const fs::path out = a.out.empty() ? default_model_path() : fs::path(a.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  model->save(out);
  logger()->info("saved model to {}", out.string());
  if (!a.loss_trace.empty()) save_loss_trace(result.loss_trace, a.loss_trace);
  return 0;
}

// ---- metaeval -------------------------------------------------------------

struct MetaevalArgs {
  Common common;
  std::string scores;
  std::string judgments;
  std::string summaries;
  std::string out;
  std::string grouping = "pooled";
  std::size_t resamples = 1000;
  double level = 0.95;
  bool scatter = false;
};

int run_metaeval(const MetaevalArgs& a) {
  require(a.scores, "--scores");
  require(a.judgments, "--judgments");
  require(a.out, "--out");
  const auto grouping = parse_grouping(a.grouping);
  const auto scores = load_scores(a.scores);
  const auto judgments = load_judgments(a.judgments);

  std::optional<std::map<std::string, std::string>> systems;
  if (grouping == Grouping::kPerSystemMean) {
    require(a.summaries, "--summaries (needed for per-system grouping)");
    systems.emplace();
    for (const auto& s : load_summaries(a.summaries)) (*systems)[s.id] = s.system;
  }

  std::map<std::string, std::vector<ScoreRecord>> by_metric;
  for (const auto& r : scores) by_metric[r.metric].push_back(r);
  if (by_metric.empty()) throw DataError("no scores in " + a.scores);

  const fs::path dir = a.out;
  fs::create_directories(dir);
  std::vector<CorrelationReport> reports;
  for (const auto& [metric, records] : by_metric) {
    auto report = evaluate_metric(records, judgments, grouping, systems ? &*systems : nullptr);
    const auto series = join_scores(records, judgments);
    if (grouping == Grouping::kPooled) {
      attach_bootstrap_ci(report, series, a.resamples, a.level,
                          derive_seed(a.common.seed, metric));
    }
    logger()->info("{}: rho {:.4f} (n={})", metric, report.rho, report.n);
    if (a.scatter) {
      std::string file = metric;
      std::replace(file.begin(), file.end(), '/', '_');
      write_scatter_svg(series, metric, dir / (file + ".svg"));
    }
    reports.push_back(report);
  }
  write_report(reports, dir / "report.tsv", dir / "report.json");
  logger()->info("wrote {} report rows to {}", reports.size(), dir.string());
  return 0;
}

// ---- experiment -----------------------------------------------------------

struct ExperimentArgs {
  Common common;
  ExperimentConfig cfg;
  std::string out = "experiment-out";
};

int run_experiment_cmd(ExperimentArgs a) {
  a.cfg.seed = a.common.seed;
  a.cfg.workers = a.common.workers;
  const auto result = run_experiment(a.cfg, [](const std::string& m) { logger()->info("{}", m); });
  write_experiment(result, a.out);
  for (const auto& c : result.conditions) {
    logger()->info("{:>12}: mean rho {:.4f}, mean pair accuracy {:.4f}", c.name, c.mean_rho,
                   c.mean_pair_accuracy);
  }
  logger()->info("wrote experiment outputs to {}", a.out);
  return 0;
}

// ---- config files ---------------------------------------------------------

bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
  return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
    return a == flag || a.rfind(flag + "=", 0) == 0;
  });
}

// Pulls `--config FILE` out of args and appends `--key value` for each
// key=value line whose flag was not given explicitly.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 == args.size()) throw ArgumentError("--config needs a file");
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                 args.begin() + static_cast<std::ptrdiff_t>(i + 2));
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (!path) return args;
  std::ifstream in(*path, std::ios::binary);
  if (!in) throw DataError("cannot open config " + *path);
  std::vector<std::string> extra;
  std::size_t lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(*path, lineno, "expected key=value");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(*path, lineno, "empty key");
    const auto flag = "--" + key;
    if (has_flag(args, flag)) continue;
    if (value == "true") {
      extra.push_back(flag);
    } else if (value != "false") {
      extra.push_back(flag);
      extra.push_back(value);
    }
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

}  // namespace

const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names = {"rouge-1",   "rouge-2", "rouge-3",
                                                  "rouge-l",   "bertscore", "ctc",
                                                  "bartscore", "t0score"};
  return names;
}

int dispatch(const std::vector<std::string>& raw_args) {
  CLI::App app{"faithkit: faithfulness metrics, negative sampling and meta-evaluation",
               "faithkit"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  ScoreArgs score;
  auto* s = app.add_subcommand("score", "Score summaries with one metric");
  add_common(s, score.common, true);
  s->add_option("--metric", score.metric, "One of: " + fmt::format("{}", fmt::join(metric_names(), ", ")));
  s->add_option("--dialogues", score.dialogues, "dialogues.jsonl");
  s->add_option("--summaries", score.summaries, "summaries.jsonl to score");
  s->add_option("--references", score.references, "summaries.jsonl holding reference texts");
  s->add_option("--out", score.out, "Output scores.jsonl");
  s->add_option("--against", score.against, "Compare with the source dialogue or a reference")
      ->check(CLI::IsMember({"source", "reference"}))
      ->capture_default_str();
  s->add_option("--prompt", score.prompt, "Prompt template containing {source}");
  s->add_option("--prompt-file", score.prompt_file, "File of name = template lines");
  s->add_option("--prompt-name", score.prompt_name, "Template to use from --prompt-file");
  s->add_option("--aggregation", score.aggregation, "mean or sum")->capture_default_str();
  s->add_flag("--use-idf", score.use_idf, "Weight bertscore by idf");
  s->add_option("--idf", score.idf, "idf table (default: computed from the comparands)");

  NegativesArgs neg;
  auto* n = app.add_subcommand("negatives", "Generate negative summaries from positives");
  add_common(n, neg.common, true);
  n->add_option("--dialogues", neg.dialogues, "dialogues.jsonl");
  n->add_option("--summaries", neg.summaries, "summaries.jsonl (positives are used)");
  n->add_option("--out", neg.out, "Output summaries.jsonl of negatives");
  n->add_option("--gazetteer", neg.gazetteer, "TSV of surface<TAB>type (default: built-in)");
  n->add_option("--types", neg.types, "swapent, maskent, hallu")
      ->delimiter(',')
      ->capture_default_str();
  n->add_option("--hallu-max-len", neg.hallu_max_len, "Token cap for hallu samples")
      ->capture_default_str();

  FakerefsArgs fake;
  auto* f = app.add_subcommand("fakerefs", "Generate pseudo-references by prompt selection");
  add_common(f, fake.common, true);
  f->add_option("--dialogues", fake.dialogues, "dialogues.jsonl");
  f->add_option("--out", fake.out, "Output summaries.jsonl");
  f->add_option("--prompts", fake.prompts, "Prompt ids")->delimiter(',');
  f->add_option("--top-p", fake.top_p, "Nucleus mass")->capture_default_str();
  f->add_option("--max-tokens", fake.max_tokens, "Token cap")->capture_default_str();

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train the tiny model (MLE or unlikelihood)");
  add_common(t, tr.common, false);
  t->add_option("--model", tr.common.model, "Initial model (default: fresh)");
  t->add_option("--dialogues", tr.dialogues, "dialogues.jsonl");
  t->add_option("--summaries", tr.summaries, "summaries.jsonl with positives and negatives");
  t->add_option("--out", tr.out, "Output model (default: $FAITHKIT_CACHE/tiny-model.json)");
  t->add_option("--loss-trace", tr.loss_trace, "Output JSONL loss trace");
  t->add_option("--objective", tr.objective, "mle or unlikelihood")
      ->check(CLI::IsMember({"mle", "unlikelihood"}))
      ->capture_default_str();
  t->add_option("--dim", tr.dim, "Hidden size for a fresh model")->capture_default_str();
  t->add_option("--lr", tr.learning_rate, "Learning rate")->capture_default_str();
  t->add_option("--batch-size", tr.batch_size, "Batch size")->capture_default_str();
  t->add_option("--steps", tr.steps, "Optimizer steps")->capture_default_str();
  t->add_option("--alpha", tr.alpha, "Unlikelihood weight")->capture_default_str();
  t->add_option("--negative-ratio", tr.negative_ratio,
                "Negatives sampled per positive each epoch (0: use all)")
      ->capture_default_str();

  MetaevalArgs meta;
  auto* m = app.add_subcommand("metaeval", "Correlate metric scores with human judgments");
  add_common(m, meta.common, false);
  m->add_option("--scores", meta.scores, "scores.jsonl (any number of metrics)");
  m->add_option("--judgments", meta.judgments, "judgments.jsonl");
  m->add_option("--summaries", meta.summaries, "summaries.jsonl (system names)");
  m->add_option("--out", meta.out, "Output directory for report.tsv and report.json");
  m->add_option("--grouping", meta.grouping, "pooled or per-system-mean")->capture_default_str();
  m->add_option("--resamples", meta.resamples, "Bootstrap resamples")->capture_default_str();
  m->add_option("--level", meta.level, "Confidence level")->capture_default_str();
  m->add_flag("--scatter", meta.scatter, "Write one SVG scatter plot per metric");

  ExperimentArgs exp;
  auto* e = app.add_subcommand("experiment", "Synthetic untrained / MLE / unlikelihood comparison");
  add_common(e, exp.common, false);
  e->add_option("--out", exp.out, "Output directory")->capture_default_str();
  e->add_option("--n", exp.cfg.corpus_size, "Synthetic dialogues")->capture_default_str();
  e->add_option("--heldout", exp.cfg.heldout, "Held-out dialogues")->capture_default_str();
  e->add_option("--runs", exp.cfg.runs, "Seeds per condition")->capture_default_str();
  e->add_option("--dim", exp.cfg.dim, "Tiny model hidden size")->capture_default_str();
  e->add_option("--steps", exp.cfg.train.steps, "Optimizer steps")->capture_default_str();
  e->add_option("--lr", exp.cfg.train.learning_rate, "Learning rate")->capture_default_str();
  e->add_option("--batch-size", exp.cfg.train.batch_size, "Batch size")->capture_default_str();
  e->add_option("--reference-noise", exp.cfg.reference_noise,
                "Fraction of training references with an unsupported entity")
      ->capture_default_str();
  e->add_option("--negative-ratio", exp.cfg.negative_ratio, "Negatives per positive")
      ->capture_default_str();
  e->add_option("--alpha", exp.cfg.loss.alpha, "Unlikelihood weight")->capture_default_str();
  e->add_option("--resamples", exp.cfg.bootstrap_resamples, "Bootstrap resamples")
      ->capture_default_str();

  std::vector<std::string> args;
  try {
    args = merge_config(raw_args);
  } catch (const ArgumentError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& h) {
    return app.exit(h);
  } catch (const CLI::CallForAllHelp& h) {
    return app.exit(h);
  } catch (const CLI::ParseError& err) {
    std::cerr << "error: " << err.what() << "\n";
    std::cerr << "run with --help for usage\n";
    return 1;
  }

  auto* sub = app.get_subcommands().front();
  std::istringstream resolved(app.config_to_str(true, false));
  logger()->info("command: {}", sub->get_name());
  const auto prefix = sub->get_name() + ".";
  for (std::string line; std::getline(resolved, line);) {
    if (line.rfind(prefix, 0) == 0) logger()->info("  {}", line.substr(prefix.size()));
  }

  try {
    if (sub == s) return run_score(score);
    if (sub == n) return run_negatives(neg);
    if (sub == f) return run_fakerefs(fake);
    if (sub == t) return run_train(tr);
    if (sub == m) return run_metaeval(meta);
    return run_experiment_cmd(exp);
  } catch (const ArgumentError& err) {
    logger()->error("{}", err.what());
    return 1;
  } catch (const std::exception& err) {
    logger()->error("{}", err.what());
    return 2;
  }
}

}  // namespace faithkit
