#include "faithkit/synth.hpp"

#include <algorithm>
#include <array>
#include <regex>
#include <set>

#include <fmt/format.h>

#include "faithkit/error.hpp"
#include "faithkit/negatives.hpp"
#include "faithkit/rng.hpp"
#include "faithkit/stubs.hpp"
#include "faithkit/training.hpp"

namespace faithkit {
namespace {

const std::vector<std::string> kNames = {"Amanda", "Jerry", "Olivia", "Tom",    "Emma", "Lucas",
                                         "Sophie", "Mark",  "Hannah", "Ryan",   "Chloe", "Ben"};
const std::vector<std::string> kFoods = {"cookies", "muffins", "cake",     "pie",      "bread",
                                         "pizza",   "soup",    "brownies", "pancakes", "lasagna"};
const std::vector<std::string> kObjects = {"charger", "umbrella", "bike",   "laptop",
                                           "camera",  "jacket",   "guitar", "book"};
const std::vector<std::string> kDays = {"Monday", "Tuesday",  "Wednesday", "Thursday",
                                        "Friday", "Saturday", "Sunday"};
const std::vector<std::string> kPlaces = {"park",   "gym",     "library", "cinema",
                                          "office", "station", "mall",    "beach"};

struct Scenario {
  std::vector<std::pair<char, std::string>> turns;  // speaker role 'A' or 'B'
  std::vector<std::string> summaries;  // reference paraphrases
  bool food;
};

const std::vector<Scenario>& scenarios() {
  static const std::vector<Scenario> all = {
      {{{'A', "I baked {item}. Do you want some?"},
        {'B', "Sure!"},
        {'A', "I'll bring you some {day} :-)"}},
       {"{A} baked {item} and will bring {B} some {day}.",
        "{A} will bring {B} some {item} on {day}.",
        "{A} offered {B} some {item} and will bring them {day}."},
       true},
      {{{'A', "Are you coming to the {place} on {day}?"},
        {'B', "Yes, I will meet {C} there."},
        {'A', "Great, see you!"}},
       {"{B} will meet {C} at the {place} on {day}.",
        "{B} and {C} will be at the {place} on {day}.",
        "On {day} {B} is going to the {place} to meet {C}."},
       false},
      {{{'A', "Can you lend me your {item}?"},
        {'B', "Sorry, I gave it to {C} yesterday."},
        {'A', "Ok, I will ask {C}."}},
       {"{B} gave the {item} to {C}, so {A} will ask {C}.",
        "{A} will ask {C} for the {item} because {B} gave it to {C}.",
        "{C} has the {item} of {B} now."},
       false},
      {{{'A', "{B}, did you call {C}?"}, {'B', "Not yet, I will call {C} on {day}."}},
       {"{B} will call {C} on {day}.",
        "{B} has not called {C} yet and will do it on {day}.",
        "On {day} {B} will call {C}."},
       false},
      {{{'A', "I lost my {item} at the {place}."}, {'B', "I saw it there on {day}. Ask {C}."}},
       {"{A} lost the {item} at the {place} and {B} suggests asking {C}.",
        "{B} saw the {item} of {A} at the {place} on {day}.",
        "{A} should ask {C} about the {item} lost at the {place}."},
       false},
      {{{'A', "Hi {B}! Will you drive me to the {place}?"},
        {'B', "Sure, I can pick you up on {day}."}},
       {"{B} will drive {A} to the {place} on {day}.",
        "{B} will pick {A} up on {day} and drive to the {place}.",
        "On {day} {A} gets a ride to the {place} from {B}."},
       false},
      {{{'A', "Do you want {item} for dinner?"},
        {'B', "Yes! {C} is coming too."},
        {'A', "Then I will cook for {B} and {C}."}},
       {"{A} will cook {item} for {B} and {C}.",
        "{A} is cooking {item} for dinner with {B} and {C}.",
        "{B} and {C} will have {item} for dinner cooked by {A}."},
       true},
  };
  return all;
}

const std::vector<std::string> kOutOfDomain = {
    "{N} was seen at the {place} on {day}.",
    "Officials said the {place} will close on {day}.",
    "{N} and {M} won a prize for their {item}.",
    "Police are looking for a stolen {item} near the {place}.",
    "{N} reported that the {item} market fell on {day}.",
    "A new {place} opened on {day}, {N} said.",
};

struct Fillers {
  std::string a, b, c, n, m, item, day, place;
};

std::string expand(std::string_view tmpl, const Fillers& f) {
  std::string out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] != '{') {
      out += tmpl[i++];
      continue;
    }
    const auto close = tmpl.find('}', i);
    const auto key = tmpl.substr(i + 1, close - i - 1);
    if (key == "A") out += f.a;
    else if (key == "B") out += f.b;
    else if (key == "C") out += f.c;
    else if (key == "N") out += f.n;
    else if (key == "M") out += f.m;
    else if (key == "item") out += f.item;
    else if (key == "day") out += f.day;
    else if (key == "place") out += f.place;
    else throw Error("unknown synth placeholder " + std::string(key));
    i = close + 1;
  }
  return out;
}

const std::string& pick(const std::vector<std::string>& pool, Rng& rng) {
  return pool[uniform_index(rng, pool.size())];
}

Fillers draw_fillers(Rng& rng, bool food) {
  std::array<std::size_t, 3> people{};
  people[0] = uniform_index(rng, kNames.size());
  do people[1] = uniform_index(rng, kNames.size()); while (people[1] == people[0]);
  do people[2] = uniform_index(rng, kNames.size());
  while (people[2] == people[0] || people[2] == people[1]);
  Fillers f;
  f.a = kNames[people[0]];
  f.b = kNames[people[1]];
  f.c = kNames[people[2]];
  f.n = pick(kNames, rng);
  f.m = pick(kNames, rng);
  f.item = pick(food ? kFoods : kObjects, rng);
  f.day = pick(kDays, rng);
  f.place = pick(kPlaces, rng);
  return f;
}

std::vector<std::string> fill_candidates() {
  std::vector<std::string> out;
  for (const auto* pool : {&kNames, &kFoods, &kObjects, &kDays, &kPlaces}) {
    out.insert(out.end(), pool->begin(), pool->end());
  }
  return out;
}

const std::vector<std::string>& pool_for(std::string_view key, bool food) {
  if (key == "item") return food ? kFoods : kObjects;
  if (key == "day") return kDays;
  if (key == "place") return kPlaces;
  return kNames;
}

// Masked-LM stand-in for the synthetic domain: matches the masked text
// against the summary templates to learn each mask's slot, then fills it with
// a random filler of that slot's category. Falls back to any filler.
class TemplateInfiller final : public Infiller {
 public:
  explicit TemplateInfiller(std::uint64_t seed) : seed_(seed) {
    for (const auto& sc : scenarios()) {
      for (const auto& t : sc.summaries) {
        Pattern p;
        std::string rx;
        std::size_t i = 0;
        while (i < t.size()) {
          const auto open = t.find('{', i);
          const auto lit = t.substr(i, open == std::string::npos ? std::string::npos : open - i);
          for (char ch : lit) {
            if (std::string_view("\\^$.|?*+()[]{}").find(ch) != std::string_view::npos) rx += '\\';
            rx += ch;
          }
          if (open == std::string::npos) break;
          const auto close = t.find('}', open);
          p.keys.push_back(t.substr(open + 1, close - open - 1));
          rx += "(.+?)";
          i = close + 1;
        }
        p.regex = std::regex(rx);
        p.food = sc.food;
        patterns_.push_back(std::move(p));
      }
    }
  }

  std::string fill(std::string_view masked_text) const override {
    const std::string text(masked_text);
    std::vector<const std::vector<std::string>*> pools;
    for (const auto& p : patterns_) {
      std::smatch m;
      if (!std::regex_match(text, m, p.regex)) continue;
      for (std::size_t g = 1; g < m.size(); ++g) {
        if (m[g].str() == kMaskToken) pools.push_back(&pool_for(p.keys[g - 1], p.food));
      }
      break;
    }
    static const auto any = fill_candidates();
    Rng rng(derive_seed(seed_, text));
    std::string out;
    std::size_t i = 0;
    std::size_t ordinal = 0;
    const std::string mask(kMaskToken);
    while (true) {
      const auto pos = text.find(mask, i);
      out += text.substr(i, pos == std::string::npos ? std::string::npos : pos - i);
      if (pos == std::string::npos) break;
      const auto& pool = ordinal < pools.size() ? *pools[ordinal] : any;
      out += pool[uniform_index(rng, pool.size())];
      ++ordinal;
      i = pos + mask.size();
    }
    return out;
  }

 private:
  struct Pattern {
    std::regex regex;
    std::vector<std::string> keys;
    bool food = false;
  };
  std::vector<Pattern> patterns_;
  std::uint64_t seed_;
};

}  // namespace

const std::map<std::string, std::string>& synth_gazetteer() {
  static const auto table = [] {
    std::map<std::string, std::string> t;
    for (const auto& s : kNames) t[s] = "PERSON";
    for (const auto& s : kFoods) t[s] = "ITEM";
    for (const auto& s : kObjects) t[s] = "ITEM";
    for (const auto& s : kDays) t[s] = "DATE";
    for (const auto& s : kPlaces) t[s] = "LOCATION";
    return t;
  }();
  return table;
}

const std::vector<std::string>& synth_vocabulary() {
  static const auto vocab = [] {
    std::vector<std::string> texts = fill_candidates();
    const Fillers blank{};
    for (const auto& sc : scenarios()) {
      for (const auto& [role, utt] : sc.turns) texts.push_back(expand(utt, blank));
      for (const auto& t : sc.summaries) texts.push_back(expand(t, blank));
    }
    for (const auto& t : kOutOfDomain) texts.push_back(expand(t, blank));
    texts.push_back(":");  // speaker separator in rendered dialogues
    return build_vocab(texts);
  }();
  return vocab;
}

SynthCorpus synth_dialogues(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ArgumentError("synth corpus size must be >= 1");
  SynthCorpus corpus;
  Rng rng(derive_seed(seed, "synth-dialogues"));
  const auto width = fmt::formatted_size("{}", n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& sc = scenarios()[uniform_index(rng, scenarios().size())];
    const auto f = draw_fillers(rng, sc.food);
    Dialogue d;
    d.id = fmt::format("d{:0{}}", i, width);
    for (const auto& [role, utt] : sc.turns) {
      d.turns.push_back({role == 'A' ? f.a : f.b, expand(utt, f)});
    }
    LabeledSummary ref;
    ref.id = d.id + "-ref";
    ref.dialogue_id = d.id;
    ref.system = "reference";
    ref.text = expand(sc.summaries[uniform_index(rng, sc.summaries.size())], f);
    corpus.positives.push_back(std::move(ref));
    corpus.dialogues.push_back(std::move(d));
  }
  return corpus;
}

TinyModel make_out_of_domain_generator(std::uint64_t seed) {
  // Sources are in-domain dialogues, targets are unrelated news-style
  // sentences: the model learns the style but not to follow the source.
  const auto pool = synth_dialogues(64, derive_seed(seed, "ood-sources"));
  Rng rng(derive_seed(seed, "ood-targets"));
  std::vector<TrainItem> data;
  for (const auto& d : pool.dialogues) {
    TrainItem item;
    item.source = render_dialogue(d);
    item.target = expand(pick(kOutOfDomain, rng), draw_fillers(rng, uniform01(rng) < 0.5));
    data.push_back(std::move(item));
  }
  TinyModel model(synth_vocabulary(), 12, derive_seed(seed, "ood-model"));
  TrainConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.batch_size = 8;
  cfg.steps = 120;
  cfg.seed = derive_seed(seed, "ood-train");
  train(model, data, LossConfig{}, cfg);
  return model;
}

std::vector<LabeledSummary> add_extrinsic_noise(const std::vector<LabeledSummary>& summaries,
                                                const std::vector<Dialogue>& dialogues,
                                                double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw ArgumentError("noise rate must be in [0, 1]");
  const auto tagger = make_gazetteer_tagger(synth_gazetteer());
  std::vector<LabeledSummary> out = summaries;
  for (auto& s : out) {
    Rng rng(derive_seed(seed, s.id));
    if (uniform01(rng) >= rate) continue;
    const auto spans = tagger->tag(s.text);
    if (spans.empty()) continue;
    std::set<std::string> in_source;
    for (const auto& e : tagger->tag(render_dialogue(find_dialogue(dialogues, s.dialogue_id)))) {
      in_source.insert(e.surface);
    }
    const auto& span = spans[uniform_index(rng, spans.size())];
    for (const auto* pool : {&kNames, &kFoods, &kObjects, &kDays, &kPlaces}) {
      if (std::find(pool->begin(), pool->end(), span.surface) == pool->end()) continue;
      std::vector<std::string> options;
      for (const auto& c : *pool) {
        if (!in_source.contains(c)) options.push_back(c);
      }
      if (options.empty()) break;
      s.text = s.text.substr(0, span.char_start) + options[uniform_index(rng, options.size())] +
               s.text.substr(span.char_end);
      break;
    }
  }
  return out;
}

SynthCorpus synth_corpus(std::size_t n, std::uint64_t seed) {
  auto corpus = synth_dialogues(n, seed);
  const auto tagger = make_gazetteer_tagger(synth_gazetteer());
  const TemplateInfiller infiller(derive_seed(seed, "synth-fill"));
  const auto hallu = make_out_of_domain_generator(derive_seed(seed, "synth-hallu"));
  NegativeBackends backends{tagger.get(), &infiller, &hallu};
  corpus.negatives = generate_negatives(corpus.positives, corpus.dialogues, backends,
                                        {NegType::kSwapEnt, NegType::kMaskEnt, NegType::kHallu},
                                        derive_seed(seed, "synth-negatives"), 24);
  return corpus;
}

}  // namespace faithkit
