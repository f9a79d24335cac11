#include "faithkit/corpus.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "json.hpp"

#include "faithkit/error.hpp"
#include "faithkit/tokenize.hpp"

namespace faithkit {
namespace {

using nlohmann::json;

std::string require_string(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw DataError(std::string("missing field \"") + key + "\"");
  if (!it->is_string()) throw DataError(std::string("field \"") + key + "\" must be a string");
  return it->get<std::string>();
}

double require_number(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw DataError(std::string("missing field \"") + key + "\"");
  if (!it->is_number()) throw DataError(std::string("field \"") + key + "\" must be a number");
  return it->get<double>();
}

Dialogue dialogue_from_json(const json& obj) {
  Dialogue d;
  d.id = require_string(obj, "id");
  auto it = obj.find("turns");
  if (it == obj.end() || !it->is_array()) throw DataError("field \"turns\" must be an array");
  for (const auto& t : *it) {
    if (!t.is_object()) throw DataError("each turn must be an object");
    d.turns.push_back({require_string(t, "speaker"), require_string(t, "text")});
  }
  validate(d);
  return d;
}

LabeledSummary summary_from_json(const json& obj) {
  LabeledSummary s;
  s.id = require_string(obj, "id");
  s.dialogue_id = require_string(obj, "dialogue_id");
  s.system = require_string(obj, "system");
  s.text = require_string(obj, "text");
  s.label = parse_label(require_string(obj, "label"));
  if (auto it = obj.find("neg_type"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) throw DataError("field \"neg_type\" must be a string");
    s.neg_type = parse_neg_type(it->get<std::string>());
  }
  if (auto it = obj.find("negative_indices"); it != obj.end() && !it->is_null()) {
    if (!it->is_array()) throw DataError("field \"negative_indices\" must be an array");
    for (const auto& v : *it) {
      if (!v.is_number_integer()) throw DataError("negative_indices must hold integers");
      if (!s.negative_indices.insert(v.get<int>()).second) {
        throw DataError("negative_indices contains duplicate " + v.dump());
      }
    }
  }
  validate(s);
  return s;
}

HumanJudgment judgment_from_json(const json& obj) {
  HumanJudgment j{require_string(obj, "summary_id"), require_number(obj, "faithfulness")};
  validate(j);
  return j;
}

ScoreRecord score_from_json(const json& obj) {
  ScoreRecord r{require_string(obj, "summary_id"), require_string(obj, "metric"),
                require_number(obj, "value")};
  validate(r);
  return r;
}

template <typename T, typename Parse, typename Key>
std::vector<T> load_jsonl(const std::filesystem::path& path, Parse parse, Key key) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<T> out;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    T record;
    try {
      const auto obj = json::parse(line);
      if (!obj.is_object()) throw DataError("expected a JSON object");
      record = parse(obj);
    } catch (const json::exception& e) {
      throw ParseError(path.string(), lineno, e.what());
    } catch (const DataError& e) {
      throw ParseError(path.string(), lineno, e.what());
    }
    const std::string k = key(record);
    if (!seen.insert(k).second) {
      throw ParseError(path.string(), lineno, "duplicate id \"" + k + "\"");
    }
    out.push_back(std::move(record));
  }
  return out;
}

template <typename T>
void save_jsonl(const std::vector<T>& records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& r : records) {
    validate(r);
    out << to_json_line(r) << '\n';
  }
  if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace

std::string_view to_string(Label label) {
  return label == Label::kPositive ? "positive" : "negative";
}

std::string_view to_string(NegType type) {
  switch (type) {
    case NegType::kSwapEnt:
      return "swapent";
    case NegType::kMaskEnt:
      return "maskent";
    case NegType::kHallu:
      return "hallu";
  }
  return "?";
}

Label parse_label(std::string_view s) {
  if (s == "positive") return Label::kPositive;
  if (s == "negative") return Label::kNegative;
  throw DataError("unknown label \"" + std::string(s) + "\"");
}

NegType parse_neg_type(std::string_view s) {
  if (s == "swapent") return NegType::kSwapEnt;
  if (s == "maskent") return NegType::kMaskEnt;
  if (s == "hallu") return NegType::kHallu;
  throw DataError("unknown neg_type \"" + std::string(s) + "\"");
}

void validate(const Dialogue& d) {
  if (d.id.empty()) throw DataError("dialogue id is empty");
  for (std::size_t i = 0; i < d.turns.size(); ++i) {
    if (d.turns[i].speaker.empty() || d.turns[i].utterance.empty()) {
      throw DataError("dialogue \"" + d.id + "\" turn " + std::to_string(i) +
                      " has an empty speaker or utterance");
    }
  }
}

void validate(const LabeledSummary& s) {
  if (s.id.empty()) throw DataError("summary id is empty");
  if (s.label == Label::kPositive) {
    if (!s.negative_indices.empty()) {
      throw DataError("positive summary \"" + s.id + "\" carries negative_indices");
    }
    if (s.neg_type) throw DataError("positive summary \"" + s.id + "\" carries a neg_type");
  } else if (!s.neg_type) {
    throw DataError("negative summary \"" + s.id + "\" has no neg_type");
  }
  if (!s.negative_indices.empty()) {
    const auto count = static_cast<int>(tokenize(s.text).size());
    if (*s.negative_indices.begin() < 0 || *s.negative_indices.rbegin() >= count) {
      throw DataError("summary \"" + s.id + "\" has negative index out of range [0, " +
                      std::to_string(count) + ")");
    }
  }
}

void validate(const HumanJudgment& j) {
  if (j.summary_id.empty()) throw DataError("judgment summary_id is empty");
  if (!(j.faithfulness >= kMinFaithfulness && j.faithfulness <= kMaxFaithfulness)) {
    throw DataError("faithfulness for \"" + j.summary_id + "\" outside [1, 10]");
  }
}

void validate(const ScoreRecord& r) {
  if (r.summary_id.empty()) throw DataError("score summary_id is empty");
  if (r.metric.empty()) throw DataError("score metric is empty");
  if (!std::isfinite(r.value)) {
    throw DataError("non-finite score for \"" + r.summary_id + "\" (" + r.metric + ")");
  }
}

std::string render_dialogue(const Dialogue& d) {
  std::string out;
  for (const auto& t : d.turns) {
    if (!out.empty()) out += '\n';
    out += t.speaker;
    out += ": ";
    out += t.utterance;
  }
  return out;
}

std::string to_json_line(const Dialogue& d) {
  json turns = json::array();
  for (const auto& t : d.turns) turns.push_back({{"speaker", t.speaker}, {"text", t.utterance}});
  return json{{"id", d.id}, {"turns", std::move(turns)}}.dump();
}

std::string to_json_line(const LabeledSummary& s) {
  json obj{{"id", s.id},
           {"dialogue_id", s.dialogue_id},
           {"system", s.system},
           {"text", s.text},
           {"label", to_string(s.label)}};
  if (s.neg_type) obj["neg_type"] = to_string(*s.neg_type);
  if (s.label == Label::kNegative) obj["negative_indices"] = s.negative_indices;
  return obj.dump();
}

std::string to_json_line(const HumanJudgment& j) {
  return json{{"summary_id", j.summary_id}, {"faithfulness", j.faithfulness}}.dump();
}

std::string to_json_line(const ScoreRecord& r) {
  return json{{"summary_id", r.summary_id}, {"metric", r.metric}, {"value", r.value}}.dump();
}

std::vector<Dialogue> load_dialogues(const std::filesystem::path& path) {
  return load_jsonl<Dialogue>(path, dialogue_from_json, [](const Dialogue& d) { return d.id; });
}

std::vector<LabeledSummary> load_summaries(const std::filesystem::path& path) {
  return load_jsonl<LabeledSummary>(path, summary_from_json,
                                    [](const LabeledSummary& s) { return s.id; });
}

std::vector<HumanJudgment> load_judgments(const std::filesystem::path& path) {
  return load_jsonl<HumanJudgment>(path, judgment_from_json,
                                   [](const HumanJudgment& j) { return j.summary_id; });
}

std::vector<ScoreRecord> load_scores(const std::filesystem::path& path) {
  // (summary_id, metric) is the record key; one summary carries many metrics.
  return load_jsonl<ScoreRecord>(path, score_from_json, [](const ScoreRecord& r) {
    return r.summary_id + '\x1f' + r.metric;
  });
}

void save_dialogues(const std::vector<Dialogue>& dialogues, const std::filesystem::path& path) {
  save_jsonl(dialogues, path);
}

void save_summaries(const std::vector<LabeledSummary>& summaries,
                    const std::filesystem::path& path) {
  save_jsonl(summaries, path);
}

void save_judgments(const std::vector<HumanJudgment>& judgments,
                    const std::filesystem::path& path) {
  save_jsonl(judgments, path);
}

void save_scores(const std::vector<ScoreRecord>& records, const std::filesystem::path& path) {
  save_jsonl(records, path);
}

void check_references(const std::vector<LabeledSummary>& summaries,
                      const std::vector<Dialogue>& dialogues) {
  std::set<std::string_view> ids;
  for (const auto& d : dialogues) ids.insert(d.id);
  for (const auto& s : summaries) {
    if (!ids.contains(s.dialogue_id)) {
      throw DataError("summary \"" + s.id + "\" references unknown dialogue \"" +
                      s.dialogue_id + "\"");
    }
  }
}

const Dialogue& find_dialogue(const std::vector<Dialogue>& dialogues, std::string_view id) {
  for (const auto& d : dialogues) {
    if (d.id == id) return d;
  }
  throw DataError("unknown dialogue \"" + std::string(id) + "\"");
}

}  // namespace faithkit
