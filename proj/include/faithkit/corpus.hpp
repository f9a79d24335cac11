#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace faithkit {

struct Turn {
  std::string speaker;
  std::string utterance;

  bool operator==(const Turn&) const = default;
};

struct Dialogue {
  std::string id;
  std::vector<Turn> turns;

  bool operator==(const Dialogue&) const = default;
};

enum class Label { kPositive, kNegative };
enum class NegType { kSwapEnt, kMaskEnt, kHallu };

std::string_view to_string(Label label);
std::string_view to_string(NegType type);
Label parse_label(std::string_view s);
NegType parse_neg_type(std::string_view s);

struct LabeledSummary {
  std::string id;
  std::string dialogue_id;
  std::string system;  // producing system, or "reference"
  std::string text;
  Label label = Label::kPositive;
  std::optional<NegType> neg_type;
  // Positions over the toolkit tokenizer's tokens of `text`.
  std::set<int> negative_indices;

  bool operator==(const LabeledSummary&) const = default;
};

struct HumanJudgment {
  std::string summary_id;
  double faithfulness = 0.0;  // [1, 10]

  bool operator==(const HumanJudgment&) const = default;
};

struct ScoreRecord {
  std::string summary_id;
  std::string metric;
  double value = 0.0;

  bool operator==(const ScoreRecord&) const = default;
  auto operator<=>(const ScoreRecord&) const = default;
};

inline constexpr double kMinFaithfulness = 1.0;
inline constexpr double kMaxFaithfulness = 10.0;

// Invariant checks; throw DataError describing the violation.
void validate(const Dialogue& d);
void validate(const LabeledSummary& s);
void validate(const HumanJudgment& j);
void validate(const ScoreRecord& r);

// "<speaker>: <utterance>" lines joined by '\n'.
std::string render_dialogue(const Dialogue& d);

// JSON-lines loaders. Errors carry the 1-based line number; duplicate ids are
// reported by name. Blank lines are skipped.
std::vector<Dialogue> load_dialogues(const std::filesystem::path& path);
std::vector<LabeledSummary> load_summaries(const std::filesystem::path& path);
std::vector<HumanJudgment> load_judgments(const std::filesystem::path& path);
std::vector<ScoreRecord> load_scores(const std::filesystem::path& path);

void save_dialogues(const std::vector<Dialogue>& dialogues, const std::filesystem::path& path);
void save_summaries(const std::vector<LabeledSummary>& summaries,
                    const std::filesystem::path& path);
void save_judgments(const std::vector<HumanJudgment>& judgments,
                    const std::filesystem::path& path);
void save_scores(const std::vector<ScoreRecord>& records, const std::filesystem::path& path);

// Single-record (de)serialization, one JSON object without trailing newline.
std::string to_json_line(const Dialogue& d);
std::string to_json_line(const LabeledSummary& s);
std::string to_json_line(const HumanJudgment& j);
std::string to_json_line(const ScoreRecord& r);

// Throws DataError naming the first summary whose dialogue_id is unknown.
void check_references(const std::vector<LabeledSummary>& summaries,
                      const std::vector<Dialogue>& dialogues);

const Dialogue& find_dialogue(const std::vector<Dialogue>& dialogues, std::string_view id);

}  // namespace faithkit
