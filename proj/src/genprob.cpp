#include "faithkit/genprob.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "faithkit/error.hpp"
#include "faithkit/parallel.hpp"

namespace faithkit {
namespace {

std::size_t count_placeholders(std::string_view s) {
  std::size_t n = 0;
  for (auto pos = s.find(kSourcePlaceholder); pos != std::string_view::npos;
       pos = s.find(kSourcePlaceholder, pos + kSourcePlaceholder.size())) {
    ++n;
  }
  return n;
}

std::string unescape(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\' || i + 1 == s.size()) {
      out += s[i];
      continue;
    }
    switch (s[++i]) {
      case 'n':
        out += '\n';
        break;
      case 't':
        out += '\t';
        break;
      case '\\':
        out += '\\';
        break;
      default:
        out += '\\';
        out += s[i];
    }
  }
  return out;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void validate_template(std::string_view prompt_template) {
  const auto n = count_placeholders(prompt_template);
  if (n != 1) {
    throw ArgumentError("prompt template must contain exactly one {source}, found " +
                        std::to_string(n));
  }
}

std::string apply_template(std::string_view prompt_template, std::string_view source) {
  validate_template(prompt_template);
  const auto pos = prompt_template.find(kSourcePlaceholder);
  std::string out(prompt_template.substr(0, pos));
  out += source;
  out += prompt_template.substr(pos + kSourcePlaceholder.size());
  return out;
}

FaithfulnessScore genprob_score(std::string_view source, std::string_view hypothesis,
                                const ConditionalScorer& scorer, const GenProbConfig& cfg) {
  if (cfg.prob_floor && !(*cfg.prob_floor > 0.0 && *cfg.prob_floor <= 1.0)) {
    throw ArgumentError("probability floor must lie in (0, 1]");
  }
  const CheckedScorer checked(scorer);
  const auto segments = checked.segment(hypothesis);
  const bool has_content = std::any_of(segments.begin(), segments.end(),
                                       [](const Segment& s) { return s.end > s.begin; });
  if (!has_content) throw DataError("hypothesis is empty after tokenization");

  const auto logprobs = checked.token_logprobs(apply_template(cfg.prompt_template, source),
                                               hypothesis);
  const double floor = cfg.prob_floor ? std::log(*cfg.prob_floor) : -INFINITY;
  double sum = 0.0;
  for (double lp : logprobs) sum += std::max(lp, floor);
  if (!std::isfinite(sum)) throw DataError("hypothesis log-probability is not finite");
  FaithfulnessScore score{sum, logprobs.size()};
  if (cfg.aggregation == Aggregation::kMean) score.value = sum / static_cast<double>(logprobs.size());
  return score;
}

std::vector<FaithfulnessScore> genprob_score_batch(
    const std::vector<std::pair<std::string, std::string>>& pairs,
    const ConditionalScorer& scorer, const GenProbConfig& cfg, std::size_t workers) {
  std::vector<FaithfulnessScore> out(pairs.size());
  parallel_for(pairs.size(), workers, [&](std::size_t i) {
    try {
      out[i] = genprob_score(pairs[i].first, pairs[i].second, scorer, cfg);
    } catch (const Error& e) {
      throw DataError("batch element " + std::to_string(i) + ": " + e.what());
    }
  });
  return out;
}

std::map<std::string, std::string> parse_prompt_templates(std::string_view content,
                                                          const std::string& origin) {
  std::map<std::string, std::string> out;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    auto nl = content.find('\n', pos);
    if (nl == std::string_view::npos) nl = content.size();
    const auto line = trim(content.substr(pos, nl - pos));
    pos = nl + 1;
    ++lineno;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(origin, lineno, "expected name = template");
    }
    const std::string name(trim(line.substr(0, eq)));
    std::string tmpl = unescape(trim(line.substr(eq + 1)));
    if (name.empty()) throw ParseError(origin, lineno, "empty template name");
    try {
      validate_template(tmpl);
    } catch (const ArgumentError& e) {
      throw ParseError(origin, lineno, e.what());
    }
    if (!out.emplace(name, std::move(tmpl)).second) {
      throw ParseError(origin, lineno, "duplicate template \"" + name + "\"");
    }
  }
  return out;
}

std::map<std::string, std::string> load_prompt_templates(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_prompt_templates(ss.str(), path.string());
}

Aggregation parse_aggregation(std::string_view s) {
  if (s == "mean") return Aggregation::kMean;
  if (s == "sum") return Aggregation::kSum;
  throw ArgumentError("unknown aggregation \"" + std::string(s) + "\" (mean|sum)");
}

}  // namespace faithkit
