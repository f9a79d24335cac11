#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "faithkit/corpus.hpp"

namespace faithkit {

enum class Grouping { kPooled, kPerSystemMean };

std::string_view to_string(Grouping g);
Grouping parse_grouping(std::string_view s);

struct PairedSeries {
  std::vector<std::string> ids;
  std::vector<double> metric_values;
  std::vector<double> human_values;
};

// Throws DataError unless lengths match, n >= 2, ids are unique and values finite.
void validate(const PairedSeries& series);

struct CorrelationReport {
  std::string metric;
  double rho = 0.0;
  std::size_t n = 0;
  std::optional<double> ci_low;
  std::optional<double> ci_high;
  Grouping grouping = Grouping::kPooled;
  // Auxiliary statistics over the same pairs (pooled) or averaged per system.
  double pearson = 0.0;
  double kendall_tau_b = 0.0;
};

// 1-based ranks, ties sharing their average rank.
std::vector<double> average_ranks(std::span<const double> values);

// Pearson correlation. Throws UndefinedCorrelation on zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

// Pearson correlation of average ranks. Throws ArgumentError on length
// mismatch or n < 2, UndefinedCorrelation when either side is constant.
double spearman(std::span<const double> x, std::span<const double> y);

// Kendall's tau-b with tie correction. Throws UndefinedCorrelation when either side is constant.
double kendall_tau_b(std::span<const double> x, std::span<const double> y);

// Joins scores of one metric to judgments by summary id. Per-system grouping
// needs `systems` (summary id -> producing system). Throws DataError listing
// up to ten unmatched ids.
CorrelationReport evaluate_metric(const std::vector<ScoreRecord>& scores,
                                  const std::vector<HumanJudgment>& judgments, Grouping grouping,
                                  const std::map<std::string, std::string>* systems = nullptr);

PairedSeries join_scores(const std::vector<ScoreRecord>& scores,
                         const std::vector<HumanJudgment>& judgments);

struct BootstrapResult {
  double low = 0.0;
  double high = 0.0;
  std::size_t degenerate = 0;  // resamples skipped for zero variance
};

// Percentile bootstrap of Spearman's rho over paired resamples. Resample r
// draws from its own generator seeded by (seed, r), so results do not depend
// on `workers`. Throws DataError if more than half the resamples are degenerate.
BootstrapResult bootstrap_ci(const PairedSeries& series, std::size_t resamples, double level,
                             std::uint64_t seed, std::size_t workers = 1);

// Fills ci_low/ci_high from a bootstrap over the pooled series, widening the
// interval if needed so that it contains the point estimate.
void attach_bootstrap_ci(CorrelationReport& report, const PairedSeries& series,
                         std::size_t resamples, double level, std::uint64_t seed);

}  // namespace faithkit
