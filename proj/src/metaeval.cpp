#include "faithkit/metaeval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "faithkit/error.hpp"
#include "faithkit/parallel.hpp"
#include "faithkit/rng.hpp"

namespace faithkit {
namespace {

void check_pair(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw ArgumentError("series lengths differ: " + std::to_string(x.size()) + " vs " +
                        std::to_string(y.size()));
  }
  if (x.size() < 2) throw ArgumentError("correlation needs at least 2 pairs");
}

// Type-7 (linear interpolation) sample quantile of sorted values.
double quantile(const std::vector<double>& sorted, double q) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::string_view to_string(Grouping g) {
  return g == Grouping::kPooled ? "pooled" : "per_system_mean";
}

Grouping parse_grouping(std::string_view s) {
  if (s == "pooled") return Grouping::kPooled;
  if (s == "per_system_mean") return Grouping::kPerSystemMean;
  throw ArgumentError("unknown grouping \"" + std::string(s) + "\" (pooled|per_system_mean)");
}

void validate(const PairedSeries& series) {
  if (series.metric_values.size() != series.human_values.size() ||
      series.ids.size() != series.metric_values.size()) {
    throw DataError("paired series has mismatched lengths");
  }
  if (series.ids.size() < 2) throw DataError("paired series needs at least 2 pairs");
  std::set<std::string_view> seen;
  for (const auto& id : series.ids) {
    if (!seen.insert(id).second) throw DataError("duplicate id \"" + id + "\" in paired series");
  }
  for (std::size_t i = 0; i < series.ids.size(); ++i) {
    if (!std::isfinite(series.metric_values[i]) || !std::isfinite(series.human_values[i])) {
      throw DataError("non-finite value for \"" + series.ids[i] + "\"");
    }
  }
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    // Positions i..j-1 hold ranks i+1..j; their mean is (i + j + 1) / 2.
    const double rank = static_cast<double>(i + j + 1) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedCorrelation("correlation undefined: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

double kendall_tau_b(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  double concordant = 0.0, discordant = 0.0, ties_x = 0.0, ties_y = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0.0 && dy == 0.0) continue;
      if (dx == 0.0) {
        ties_x += 1.0;
      } else if (dy == 0.0) {
        ties_y += 1.0;
      } else if ((dx > 0.0) == (dy > 0.0)) {
        concordant += 1.0;
      } else {
        discordant += 1.0;
      }
    }
  }
  const double denom = std::sqrt((concordant + discordant + ties_x) * (concordant + discordant + ties_y));
  if (denom == 0.0) throw UndefinedCorrelation("kendall tau undefined: zero variance");
  return (concordant - discordant) / denom;
}

PairedSeries join_scores(const std::vector<ScoreRecord>& scores,
                         const std::vector<HumanJudgment>& judgments) {
  std::map<std::string_view, double> human;
  for (const auto& j : judgments) human.emplace(j.summary_id, j.faithfulness);
  // Sort by id so the joined series does not depend on record order.
  std::vector<const ScoreRecord*> sorted;
  for (const auto& s : scores) sorted.push_back(&s);
  std::sort(sorted.begin(), sorted.end(),
            [](const auto* a, const auto* b) { return a->summary_id < b->summary_id; });

  PairedSeries series;
  std::vector<std::string> missing;
  for (const auto* s : sorted) {
    auto it = human.find(s->summary_id);
    if (it == human.end()) {
      missing.push_back(s->summary_id);
      continue;
    }
    series.ids.push_back(s->summary_id);
    series.metric_values.push_back(s->value);
    series.human_values.push_back(it->second);
  }
  if (!missing.empty()) {
    std::string list;
    for (std::size_t i = 0; i < missing.size() && i < 10; ++i) {
      list += (i ? ", " : "") + ("\"" + missing[i] + "\"");
    }
    if (missing.size() > 10) list += ", ...";
    throw DataError(std::to_string(missing.size()) + " scored ids have no judgment: " + list);
  }
  validate(series);
  return series;
}

CorrelationReport evaluate_metric(const std::vector<ScoreRecord>& scores,
                                  const std::vector<HumanJudgment>& judgments, Grouping grouping,
                                  const std::map<std::string, std::string>* systems) {
  if (scores.empty()) throw DataError("no scores to evaluate");
  std::set<std::string_view> metrics;
  for (const auto& s : scores) metrics.insert(s.metric);
  if (metrics.size() != 1) throw ArgumentError("evaluate_metric expects records of a single metric");

  const auto series = join_scores(scores, judgments);
  CorrelationReport report;
  report.metric = scores.front().metric;
  report.grouping = grouping;
  report.n = series.ids.size();
  if (grouping == Grouping::kPooled) {
    report.rho = spearman(series.metric_values, series.human_values);
    report.pearson = pearson(series.metric_values, series.human_values);
    report.kendall_tau_b = kendall_tau_b(series.metric_values, series.human_values);
    return report;
  }

  if (systems == nullptr) throw ArgumentError("per_system_mean grouping needs summary systems");
  std::map<std::string, PairedSeries> by_system;
  for (std::size_t i = 0; i < series.ids.size(); ++i) {
    auto it = systems->find(series.ids[i]);
    if (it == systems->end()) throw DataError("no system known for \"" + series.ids[i] + "\"");
    auto& s = by_system[it->second];
    s.ids.push_back(series.ids[i]);
    s.metric_values.push_back(series.metric_values[i]);
    s.human_values.push_back(series.human_values[i]);
  }
  double rho = 0.0, pr = 0.0, tau = 0.0;
  for (const auto& [system, s] : by_system) {
    try {
      validate(s);
      rho += spearman(s.metric_values, s.human_values);
      pr += pearson(s.metric_values, s.human_values);
      tau += kendall_tau_b(s.metric_values, s.human_values);
    } catch (const Error& e) {
      throw UndefinedCorrelation("system \"" + system + "\": " + e.what());
    }
  }
  const double k = static_cast<double>(by_system.size());
  report.rho = rho / k;
  report.pearson = pr / k;
  report.kendall_tau_b = tau / k;
  return report;
}

BootstrapResult bootstrap_ci(const PairedSeries& series, std::size_t resamples, double level,
                             std::uint64_t seed, std::size_t workers) {
  validate(series);
  if (resamples < 100) throw ArgumentError("bootstrap needs at least 100 resamples");
  if (!(level > 0.0 && level < 1.0)) throw ArgumentError("confidence level must lie in (0, 1)");

  const std::size_t n = series.ids.size();
  std::vector<std::optional<double>> draws(resamples);
  parallel_for(resamples, workers, [&](std::size_t r) {
    Rng rng(derive_seed(seed, r));
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto k = uniform_index(rng, n);
      x[i] = series.metric_values[k];
      y[i] = series.human_values[k];
    }
    try {
      draws[r] = spearman(x, y);
    } catch (const UndefinedCorrelation&) {
      draws[r] = std::nullopt;
    }
  });

  BootstrapResult result;
  std::vector<double> rhos;
  for (const auto& d : draws) {
    if (d) {
      rhos.push_back(*d);
    } else {
      ++result.degenerate;
    }
  }
  if (2 * result.degenerate > resamples) {
    throw DataError(std::to_string(result.degenerate) + " of " + std::to_string(resamples) +
                    " bootstrap resamples had zero variance");
  }
  std::sort(rhos.begin(), rhos.end());
  const double tail = (1.0 - level) / 2.0;
  result.low = quantile(rhos, tail);
  result.high = quantile(rhos, 1.0 - tail);
  return result;
}

void attach_bootstrap_ci(CorrelationReport& report, const PairedSeries& series,
                         std::size_t resamples, double level, std::uint64_t seed) {
  const auto ci = bootstrap_ci(series, resamples, level, seed);
  report.ci_low = std::min(ci.low, report.rho);
  report.ci_high = std::max(ci.high, report.rho);
}

}  // namespace faithkit
