#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "faithkit/error.hpp"
#include "faithkit/metaeval.hpp"
#include "faithkit/report.hpp"
#include "faithkit/rng.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace faithkit;

namespace {

std::vector<double> random_vector(Rng& rng, std::size_t n, std::size_t levels) {
  std::vector<double> v(n);
  for (auto& x : v) x = static_cast<double>(uniform_index(rng, levels));
  return v;
}

struct Fixture {
  std::vector<ScoreRecord> scores;
  std::vector<HumanJudgment> judgments;
};

Fixture tied_fixture() {
  const double metric[] = {1, 2, 2, 4};
  const double human[] = {1, 3, 2, 4};
  Fixture f;
  for (int i = 0; i < 4; ++i) {
    const auto id = "s" + std::to_string(i);
    f.scores.push_back({id, "m", metric[i]});
    f.judgments.push_back({id, human[i]});
  }
  return f;
}

}  // namespace

TEST(Spearman, Monotone) {
  EXPECT_DOUBLE_EQ(spearman(std::vector<double>{1, 2, 3}, std::vector<double>{10, 20, 30}), 1.0);
  EXPECT_DOUBLE_EQ(spearman(std::vector<double>{1, 2, 3}, std::vector<double>{3, 2, 1}), -1.0);
}

TEST(Spearman, TiedHandCase) {
  const std::vector<double> x = {1, 2, 2, 4};
  const std::vector<double> y = {1, 3, 2, 4};
  EXPECT_EQ(average_ranks(x), (std::vector<double>{1, 2.5, 2.5, 4}));
  // Ranks (1, 2.5, 2.5, 4) vs (1, 3, 2, 4): cov 4.5 over sqrt(4.5 * 5).
  EXPECT_NEAR(spearman(x, y), 4.5 / std::sqrt(4.5 * 5.0), 1e-12);
  EXPECT_NEAR(spearman(x, y), 0.9487, 1e-4);
}

TEST(Spearman, MatchesRankThenPearsonOracle) {
  Rng rng(17);
  for (int i = 0; i < 200; ++i) {
    const auto n = 3 + uniform_index(rng, 30);
    const auto levels = i % 2 ? 4 : 1000;  // heavy ties on odd iterations
    auto x = random_vector(rng, n, levels);
    auto y = random_vector(rng, n, levels);
    x[0] = 0;
    x[1] = 1;  // never constant
    y[0] = 1;
    y[1] = 0;
    EXPECT_NEAR(spearman(x, y), oracle::rank_then_pearson(x, y), 1e-9);
  }
}

TEST(Spearman, InvariantUnderIncreasingTransforms) {
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    auto x = random_vector(rng, 12, 6);
    auto y = random_vector(rng, 12, 6);
    x[0] = 0;
    x[1] = 5;
    y[0] = 5;
    y[1] = 0;
    std::vector<double> ex(x.size());
    std::vector<double> ax(x.size());
    std::transform(x.begin(), x.end(), ex.begin(), [](double v) { return std::exp(v / 3.0); });
    std::transform(x.begin(), x.end(), ax.begin(), [](double v) { return 2.5 * v - 7.0; });
    EXPECT_NEAR(spearman(ex, y), spearman(x, y), 1e-12);
    EXPECT_NEAR(spearman(ax, y), spearman(x, y), 1e-12);
    EXPECT_DOUBLE_EQ(spearman(x, y), spearman(y, x));
  }
}

TEST(Spearman, Errors) {
  EXPECT_THROW(spearman(std::vector<double>{1, 2}, std::vector<double>{1, 2, 3}), ArgumentError);
  EXPECT_THROW(spearman(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}),
               UndefinedCorrelation);
}

TEST(KendallTau, HandValues) {
  EXPECT_DOUBLE_EQ(kendall_tau_b(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}), 1.0);
  // x = (1,2,2,4), y = (1,3,2,4): 5 concordant, 0 discordant, one x-tie.
  EXPECT_NEAR(kendall_tau_b(std::vector<double>{1, 2, 2, 4}, std::vector<double>{1, 3, 2, 4}),
              5.0 / std::sqrt(5.0 * 6.0), 1e-12);
}

TEST(EvaluateMetric, IdentityAndNegation) {
  std::vector<ScoreRecord> scores;
  std::vector<ScoreRecord> negated;
  std::vector<HumanJudgment> judgments;
  for (int i = 0; i < 10; ++i) {
    const auto id = "s" + std::to_string(i);
    const double h = 1 + (i * 7) % 10;
    scores.push_back({id, "m", h});
    negated.push_back({id, "m", -h});
    judgments.push_back({id, h});
  }
  EXPECT_DOUBLE_EQ(evaluate_metric(scores, judgments, Grouping::kPooled).rho, 1.0);
  EXPECT_DOUBLE_EQ(evaluate_metric(negated, judgments, Grouping::kPooled).rho, -1.0);
}

TEST(EvaluateMetric, TiedFixturePooled) {
  const auto f = tied_fixture();
  const auto r = evaluate_metric(f.scores, f.judgments, Grouping::kPooled);
  EXPECT_NEAR(r.rho, 0.9487, 1e-4);
  EXPECT_EQ(r.n, 4u);
}

TEST(EvaluateMetric, RecordOrderInvariant) {
  Rng rng(8);
  std::vector<ScoreRecord> scores;
  std::vector<HumanJudgment> judgments;
  for (int i = 0; i < 40; ++i) {
    const auto id = "s" + std::to_string(i);
    scores.push_back({id, "m", uniform01(rng)});
    judgments.push_back({id, 1 + static_cast<double>(uniform_index(rng, 10))});
  }
  const double base = evaluate_metric(scores, judgments, Grouping::kPooled).rho;
  for (int k = 0; k < 5; ++k) {
    stable_shuffle(scores.begin(), scores.end(), rng);
    stable_shuffle(judgments.begin(), judgments.end(), rng);
    EXPECT_EQ(evaluate_metric(scores, judgments, Grouping::kPooled).rho, base);
  }
}

TEST(EvaluateMetric, UnmatchedIdsListed) {
  auto f = tied_fixture();
  f.scores.push_back({"orphan", "m", 1.0});
  try {
    evaluate_metric(f.scores, f.judgments, Grouping::kPooled);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("orphan"), std::string::npos);
  }
}

TEST(EvaluateMetric, PerSystemMean) {
  std::vector<ScoreRecord> scores;
  std::vector<HumanJudgment> judgments;
  std::map<std::string, std::string> systems;
  // System a: perfect agreement; system b: perfect disagreement.
  for (int i = 0; i < 4; ++i) {
    scores.push_back({"a" + std::to_string(i), "m", static_cast<double>(i)});
    judgments.push_back({"a" + std::to_string(i), 1.0 + i});
    systems["a" + std::to_string(i)] = "a";
    scores.push_back({"b" + std::to_string(i), "m", static_cast<double>(i)});
    judgments.push_back({"b" + std::to_string(i), 4.0 - i});
    systems["b" + std::to_string(i)] = "b";
  }
  const auto r = evaluate_metric(scores, judgments, Grouping::kPerSystemMean, &systems);
  EXPECT_NEAR(r.rho, 0.0, 1e-12);
  EXPECT_EQ(r.grouping, Grouping::kPerSystemMean);
  EXPECT_THROW(evaluate_metric(scores, judgments, Grouping::kPerSystemMean), ArgumentError);
}

TEST(Bootstrap, PerfectAndAntiCorrelated) {
  PairedSeries s;
  for (int i = 0; i < 20; ++i) {
    s.ids.push_back("s" + std::to_string(i));
    s.metric_values.push_back(i);
    s.human_values.push_back(2.0 * i);
  }
  auto ci = bootstrap_ci(s, 200, 0.95, 1);
  EXPECT_EQ(ci.low, 1.0);
  EXPECT_EQ(ci.high, 1.0);
  for (auto& v : s.human_values) v = -v;
  ci = bootstrap_ci(s, 200, 0.95, 1);
  EXPECT_EQ(ci.low, -1.0);
  EXPECT_EQ(ci.high, -1.0);
}

TEST(Bootstrap, ReproducibleAndContainsRho) {
  Rng rng(4);
  PairedSeries s;
  for (int i = 0; i < 30; ++i) {
    s.ids.push_back("s" + std::to_string(i));
    s.metric_values.push_back(uniform01(rng));
    s.human_values.push_back(s.metric_values.back() + uniform01(rng));
  }
  const auto a = bootstrap_ci(s, 300, 0.9, 77);
  const auto b = bootstrap_ci(s, 300, 0.9, 77, 4);
  EXPECT_EQ(a.low, b.low);
  EXPECT_EQ(a.high, b.high);
  CorrelationReport r;
  r.rho = spearman(s.metric_values, s.human_values);
  attach_bootstrap_ci(r, s, 300, 0.9, 77);
  ASSERT_TRUE(r.ci_low && r.ci_high);
  EXPECT_LE(*r.ci_low, r.rho);
  EXPECT_GE(*r.ci_high, r.rho);
}

TEST(Bootstrap, MostlyDegenerateIsAnError) {
  PairedSeries s;
  for (int i = 0; i < 10; ++i) {
    s.ids.push_back("s" + std::to_string(i));
    // A resample is degenerate unless it draws both index 0 and index 1
    // (probability about 0.41 for n = 10).
    s.metric_values.push_back(i == 0 ? 1.0 : 0.0);
    s.human_values.push_back(i == 1 ? 1.0 : 0.0);
  }
  EXPECT_THROW(bootstrap_ci(s, 200, 0.95, 0), Error);
}

TEST(Report, TsvAndJson) {
  CorrelationReport r;
  r.metric = "rouge-l";
  r.rho = 0.5;
  r.n = 4;
  r.ci_low = 0.25;
  r.ci_high = 0.75;
  const auto tsv = format_report_tsv({r});
  EXPECT_EQ(tsv.substr(0, tsv.find('\n')),
            "metric\tgrouping\tn\trho\tci_low\tci_high\tpearson\tkendall_tau_b");
  EXPECT_NE(tsv.find("rouge-l\tpooled\t4\t0.500000\t0.250000\t0.750000"), std::string::npos);
  EXPECT_NE(format_report_json({r}).find("\"rho\""), std::string::npos);
}
