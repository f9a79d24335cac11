#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "faithkit/error.hpp"
#include "faithkit/tiny_model.hpp"
#include "faithkit/tokenize.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace faithkit;

namespace {

const std::string kSource = "amanda : i baked cookies . jerry : sure !";
const std::string kTarget = "amanda baked cookies .";

TinyModel small_model(std::uint64_t seed = 1, std::size_t dim = 4) {
  return TinyModel(build_vocab({kSource, kTarget, "jerry will bring some tomorrow"}), dim, seed);
}

}  // namespace

TEST(TinyModel, NextTokenDistributionNormalized) {
  const auto m = small_model();
  for (const auto& prefix : std::vector<std::vector<std::string>>{
           {}, {"amanda"}, {"amanda", "baked"}, {"jerry", "jerry", "jerry"}}) {
    const auto lp = m.next_token_logprobs(kSource, prefix);
    double total = 0;
    for (double v : lp) total += std::exp(v);
    EXPECT_NEAR(total, 1.0, 1e-6);
  }
}

TEST(TinyModel, ScoresTokensPlusEos) {
  const auto m = small_model();
  const auto lp = m.token_logprobs(kSource, kTarget);
  EXPECT_EQ(lp.size(), 5u);
  EXPECT_EQ(m.segment(kTarget).size(), 5u);
  for (double v : lp) EXPECT_LE(v, 0.0);
  EXPECT_EQ(m.token_logprobs(kSource, kTarget), lp);
}

TEST(TinyModel, SeedDeterminesInitialization) {
  auto a = small_model(42);
  auto b = small_model(42);
  auto c = small_model(43);
  EXPECT_TRUE(std::equal(a.parameters().begin(), a.parameters().end(), b.parameters().begin()));
  EXPECT_FALSE(std::equal(a.parameters().begin(), a.parameters().end(), c.parameters().begin()));
}

TEST(TinyModel, UnknownTokenListed) {
  const auto m = small_model();
  try {
    m.token_logprobs(kSource, "amanda ate zebras");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("zebras"), std::string::npos) << e.what();
  }
}

TEST(TinyModel, ParameterCap) {
  std::vector<std::string> vocab = {"<bos>", "<eos>"};
  for (int i = 0; i < 2000; ++i) vocab.push_back("w" + std::to_string(i));
  EXPECT_THROW(TinyModel(vocab, 16, 0), ArgumentError);
  EXPECT_LT(small_model().parameter_count(), TinyModel::kMaxParameters);
}

TEST(TinyModel, NllGradientMatchesFiniteDifferences) {
  auto m = small_model(3);
  const auto n = m.token_logprobs(kSource, kTarget).size();
  const std::vector<double> dloss(n, -1.0);  // loss = -sum log p
  m.zero_grad();
  m.accumulate_gradient(kSource, kTarget, dloss);
  const std::vector<double> analytic(m.gradient().begin(), m.gradient().end());
  const auto numeric = oracle::finite_difference(m, [&] {
    const auto lp = m.token_logprobs(kSource, kTarget);
    return -std::accumulate(lp.begin(), lp.end(), 0.0);
  }, 1e-5);
  EXPECT_LT(oracle::max_relative_error(analytic, numeric, 1e-3), 1e-4);
}

TEST(TinyModel, GreedyGenerationDeterministic) {
  const auto m = small_model(5);
  SamplingConfig cfg;
  cfg.strategy = SamplingStrategy::kGreedy;
  cfg.max_tokens = 6;
  const auto a = m.generate(kSource, "p", cfg);
  EXPECT_EQ(a, m.generate(kSource, "p", cfg));
  EXPECT_FALSE(a.empty());
  EXPECT_LE(tokenize(a).size(), 6u);
}

TEST(TinyModel, TopPReproducibleUnderSeed) {
  const auto m = small_model(5);
  SamplingConfig cfg;
  cfg.strategy = SamplingStrategy::kTopP;
  cfg.p = 1.0;
  cfg.seed = 9;
  cfg.max_tokens = 8;
  EXPECT_EQ(m.generate(kSource, "p", cfg), m.generate(kSource, "p", cfg));
  std::set<std::string> outputs;
  for (std::uint64_t s = 0; s < 10; ++s) {
    cfg.seed = s;
    outputs.insert(m.generate(kSource, "p", cfg));
  }
  EXPECT_GT(outputs.size(), 1u);
}

TEST(TinyModel, SaveLoadRoundTrip) {
  testutil::TempDir dir;
  const auto m = small_model(8);
  m.save(dir / "m.json");
  const auto loaded = TinyModel::load(dir / "m.json");
  EXPECT_EQ(loaded.vocab(), m.vocab());
  EXPECT_EQ(loaded.token_logprobs(kSource, kTarget), m.token_logprobs(kSource, kTarget));
}

TEST(TinyModel, GradientStepLowersNll) {
  auto m = small_model(2, 6);
  auto nll = [&] {
    const auto lp = m.token_logprobs(kSource, kTarget);
    return -std::accumulate(lp.begin(), lp.end(), 0.0);
  };
  const double before = nll();
  for (int i = 0; i < 20; ++i) {
    m.zero_grad();
    m.accumulate_gradient(kSource, kTarget,
                          std::vector<double>(m.segment(kTarget).size(), -1.0));
    m.apply_gradient(0.1);
  }
  EXPECT_LT(nll(), before);
}
