#include "faithkit/tiny_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "faithkit/error.hpp"
#include "faithkit/rng.hpp"
#include "faithkit/tokenize.hpp"
#include "json.hpp"

namespace faithkit {

struct TinyModel::SourceCache {
  std::vector<int> ids;       // <bos> source... <eos>
  std::vector<double> keys;   // ids.size() x dim
  std::vector<double> values; // ids.size() x dim
};

struct TinyModel::StepCache {
  int prev1 = 0;
  int prev2 = 0;
  std::vector<double> query;
  std::vector<double> attention;
  std::vector<double> hidden;
  std::vector<double> vocab_probs;
  double gate = 0.0;
  // Mixed next-token distribution over the vocabulary.
  std::vector<double> probs;
};

namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void softmax_inplace(std::vector<double>& x) {
  const double mx = *std::max_element(x.begin(), x.end());
  double sum = 0.0;
  for (auto& v : x) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (auto& v : x) v /= sum;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

constexpr double kInitRange = 0.3;

}  // namespace

TinyModel::TinyModel(std::vector<std::string> vocab, std::size_t dim)
    : vocab_(std::move(vocab)), dim_(dim) {
  if (dim_ < 2) throw ArgumentError("tiny model dimension must be >= 2");
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    if (!index_.emplace(vocab_[i], static_cast<int>(i)).second) {
      throw ArgumentError("duplicate vocabulary entry \"" + vocab_[i] + "\"");
    }
  }
  auto bos = index_.find(std::string(kBos));
  auto eos = index_.find(std::string(kEos));
  if (bos == index_.end() || eos == index_.end()) {
    throw ArgumentError("vocabulary must contain <bos> and <eos>");
  }
  bos_ = bos->second;
  eos_ = eos->second;

  const std::size_t vd = vocab_.size() * dim_;
  std::size_t cursor = 0;
  auto take = [&](std::size_t n) {
    const auto at = cursor;
    cursor += n;
    return at;
  };
  off_.key_self = take(vd);
  off_.key_prev = take(vd);
  off_.key_next = take(vd);
  off_.value = take(vd);
  off_.query_prev1 = take(vd);
  off_.query_prev2 = take(vd);
  off_.out = take(vd);
  off_.bias = take(vocab_.size());
  off_.gate = take(dim_);
  off_.gate_bias = take(1);
  off_.total = cursor;
  if (off_.total >= kMaxParameters) {
    throw ArgumentError("tiny model would have " + std::to_string(off_.total) +
                        " parameters; the limit is " + std::to_string(kMaxParameters));
  }
  params_.assign(off_.total, 0.0);
  grad_.assign(off_.total, 0.0);
}

TinyModel::TinyModel(std::vector<std::string> vocab, std::size_t dim, std::uint64_t seed)
    : TinyModel(std::move(vocab), dim) {
  Rng rng(derive_seed(seed, "tiny-model-init"));
  // Embedding and output blocks are random; biases and the gate start at zero.
  for (std::size_t i = 0; i < off_.bias; ++i) {
    params_[i] = (2.0 * uniform01(rng) - 1.0) * kInitRange;
  }
}

std::vector<int> TinyModel::encode(std::string_view text, const char* what) const {
  std::vector<int> ids;
  std::vector<std::string> unknown;
  for (auto& tok : tokenize(text)) {
    auto it = index_.find(tok);
    if (it == index_.end()) {
      unknown.push_back(std::move(tok));
    } else {
      ids.push_back(it->second);
    }
  }
  if (!unknown.empty()) {
    std::string list;
    for (const auto& u : unknown) list += (list.empty() ? "" : ", ") + ("\"" + u + "\"");
    throw DataError(std::string("tiny model cannot tokenize ") + what + ": unknown tokens " + list);
  }
  return ids;
}

TinyModel::SourceCache TinyModel::encode_source(const std::vector<int>& source_ids) const {
  SourceCache src;
  src.ids.reserve(source_ids.size() + 2);
  src.ids.push_back(bos_);
  src.ids.insert(src.ids.end(), source_ids.begin(), source_ids.end());
  src.ids.push_back(eos_);
  const std::size_t m = src.ids.size();
  src.keys.assign(m * dim_, 0.0);
  src.values.assign(m * dim_, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    const int prev = j == 0 ? bos_ : src.ids[j - 1];
    const int next = j + 1 == m ? eos_ : src.ids[j + 1];
    const double* ks = row(off_.key_self, src.ids[j]);
    const double* kp = row(off_.key_prev, prev);
    const double* kn = row(off_.key_next, next);
    const double* v = row(off_.value, src.ids[j]);
    for (std::size_t k = 0; k < dim_; ++k) {
      src.keys[j * dim_ + k] = ks[k] + kp[k] + kn[k];
      src.values[j * dim_ + k] = v[k];
    }
  }
  return src;
}

void TinyModel::step_forward(const SourceCache& src, int prev1, int prev2, StepCache& c) const {
  const std::size_t m = src.ids.size();
  const std::size_t n_vocab = vocab_.size();
  c.prev1 = prev1;
  c.prev2 = prev2;
  c.query.assign(dim_, 0.0);
  const double* q1 = row(off_.query_prev1, prev1);
  const double* q2 = row(off_.query_prev2, prev2);
  for (std::size_t k = 0; k < dim_; ++k) c.query[k] = q1[k] + q2[k];

  c.attention.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    c.attention[j] = dot(c.query.data(), src.keys.data() + j * dim_, dim_);
  }
  softmax_inplace(c.attention);

  c.hidden.assign(dim_, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    const double a = c.attention[j];
    const double* v = src.values.data() + j * dim_;
    for (std::size_t k = 0; k < dim_; ++k) c.hidden[k] += a * v[k];
  }
  for (std::size_t k = 0; k < dim_; ++k) c.hidden[k] = std::tanh(c.hidden[k] + c.query[k]);

  c.vocab_probs.resize(n_vocab);
  for (std::size_t w = 0; w < n_vocab; ++w) {
    c.vocab_probs[w] = dot(row(off_.out, static_cast<int>(w)), c.hidden.data(), dim_) +
                       params_[off_.bias + w];
  }
  softmax_inplace(c.vocab_probs);

  c.gate = sigmoid(dot(params_.data() + off_.gate, c.hidden.data(), dim_) +
                   params_[off_.gate_bias]);

  c.probs.resize(n_vocab);
  for (std::size_t w = 0; w < n_vocab; ++w) c.probs[w] = c.gate * c.vocab_probs[w];
  for (std::size_t j = 0; j < m; ++j) {
    c.probs[src.ids[j]] += (1.0 - c.gate) * c.attention[j];
  }
}

std::vector<Segment> TinyModel::segment(std::string_view target) const {
  std::vector<Segment> out;
  std::vector<std::string> unknown;
  for (auto& t : tokenize_with_spans(target)) {
    if (!index_.contains(t.text)) unknown.push_back(t.text);
    out.push_back({std::move(t.text), t.begin, t.end});
  }
  if (!unknown.empty()) encode(target, "target");  // throws with the full list
  out.push_back({std::string(kEos), target.size(), target.size()});
  return out;
}

std::vector<double> TinyModel::token_logprobs(std::string_view source,
                                              std::string_view target) const {
  const auto src = encode_source(encode(source, "source"));
  auto ids = encode(target, "target");
  ids.push_back(eos_);
  std::vector<double> out;
  out.reserve(ids.size());
  StepCache c;
  int prev1 = bos_;
  int prev2 = bos_;
  for (const int y : ids) {
    step_forward(src, prev1, prev2, c);
    out.push_back(std::min(0.0, std::log(c.probs[y])));
    prev2 = prev1;
    prev1 = y;
  }
  return out;
}

std::vector<double> TinyModel::next_token_logprobs(std::string_view source,
                                                   const std::vector<std::string>& prefix) const {
  const auto src = encode_source(encode(source, "source"));
  int prev1 = bos_;
  int prev2 = bos_;
  for (const auto& tok : prefix) {
    auto it = index_.find(tok);
    if (it == index_.end()) throw DataError("tiny model: unknown prefix token \"" + tok + "\"");
    prev2 = prev1;
    prev1 = it->second;
  }
  StepCache c;
  step_forward(src, prev1, prev2, c);
  std::vector<double> out(c.probs.size());
  std::transform(c.probs.begin(), c.probs.end(), out.begin(), [](double p) { return std::log(p); });
  return out;
}

std::string TinyModel::generate(std::string_view source, std::string_view prompt_id,
                                const SamplingConfig& sampling) const {
  const auto src = encode_source(encode(source, "source"));
  Rng rng(derive_seed(sampling.seed, prompt_id));
  std::vector<std::string> tokens;
  StepCache c;
  int prev1 = bos_;
  int prev2 = bos_;
  std::vector<std::size_t> order(vocab_.size());
  while (tokens.size() < sampling.max_tokens) {
    step_forward(src, prev1, prev2, c);
    c.probs[bos_] = 0.0;
    if (tokens.empty()) c.probs[eos_] = 0.0;  // no empty generations
    int next = 0;
    if (sampling.strategy == SamplingStrategy::kGreedy) {
      next = static_cast<int>(std::max_element(c.probs.begin(), c.probs.end()) - c.probs.begin());
    } else {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return c.probs[a] > c.probs[b]; });
      const double total = std::accumulate(c.probs.begin(), c.probs.end(), 0.0);
      double kept = 0.0;
      std::size_t cut = 0;
      while (cut < order.size() && (cut == 0 || kept < sampling.p * total)) {
        kept += c.probs[order[cut]];
        ++cut;
      }
      double u = uniform01(rng) * kept;
      next = static_cast<int>(order[cut - 1]);
      for (std::size_t i = 0; i < cut; ++i) {
        u -= c.probs[order[i]];
        if (u < 0.0) {
          next = static_cast<int>(order[i]);
          break;
        }
      }
    }
    if (next == eos_) break;
    tokens.push_back(vocab_[next]);
    prev2 = prev1;
    prev1 = next;
  }
  return join_tokens(tokens);
}

void TinyModel::zero_grad() { std::fill(grad_.begin(), grad_.end(), 0.0); }

void TinyModel::accumulate_gradient(std::string_view source, std::string_view target,
                                    std::span<const double> dloss_dlogprob) {
  const auto src = encode_source(encode(source, "source"));
  auto ids = encode(target, "target");
  ids.push_back(eos_);
  if (dloss_dlogprob.size() != ids.size()) {
    throw ArgumentError("gradient has " + std::to_string(dloss_dlogprob.size()) +
                        " entries for " + std::to_string(ids.size()) + " target tokens");
  }
  const std::size_t m = src.ids.size();
  const std::size_t n_vocab = vocab_.size();
  std::vector<double> dkeys(m * dim_, 0.0);
  std::vector<double> dvalues(m * dim_, 0.0);
  std::vector<double> dh(dim_), dq(dim_), dpre(dim_), da(m), dlogits(n_vocab);
  double* g = grad_.data();

  StepCache c;
  int prev1 = bos_;
  int prev2 = bos_;
  for (std::size_t t = 0; t < ids.size(); ++t) {
    const int y = ids[t];
    step_forward(src, prev1, prev2, c);
    prev2 = prev1;
    prev1 = y;
    const double upstream = dloss_dlogprob[t];
    if (upstream == 0.0) continue;

    double copy_y = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (src.ids[j] == y) copy_y += c.attention[j];
    }
    const double p = c.probs[y];
    const double dp = upstream / p;

    // Gate.
    const double dz = dp * (c.vocab_probs[y] - copy_y) * c.gate * (1.0 - c.gate);
    for (std::size_t k = 0; k < dim_; ++k) {
      g[off_.gate + k] += dz * c.hidden[k];
      dh[k] = dz * params_[off_.gate + k];
    }
    g[off_.gate_bias] += dz;

    // Vocabulary softmax.
    const double dpv = dp * c.gate * c.vocab_probs[y];
    for (std::size_t w = 0; w < n_vocab; ++w) {
      dlogits[w] = dpv * ((static_cast<int>(w) == y ? 1.0 : 0.0) - c.vocab_probs[w]);
    }
    for (std::size_t w = 0; w < n_vocab; ++w) {
      const double dl = dlogits[w];
      double* go = g + off_.out + w * dim_;
      const double* o = row(off_.out, static_cast<int>(w));
      for (std::size_t k = 0; k < dim_; ++k) {
        go[k] += dl * c.hidden[k];
        dh[k] += dl * o[k];
      }
      g[off_.bias + w] += dl;
    }

    // h = tanh(q + context).
    for (std::size_t k = 0; k < dim_; ++k) {
      dpre[k] = dh[k] * (1.0 - c.hidden[k] * c.hidden[k]);
      dq[k] = dpre[k];
    }

    // Attention feeds both the context vector and the copy distribution.
    double weighted = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double* v = src.values.data() + j * dim_;
      double dav = dot(v, dpre.data(), dim_);
      if (src.ids[j] == y) dav += dp * (1.0 - c.gate);
      da[j] = dav;
      weighted += c.attention[j] * dav;
      double* dv = dvalues.data() + j * dim_;
      for (std::size_t k = 0; k < dim_; ++k) dv[k] += c.attention[j] * dpre[k];
    }
    for (std::size_t j = 0; j < m; ++j) {
      const double de = c.attention[j] * (da[j] - weighted);
      const double* key = src.keys.data() + j * dim_;
      double* dk = dkeys.data() + j * dim_;
      for (std::size_t k = 0; k < dim_; ++k) {
        dq[k] += de * key[k];
        dk[k] += de * c.query[k];
      }
    }

    double* gq1 = g + off_.query_prev1 + c.prev1 * dim_;
    double* gq2 = g + off_.query_prev2 + c.prev2 * dim_;
    for (std::size_t k = 0; k < dim_; ++k) {
      gq1[k] += dq[k];
      gq2[k] += dq[k];
    }
  }

  for (std::size_t j = 0; j < m; ++j) {
    const int prev = j == 0 ? bos_ : src.ids[j - 1];
    const int next = j + 1 == m ? eos_ : src.ids[j + 1];
    double* gs = g + off_.key_self + src.ids[j] * dim_;
    double* gp = g + off_.key_prev + prev * dim_;
    double* gn = g + off_.key_next + next * dim_;
    double* gv = g + off_.value + src.ids[j] * dim_;
    for (std::size_t k = 0; k < dim_; ++k) {
      gs[k] += dkeys[j * dim_ + k];
      gp[k] += dkeys[j * dim_ + k];
      gn[k] += dkeys[j * dim_ + k];
      gv[k] += dvalues[j * dim_ + k];
    }
  }
}

void TinyModel::apply_gradient(double learning_rate) {
  for (std::size_t i = 0; i < params_.size(); ++i) params_[i] -= learning_rate * grad_[i];
}

void TinyModel::save(const std::filesystem::path& path) const {
  nlohmann::json obj{{"format", "faithkit-tiny-1"},
                     {"dim", dim_},
                     {"vocab", vocab_},
                     {"params", params_}};
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << obj.dump() << '\n';
}

TinyModel TinyModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  nlohmann::json obj;
  try {
    in >> obj;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  if (obj.value("format", "") != "faithkit-tiny-1") {
    throw DataError(path.string() + ": not a tiny model file");
  }
  TinyModel model(obj.at("vocab").get<std::vector<std::string>>(), obj.at("dim").get<std::size_t>());
  auto params = obj.at("params").get<std::vector<double>>();
  if (params.size() != model.params_.size()) {
    throw DataError(path.string() + ": parameter count mismatch");
  }
  model.params_ = std::move(params);
  return model;
}

std::vector<std::string> build_vocab(const std::vector<std::string>& texts) {
  std::set<std::string> tokens;
  for (const auto& t : texts) {
    for (auto& tok : tokenize(t)) tokens.insert(std::move(tok));
  }
  tokens.erase(std::string(TinyModel::kBos));
  tokens.erase(std::string(TinyModel::kEos));
  std::vector<std::string> vocab{std::string(TinyModel::kBos), std::string(TinyModel::kEos)};
  vocab.insert(vocab.end(), tokens.begin(), tokens.end());
  return vocab;
}

}  // namespace faithkit
