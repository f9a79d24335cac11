#include "faithkit/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include "faithkit/error.hpp"
#include "faithkit/tokenize.hpp"

namespace faithkit {
namespace {

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double weight_of(const std::string& token, bool use_idf, const IdfTable* idf, double fallback) {
  if (!use_idf) return 1.0;
  auto it = idf->find(token);
  return it == idf->end() ? fallback : it->second;
}

// Weighted mean over `from` tokens of the best cosine similarity in `to`.
double greedy_side(const Encoding& from, const std::vector<double>& from_norms,
                   const Encoding& to, const std::vector<double>& to_norms, bool use_idf,
                   const IdfTable* idf, double fallback) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < from.vectors.size(); ++i) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < to.vectors.size(); ++j) {
      double sim = 0.0;
      const double nn = from_norms[i] * to_norms[j];
      if (nn > 0.0) {
        for (std::size_t k = 0; k < from.vectors[i].size(); ++k) {
          sim += from.vectors[i][k] * to.vectors[j][k];
        }
        sim = std::clamp(sim / nn, -1.0, 1.0);
      }
      best = std::max(best, sim);
    }
    const double w = weight_of(from.segments[i].token, use_idf, idf, fallback);
    num += w * best;
    den += w;
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace

OverlapScore bertscore(std::string_view hyp, std::string_view ref, const TokenEncoder& encoder,
                       bool use_idf, const IdfTable* idf) {
  if (use_idf && idf == nullptr) throw ArgumentError("bertscore: use_idf requires an idf table");
  const CheckedEncoder checked(encoder);
  const auto h = checked.encode(hyp);
  const auto r = checked.encode(ref);
  if (h.vectors.empty()) throw DataError("bertscore: hypothesis is empty after encoding");
  if (r.vectors.empty()) throw DataError("bertscore: reference is empty after encoding");

  double fallback = 1.0;
  if (use_idf && !idf->empty()) {
    fallback = std::max_element(idf->begin(), idf->end(), [](const auto& a, const auto& b) {
                 return a.second < b.second;
               })->second;
  }
  std::vector<double> hn, rn;
  for (const auto& v : h.vectors) hn.push_back(norm(v));
  for (const auto& v : r.vectors) rn.push_back(norm(v));
  const double p = greedy_side(h, hn, r, rn, use_idf, idf, fallback);
  const double rec = greedy_side(r, rn, h, hn, use_idf, idf, fallback);
  return make_overlap(p, rec);
}

IdfTable compute_idf(const std::vector<std::string>& documents) {
  std::map<std::string, int> df;
  for (const auto& doc : documents) {
    const auto toks = tokenize(doc);
    for (const auto& t : std::set<std::string>(toks.begin(), toks.end())) ++df[t];
  }
  const double m = static_cast<double>(documents.size());
  IdfTable out;
  for (const auto& [tok, count] : df) out[tok] = std::log((m + 1.0) / (count + 1.0));
  return out;
}

IdfTable load_idf(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  IdfTable out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    std::string token;
    double value = 0.0;
    std::string extra;
    if (!(ss >> token >> value) || (ss >> extra) || !std::isfinite(value)) {
      throw ParseError(path.string(), lineno, "expected: <token> <idf>");
    }
    if (!out.emplace(token, value).second) {
      throw ParseError(path.string(), lineno, "duplicate token \"" + token + "\"");
    }
  }
  return out;
}

void save_idf(const IdfTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << std::setprecision(17);
  for (const auto& [tok, v] : table) out << tok << '\t' << v << '\n';
}

double ctc_consistency(std::string_view source, std::string_view hyp,
                       const TokenConsistencyAligner& aligner) {
  const CheckedAligner checked(aligner);
  if (checked.segment(hyp).empty()) throw DataError("ctc: hypothesis is empty after tokenization");
  const auto probs = checked.consistency(source, hyp);
  double sum = 0.0;
  for (double p : probs) sum += p;
  return sum / static_cast<double>(probs.size());
}

}  // namespace faithkit
