#include "vlaforge/text_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "vlaforge/errors.hpp"
#include "vlaforge/util.hpp"

namespace vlaforge {

namespace {

std::map<Tokens, std::size_t> ngram_counts(const Tokens& tokens, std::size_t n) {
  std::map<Tokens, std::size_t> out;
  if (tokens.size() < n) return out;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++out[Tokens(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                 tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return out;
}

void require_candidate(const Tokens& candidate) {
  if (candidate.empty()) throw EmptyCandidateError("candidate has no tokens");
}

}  // namespace

double bleu(const Tokens& candidate, const std::vector<Tokens>& references, int n) {
  require_candidate(candidate);
  if (n < 1 || n > 4) throw RangeError("BLEU order must be in 1..4");
  if (references.empty()) throw EmptyCandidateError("BLEU needs at least one reference");

  double log_sum = 0.0;
  for (int k = 1; k <= n; ++k) {
    const auto cand = ngram_counts(candidate, static_cast<std::size_t>(k));
    std::map<Tokens, std::size_t> max_ref;
    for (const auto& r : references) {
      for (const auto& [g, c] : ngram_counts(r, static_cast<std::size_t>(k))) {
        max_ref[g] = std::max(max_ref[g], c);
      }
    }
    double clipped = 0.0;
    double total = 0.0;
    for (const auto& [g, c] : cand) {
      auto it = max_ref.find(g);
      clipped += static_cast<double>(std::min(c, it == max_ref.end() ? 0 : it->second));
      total += static_cast<double>(c);
    }
    log_sum += std::log((clipped + kBleuEpsilon) / (total + kBleuEpsilon));
  }

  const double c = static_cast<double>(candidate.size());
  double r = static_cast<double>(references.front().size());
  for (const auto& ref : references) {
    const double len = static_cast<double>(ref.size());
    const double d = std::abs(len - c);
    const double best = std::abs(r - c);
    if (d < best || (d == best && len < r)) r = len;
  }
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  return bp * std::exp(log_sum / n);
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(const Tokens& candidate, const Tokens& reference, double beta) {
  require_candidate(candidate);
  if (reference.empty()) throw EmptyCandidateError("ROUGE-L reference has no tokens");
  const double lcs = static_cast<double>(lcs_length(candidate, reference));
  if (lcs == 0.0) return 0.0;
  const double p = lcs / static_cast<double>(candidate.size());
  const double r = lcs / static_cast<double>(reference.size());
  const double b2 = beta * beta;
  return (1.0 + b2) * p * r / (r + b2 * p);
}

CiderScorer::CiderScorer(const std::vector<std::vector<Tokens>>& reference_documents)
    : corpus_size_(reference_documents.size()) {
  if (corpus_size_ < 2) {
    throw CorpusTooSmallError("CIDEr needs at least two reference documents");
  }
  for (const auto& doc : reference_documents) {
    std::set<Tokens> seen;
    for (const auto& ref : doc) {
      for (std::size_t n = 1; n <= 4; ++n) {
        for (const auto& [g, c] : ngram_counts(ref, n)) seen.insert(g);
      }
    }
    for (const auto& g : seen) ++df_[g];
  }
}

double CiderScorer::idf(const Tokens& ngram) const {
  auto it = df_.find(ngram);
  const double df = it == df_.end() ? 0.0 : static_cast<double>(it->second);
  return std::log(static_cast<double>(corpus_size_) / std::max(1.0, df));
}

double CiderScorer::score(const Tokens& candidate, const std::vector<Tokens>& references) const {
  require_candidate(candidate);
  if (references.empty()) throw EmptyCandidateError("CIDEr needs at least one reference");
  double total = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    auto vec = [&](const Tokens& t) {
      std::map<Tokens, double> v;
      for (const auto& [g, c] : ngram_counts(t, n)) v[g] = static_cast<double>(c) * idf(g);
      return v;
    };
    auto norm = [](const std::map<Tokens, double>& v) {
      double s = 0.0;
      for (const auto& [g, x] : v) s += x * x;
      return std::sqrt(s);
    };
    const auto cv = vec(candidate);
    const double cn = norm(cv);
    double sum = 0.0;
    for (const auto& ref : references) {
      const auto rv = vec(ref);
      const double rn = norm(rv);
      if (cn == 0.0 || rn == 0.0) continue;
      double dot = 0.0;
      for (const auto& [g, x] : cv) {
        auto it = rv.find(g);
        if (it != rv.end()) dot += x * it->second;
      }
      sum += dot / (cn * rn);
    }
    total += 10.0 * sum / static_cast<double>(references.size());
  }
  return total / 4.0;
}

MeteorDetail meteor_detail(const Tokens& candidate, const Tokens& reference) {
  require_candidate(candidate);
  if (reference.empty()) throw EmptyCandidateError("METEOR reference has no tokens");
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> align(candidate.size(), kNone);
  std::vector<bool> used(reference.size(), false);

  auto pass = [&](auto&& key) {
    for (std::size_t i = 0; i < candidate.size(); ++i) {
      if (align[i] != kNone) continue;
      const std::string ci = key(candidate[i]);
      for (std::size_t j = 0; j < reference.size(); ++j) {
        if (!used[j] && key(reference[j]) == ci) {
          align[i] = j;
          used[j] = true;
          break;
        }
      }
    }
  };
  pass([](const std::string& w) { return w; });
  pass([](const std::string& w) { return porter_stem(w); });

  MeteorDetail d;
  std::size_t prev = kNone;
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    if (align[i] == kNone) {
      prev = kNone;
      continue;
    }
    ++d.matches;
    if (prev == kNone || align[i] != prev + 1) ++d.chunks;
    prev = align[i];
  }
  if (d.matches == 0) return d;
  const double m = static_cast<double>(d.matches);
  d.precision = m / static_cast<double>(candidate.size());
  d.recall = m / static_cast<double>(reference.size());
  d.fmean = 10.0 * d.precision * d.recall / (d.recall + 9.0 * d.precision);
  d.penalty = 0.5 * std::pow(static_cast<double>(d.chunks) / m, 3.0);
  d.score = d.fmean * (1.0 - d.penalty);
  return d;
}

double meteor_simplified(const Tokens& candidate, const Tokens& reference) {
  return meteor_detail(candidate, reference).score;
}

std::map<std::string, double> text_scores(const std::vector<TextSample>& samples) {
  if (samples.empty()) throw EmptyBatchError("no text samples to score");
  std::vector<Tokens> cands;
  std::vector<std::vector<Tokens>> refs;
  for (const auto& s : samples) {
    cands.push_back(tokenize(s.candidate));
    std::vector<Tokens> r;
    for (const auto& ref : s.references) r.push_back(tokenize(ref));
    if (r.empty()) throw EmptyCandidateError("sample '" + s.id + "' has no references");
    refs.push_back(std::move(r));
  }
  const CiderScorer cider(refs);
  std::map<std::string, double> sum = {
      {"bleu1", 0.0}, {"bleu4", 0.0}, {"rouge_l", 0.0}, {"cider", 0.0}, {"meteor_s", 0.0}};
  for (std::size_t i = 0; i < samples.size(); ++i) {
    sum["bleu1"] += bleu(cands[i], refs[i], 1);
    sum["bleu4"] += bleu(cands[i], refs[i], 4);
    double rl = 0.0;
    double me = 0.0;
    for (const auto& r : refs[i]) {
      rl = std::max(rl, rouge_l(cands[i], r));
      me = std::max(me, meteor_simplified(cands[i], r));
    }
    sum["rouge_l"] += rl;
    sum["meteor_s"] += me;
    sum["cider"] += cider.score(cands[i], refs[i]);
  }
  for (auto& [k, v] : sum) v /= static_cast<double>(samples.size());
  return sum;
}

}  // namespace vlaforge
