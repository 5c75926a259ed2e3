#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace vlaforge {

using Tokens = std::vector<std::string>;

inline constexpr double kBleuEpsilon = 1e-9;
inline constexpr double kRougeBeta = 1.2;

std::string porter_stem(std::string_view word);

// Clipped n-gram precisions 1..n with (c + eps) / (t + eps) smoothing,
// geometric mean, times the brevity penalty against the closest reference
// length (shorter wins ties). Throws EmptyCandidateError, RangeError for
// n outside 1..4.
double bleu(const Tokens& candidate, const std::vector<Tokens>& references, int n);

// LCS-based F-measure with recall weighted by beta.
double rouge_l(const Tokens& candidate, const Tokens& reference, double beta = kRougeBeta);
std::size_t lcs_length(const Tokens& a, const Tokens& b);

// Plain CIDEr: mean over n = 1..4 of 10 x cosine similarity between TF-IDF
// n-gram vectors. Document frequencies come from the reference documents
// given at construction (one document per sample, i.e. the union of its
// references).
class CiderScorer {
 public:
  // Throws CorpusTooSmallError for fewer than two documents.
  explicit CiderScorer(const std::vector<std::vector<Tokens>>& reference_documents);

  double score(const Tokens& candidate, const std::vector<Tokens>& references) const;
  std::size_t corpus_size() const { return corpus_size_; }
  double idf(const Tokens& ngram) const;

 private:
  std::size_t corpus_size_ = 0;
  std::map<Tokens, std::size_t> df_;
};

struct MeteorDetail {
  std::size_t matches = 0;
  std::size_t chunks = 0;
  double precision = 0.0;
  double recall = 0.0;
  double fmean = 0.0;
  double penalty = 0.0;
  double score = 0.0;
};

// Simplified METEOR: greedy exact then Porter-stem unigram alignment,
// Fmean = 10PR / (R + 9P), penalty = 0.5 (chunks / matches)^3.
MeteorDetail meteor_detail(const Tokens& candidate, const Tokens& reference);
double meteor_simplified(const Tokens& candidate, const Tokens& reference);

struct TextSample {
  std::string id;
  std::string candidate;
  std::vector<std::string> references;
};

// Mean sentence-level scores keyed "bleu1", "bleu4", "rouge_l", "cider",
// "meteor_s". CIDEr document frequencies come from the batch's references.
std::map<std::string, double> text_scores(const std::vector<TextSample>& samples);

}  // namespace vlaforge
