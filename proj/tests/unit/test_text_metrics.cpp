#include <cmath>

#include <gtest/gtest.h>

#include "vlaforge/errors.hpp"
#include "vlaforge/text_metrics.hpp"
#include "vlaforge/util.hpp"

using namespace vlaforge;

namespace {

Tokens T(const std::string& s) { return tokenize(s); }

const Tokens kCand = T("the cat sat on the mat");
const Tokens kRef = T("the cat is on the mat");

}  // namespace

TEST(Bleu, HandComputedPrecisions) {
  // unigrams: the x2, cat, on, mat match; sat does not -> 5/6
  EXPECT_NEAR(bleu(kCand, {kRef}, 1), 5.0 / 6.0, 1e-9);
  // bigrams: the cat, on the, the mat -> 3/5
  EXPECT_NEAR(bleu(kCand, {kRef}, 2), std::sqrt(5.0 / 6.0 * 3.0 / 5.0), 1e-9);
  EXPECT_NEAR(bleu(kRef, {kRef}, 4), 1.0, 1e-12);
}

TEST(Bleu, ClippingAndBrevity) {
  // "the the the" against "the cat": clipped 1/3, candidate longer -> no penalty
  EXPECT_NEAR(bleu(T("the the the"), {T("the cat")}, 1), 1.0 / 3.0, 1e-9);
  // short candidate: bp = exp(1 - 6/3)
  EXPECT_NEAR(bleu(T("the cat sat"), {kCand}, 1), std::exp(1.0 - 2.0), 1e-9);
  // closest reference length wins, shorter on ties (lengths 2 and 4 for c = 3)
  EXPECT_NEAR(bleu(T("a b c"), {T("a b c d"), T("a b")}, 1), 1.0, 1e-9);
  EXPECT_THROW(bleu({}, {kRef}, 1), EmptyCandidateError);
  EXPECT_THROW(bleu(kCand, {kRef}, 5), RangeError);
}

TEST(RougeL, LcsFMeasure) {
  EXPECT_EQ(lcs_length(kCand, kRef), 5u);
  EXPECT_NEAR(rouge_l(kCand, kRef), 5.0 / 6.0, 1e-12);
  // P = 2/2, R = 2/4, beta 1.2
  const double p = 1.0, r = 0.5, b2 = 1.44;
  EXPECT_NEAR(rouge_l(T("a b"), T("a x b y")), (1 + b2) * p * r / (r + b2 * p), 1e-12);
  EXPECT_EQ(rouge_l(T("q"), T("a b")), 0.0);
}

TEST(Meteor, AlignmentChunksPenalty) {
  const auto d = meteor_detail(kCand, kRef);
  EXPECT_EQ(d.matches, 5u);
  EXPECT_EQ(d.chunks, 2u);
  EXPECT_NEAR(d.fmean, 5.0 / 6.0, 1e-12);
  EXPECT_NEAR(d.penalty, 0.5 * std::pow(2.0 / 5.0, 3), 1e-12);
  EXPECT_NEAR(d.score, 5.0 / 6.0 * (1 - 0.032), 1e-12);
  // stem matches count
  EXPECT_EQ(meteor_detail(T("cars stopping"), T("car stopped")).matches, 2u);
  EXPECT_EQ(meteor_simplified(T("x"), T("y")), 0.0);
}

TEST(PorterStem, ClassicCases) {
  const std::pair<const char*, const char*> cases[] = {
      {"caresses", "caress"}, {"ponies", "poni"},     {"cats", "cat"},
      {"agreed", "agre"},     {"hopping", "hop"},     {"running", "run"},
      {"happy", "happi"},     {"relational", "relat"}, {"conditional", "condit"},
      {"generalization", "gener"}, {"adjustable", "adjust"}, {"sky", "sky"},
      {"filing", "file"},     {"controlling", "control"},
  };
  for (const auto& [w, s] : cases) EXPECT_EQ(porter_stem(w), s) << w;
}

TEST(Cider, IdfAndIdentity) {
  const std::vector<std::vector<Tokens>> docs = {{T("red car stops")}, {T("green bike moves")},
                                                 {T("red light")}};
  const CiderScorer scorer(docs);
  EXPECT_EQ(scorer.corpus_size(), 3u);
  EXPECT_NEAR(scorer.idf(T("red")), std::log(3.0 / 2.0), 1e-12);
  EXPECT_NEAR(scorer.idf(T("bike")), std::log(3.0), 1e-12);
  EXPECT_NEAR(scorer.idf(T("never")), std::log(3.0), 1e-12);
  // identical text: cosine 1 for n = 1..3, no 4-grams -> (10 + 10 + 10 + 0) / 4
  EXPECT_NEAR(scorer.score(T("green bike moves"), {T("green bike moves")}), 7.5, 1e-9);
  EXPECT_EQ(scorer.score(T("blue"), {T("green bike moves")}), 0.0);
  EXPECT_THROW(CiderScorer({{T("a")}}), CorpusTooSmallError);
}

TEST(Cider, UnigramCosineOracle) {
  const std::vector<std::vector<Tokens>> docs = {{T("a b")}, {T("a c")}, {T("d")}};
  const CiderScorer scorer(docs);
  const double ia = std::log(3.0 / 2.0), ib = std::log(3.0);
  // candidate "a b" vs reference "a b": unigram/bigram identical -> 10 each,
  // trigram/4-gram vectors empty -> 0
  EXPECT_NEAR(scorer.score(T("a b"), {T("a b")}), (10.0 + 10.0) / 4.0, 1e-9);
  // "a" vs "a b": unigram cosine ia / sqrt(ia^2 + ib^2), nothing else
  EXPECT_NEAR(scorer.score(T("a"), {T("a b")}),
              10.0 * ia / std::sqrt(ia * ia + ib * ib) / 4.0, 1e-9);
}

TEST(TextScores, BatchMeans) {
  const std::vector<TextSample> s = {{"1", "the cat sat on the mat", {"the cat is on the mat"}},
                                     {"2", "a dog runs", {"a dog runs"}}};
  const auto scores = text_scores(s);
  EXPECT_NEAR(scores.at("bleu1"), (5.0 / 6.0 + 1.0) / 2.0, 1e-9);
  EXPECT_NEAR(scores.at("rouge_l"), (5.0 / 6.0 + 1.0) / 2.0, 1e-9);
  EXPECT_EQ(scores.size(), 5u);
  EXPECT_THROW(text_scores({}), EmptyBatchError);
  EXPECT_THROW(text_scores({{"x", "a", {}}, {"y", "b", {"b"}}}), EmptyCandidateError);
}
