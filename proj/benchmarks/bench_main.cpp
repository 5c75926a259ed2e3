#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "vlaforge/facts.hpp"
#include "vlaforge/geometry.hpp"
#include "vlaforge/lexicon.hpp"
#include "vlaforge/orchestrator.hpp"
#include "vlaforge/temporal_memory.hpp"
#include "vlaforge/text_metrics.hpp"
#include "vlaforge/util.hpp"

using namespace vlaforge;

namespace {

Matrix random_matrix(int rows, int cols, SeededStream& rng) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
  }
  return m;
}

Tokens random_tokens(SeededStream& rng, std::size_t n) {
  static const std::vector<std::string> vocab = {"car", "lane", "left", "right", "slows",
                                                 "stops", "light", "road", "ahead", "behind",
                                                 "yield", "merge", "near", "far", "cyclist"};
  Tokens t;
  for (std::size_t i = 0; i < n; ++i) t.push_back(vocab[rng.index(vocab.size())]);
  return t;
}

SceneWindow busy_window(int objects) {
  FrameRecord f;
  f.frame_id = "f0";
  f.lanes.same_direction_lanes = 2;
  SeededStream rng(3);
  for (int i = 0; i < objects; ++i) {
    ObjectAnnotation o;
    o.object_id = "veh-" + std::to_string(i);
    o.category = i % 3 == 0 ? ObjectCategory::kPedestrian : ObjectCategory::kVehicle;
    o.center = Vec3(rng.uniform(-40, 40), rng.uniform(-40, 40), 0.0);
    f.objects.push_back(o);
  }
  SceneWindow w;
  w.scene_id = "bench";
  w.frames = {f};
  return w;
}

}  // namespace

static void BM_BoxOverlap(benchmark::State& state) {
  SeededStream rng(1);
  std::vector<OrientedBox2D> boxes(256);
  for (auto& b : boxes) {
    b.center = Vec2(rng.uniform(-5, 5), rng.uniform(-5, 5));
    b.half_extents = Vec2(rng.uniform(0.5, 2.5), rng.uniform(0.5, 1.2));
    b.yaw = rng.uniform(-kPi, kPi);
  }
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(boxes_overlap(boxes[i % 256], boxes[(i * 7 + 3) % 256]));
    ++i;
  }
}
BENCHMARK(BM_BoxOverlap);

static void BM_Bleu4(benchmark::State& state) {
  SeededStream rng(2);
  const auto c = random_tokens(rng, static_cast<std::size_t>(state.range(0)));
  const auto r = random_tokens(rng, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(bleu(c, {r}, 4));
}
BENCHMARK(BM_Bleu4)->Arg(16)->Arg(64);

static void BM_Cider(benchmark::State& state) {
  SeededStream rng(4);
  std::vector<std::vector<Tokens>> docs;
  for (int i = 0; i < 100; ++i) docs.push_back({random_tokens(rng, 20)});
  const CiderScorer scorer(docs);
  const auto c = random_tokens(rng, 20);
  for (auto _ : state) benchmark::DoNotOptimize(scorer.score(c, docs[7]));
}
BENCHMARK(BM_Cider);

static void BM_ExtractAndValidate(benchmark::State& state) {
  const auto w = busy_window(static_cast<int>(state.range(0)));
  const auto lex = Lexicon::defaults();
  const std::string text =
      "There are several vehicles in front. A pedestrian waits on the left. A cyclist follows.";
  for (auto _ : state) {
    const auto facts = extract_facts(w);
    benchmark::DoNotOptimize(validate_grounding(text, facts, lex));
  }
}
BENCHMARK(BM_ExtractAndValidate)->Arg(8)->Arg(64);

static void BM_HybridAttention(benchmark::State& state) {
  MemoryDims dims;
  dims.d = static_cast<int>(state.range(0));
  const auto params = ModelParams::init(dims);
  SeededStream rng(5);
  QueryState s;
  s.centers = random_matrix(dims.m, 3, rng);
  s.features = random_matrix(dims.m, dims.d, rng);
  s.pos_embed = random_matrix(dims.m, dims.d, rng);
  s.propagated = random_matrix(dims.k, dims.d, rng);
  for (auto _ : state) benchmark::DoNotOptimize(hybrid_attention(s, params));
}
BENCHMARK(BM_HybridAttention)->Arg(32)->Arg(128);

BENCHMARK_MAIN();
