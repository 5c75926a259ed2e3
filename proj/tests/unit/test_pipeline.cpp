#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "vlaforge/errors.hpp"
#include "vlaforge/pipeline.hpp"
#include "vlaforge/scene_store.hpp"

using namespace vlaforge;
namespace fs = std::filesystem;

namespace {

const fs::path kConfig = fs::path(VLAFORGE_SOURCE_DIR) / "configs" / "default.json";

PipelineConfig config_in(const std::string& name) {
  PipelineConfig cfg = PipelineConfig::load(kConfig);
  cfg.out_dir = fs::temp_directory_path() / "vlaforge_pipeline_test" / name;
  fs::remove_all(cfg.out_dir);
  cfg.validate_files();
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) n += !line.empty();
  return n;
}

// Answers every request with a short text; windows without a cyclist get a
// removable phantom sentence.
class FakeModel : public Transport {
 public:
  HttpResponse post(const HttpRequest& request) override {
    ++calls;
    const bool has_cyclist = request.body.find("count/cyclist") != std::string::npos;
    return chat_response(has_cyclist ? "A cyclist is ahead." : "The road is open. A cyclist waits.");
  }
  int calls = 0;
};

}  // namespace

TEST(PipelineConfig, LoadResolvesRelativePaths) {
  const auto cfg = PipelineConfig::load(kConfig);
  EXPECT_TRUE(cfg.scenes_dir.is_absolute());
  EXPECT_TRUE(fs::is_directory(cfg.scenes_dir));
  EXPECT_EQ(cfg.window_len, 5u);
  EXPECT_EQ(cfg.stride, 2u);
  EXPECT_EQ(cfg.categories.size(), 5u);
  EXPECT_EQ(cfg.audit_path(), cfg.out_dir / "audit.jsonl");
  EXPECT_NO_THROW(cfg.validate_files());
  EXPECT_THROW(PipelineConfig::load("/nonexistent/config.json"), MissingInputError);

  nlohmann::json j;
  {
    std::ifstream in(kConfig);
    j = nlohmann::json::parse(in);
  }
  auto bad = j;
  bad["orchestrator"]["reject_policy"] = "ignore";
  EXPECT_THROW(PipelineConfig::from_json(bad, kConfig.parent_path()), ConfigError);
  bad = j;
  bad["templates"]["file"] = "missing.json";
  EXPECT_THROW(PipelineConfig::from_json(bad, kConfig.parent_path()).validate_files(),
               ConfigError);
  bad = j;
  bad["orchestrator"]["token"] = "inline";
  EXPECT_THROW(PipelineConfig::from_json(bad, kConfig.parent_path()), ConfigError);
}

TEST(ParallelFor, CoversAllAndRethrowsLowestIndex) {
  std::vector<int> hits(50, 0);
  parallel_for(50, 4, [&](std::size_t i) { ++hits[i]; });
  for (int h : hits) EXPECT_EQ(h, 1);
  try {
    parallel_for(20, 4, [](std::size_t i) {
      if (i == 7 || i == 13) throw RangeError("bad " + std::to_string(i));
    });
    FAIL();
  } catch (const RangeError& e) {
    EXPECT_NE(std::string(e.what()).find("bad 7"), std::string::npos);
  }
}

TEST(Pipeline, StagesAreDeterministicAcrossJobs) {
  const auto a = config_in("serial");
  const auto b = config_in("parallel");
  for (const auto* cfg : {&a, &b}) {
    const std::size_t jobs = cfg == &a ? 1 : 3;
    run_ingest(*cfg, jobs);
    run_label(*cfg, jobs);
    run_generate(*cfg, jobs);
  }
  for (const char* f : {kDatabaseFile, kLabelsFile, kPlanGtFile, kQaFile}) {
    EXPECT_EQ(slurp(a.out_dir / f), slurp(b.out_dir / f)) << f;
    EXPECT_FALSE(slurp(a.out_dir / f).empty()) << f;
  }
  EXPECT_EQ(line_count(a.out_dir / kDatabaseFile), 60u);
  EXPECT_EQ(line_count(a.out_dir / kLabelsFile), 60u);
  EXPECT_EQ(line_count(a.out_dir / kQaFile), 27u * 5u);

  // a different seed changes template picks but not labels
  auto c = config_in("reseeded");
  c.seed = 1234;
  run_ingest(c, 2);
  run_label(c, 2);
  run_generate(c, 2);
  EXPECT_EQ(slurp(a.out_dir / kLabelsFile), slurp(c.out_dir / kLabelsFile));
  EXPECT_NE(slurp(a.out_dir / kQaFile), slurp(c.out_dir / kQaFile));
}

TEST(Pipeline, MissingUpstreamArtifacts) {
  const auto cfg = config_in("empty");
  EXPECT_THROW(run_label(cfg, 1), MissingInputError);
  EXPECT_THROW(run_generate(cfg, 1), MissingInputError);
  auto bad = cfg;
  bad.scenes_dir = "/nonexistent/scenes";
  EXPECT_THROW(run_ingest(bad, 1), MissingInputError);
}

TEST(Pipeline, PlanGroundTruthAndSelfEvaluation) {
  const auto cfg = config_in("eval");
  run_ingest(cfg, 2);
  const auto s = run_label(cfg, 2);
  const auto gts = read_plan_gt(cfg.out_dir / kPlanGtFile);
  ASSERT_FALSE(gts.empty());
  EXPECT_EQ(s["counts"]["plan_samples"].get<std::size_t>(), gts.size());
  for (const auto& g : gts) {
    ASSERT_EQ(g.plan.waypoints.size(), 6u);
    EXPECT_NEAR(g.plan.waypoints.back().t, 3.0, 1e-9);
    EXPECT_FALSE(g.drivable.empty());
  }

  // ground truth as prediction: zero error and no collisions
  std::vector<PlanPrediction> preds;
  for (const auto& g : gts) preds.push_back(g.plan);
  const auto report = evaluate_plan(preds, gts, "oracle", cfg.ego);
  EXPECT_EQ(report.plan->l2.avg(), 0.0);
  EXPECT_EQ(report.plan->cr.avg(), 0.0);
  EXPECT_EQ(report.plan->ir.avg(), 0.0);

  auto stray = preds;
  stray[0].sample_id = "no-such-sample";
  EXPECT_THROW(evaluate_plan(stray, gts, "x", cfg.ego), SchemaError);

  // hand check of one waypoint against the recorded poses
  const auto scenes = read_database_file(cfg.out_dir / kDatabaseFile);
  const auto gt0 = plan_ground_truth(scenes[1], 0);
  ASSERT_TRUE(gt0.has_value());
  const auto& f0 = scenes[1].frames()[0];
  const auto& f2 = scenes[1].frames()[2];
  const Vec3 rel = f0.ego.pose().apply(f2.ego.world_position());
  EXPECT_NEAR(gt0->plan.waypoints[1].position.x(), rel.x(), 1e-9);
  EXPECT_NEAR(gt0->plan.waypoints[1].position.y(), rel.y(), 1e-9);
  EXPECT_FALSE(plan_ground_truth(scenes[1], scenes[1].size() - 1).has_value());
}

TEST(Pipeline, CaptionOnlineThenOfflineReplay) {
  auto cfg = config_in("caption");
  cfg.endpoint.max_inflight = 3;
  run_ingest(cfg, 2);
  run_label(cfg, 2);
  run_generate(cfg, 2);

  auto dry = cfg;
  dry.dry_run = true;
  const auto d = run_caption(dry, {});
  EXPECT_EQ(line_count(cfg.out_dir / kPromptsFile), 135u);
  EXPECT_FALSE(fs::exists(cfg.out_dir / kCaptionsFile));
  (void)d;

  FakeModel model;
  CaptionOptions online;
  online.transport = &model;
  online.sleeper = [](double) {};
  const auto first = run_caption(cfg, online);
  EXPECT_EQ(model.calls, 135);
  const std::string captions = slurp(cfg.out_dir / kCaptionsFile);
  EXPECT_EQ(line_count(cfg.out_dir / kCaptionsFile), 135u);
  const auto& counts = first["counts"];
  EXPECT_EQ(counts["mllm_repaired"].get<int>() + counts["mllm_validated"].get<int>() +
                counts["template"].get<int>() + counts["dropped"].get<int>(),
            135);
  EXPECT_GT(counts["mllm_repaired"].get<int>(), 0);

  CaptionOptions offline;
  offline.offline = true;
  run_caption(cfg, offline);
  EXPECT_EQ(slurp(cfg.out_dir / kCaptionsFile), captions);

  auto no_log = cfg;
  no_log.audit_log = cfg.out_dir / "absent.jsonl";
  EXPECT_THROW(run_caption(no_log, offline), MissingInputError);
}

TEST(Pipeline, StatsConserveFrames) {
  const auto cfg = config_in("stats");
  run_ingest(cfg, 1);
  run_label(cfg, 1);
  run_generate(cfg, 1);
  run_stats(cfg, 2);
  std::ifstream in(cfg.out_dir / "stats" / "stats.json");
  const auto j = nlohmann::json::parse(in);
  EXPECT_EQ(j["frames"], 60);
  std::size_t lanes = 0;
  for (const auto& [k, v] : j["lanes"]["total"].items()) lanes += v.get<std::size_t>();
  EXPECT_EQ(lanes, 60u);
  EXPECT_FALSE(j["word_freq"].empty());
}

TEST(Pipeline, VqaEvaluationAgainstReferences) {
  const auto cfg = config_in("vqa");
  run_ingest(cfg, 1);
  run_label(cfg, 1);
  run_generate(cfg, 1);
  // references answered by themselves
  const fs::path pred = cfg.out_dir / "self.jsonl";
  {
    std::ifstream in(cfg.out_dir / kQaFile);
    std::ofstream out(pred);
    for (std::string line; std::getline(in, line);) {
      const auto j = nlohmann::json::parse(line);
      out << nlohmann::json{{"id", j["id"]}, {"answer", j["answer"]["text"]}}.dump() << "\n";
    }
  }
  const auto r = evaluate_vqa(pred, cfg.out_dir / kQaFile);
  EXPECT_EQ(r.nlg_samples, 135u);
  EXPECT_NEAR(r.nlg.at("bleu1"), 1.0, 1e-9);
  EXPECT_NEAR(r.nlg.at("rouge_l"), 1.0, 1e-12);
}
