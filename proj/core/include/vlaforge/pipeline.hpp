#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vlaforge/action_labeler.hpp"
#include "vlaforge/analysis.hpp"
#include "vlaforge/facts.hpp"
#include "vlaforge/orchestrator.hpp"
#include "vlaforge/plan_metrics.hpp"
#include "vlaforge/report.hpp"
#include "vlaforge/scene.hpp"
#include "vlaforge/template_engine.hpp"
#include "vlaforge/temporal_memory.hpp"

namespace vlaforge {

// Relative paths in the config file resolve against the file's directory;
// the audit log resolves against the output directory.
struct PipelineConfig {
  std::uint64_t seed = 42;
  bool dry_run = false;
  std::filesystem::path scenes_dir;
  std::filesystem::path out_dir;

  std::size_t window_len = 5;
  std::size_t stride = 2;
  LabelerThresholds labeler;

  std::filesystem::path templates_file;
  std::filesystem::path priors_file;
  std::optional<std::filesystem::path> lexicon_file;
  std::vector<QACategory> categories{std::begin(kAllQACategories), std::end(kAllQACategories)};
  FactThresholds facts;

  EndpointConfig endpoint;
  std::filesystem::path rubric_file;
  RejectPolicy reject_policy = RejectPolicy::kFallback;
  std::filesystem::path audit_log = "audit.jsonl";

  std::string method = "prediction";
  EgoDims ego;

  double bin_width_m = 5.0;
  double max_distance_m = 50.0;
  int max_count_bin = 10;
  std::optional<std::filesystem::path> stopwords_file;

  MemoryDims memory;

  static PipelineConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
  // Throws MissingInputError when the file is absent, ConfigError otherwise.
  static PipelineConfig load(const std::filesystem::path& path);

  // Every referenced input file must exist. Throws ConfigError.
  void validate_files() const;

  std::filesystem::path audit_path() const;
  TemplateSet load_templates() const;
  StatsOptions stats_options() const;
};

// Runs fn(0..n-1) on up to `jobs` threads. The first exception (lowest
// index) is rethrown after all workers finish.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn);

// Every stage returns a summary: {"stage", "outputs": {file: fnv digest},
// "counts": {...}}.
using StageSummary = nlohmann::json;

// Artifact names inside the output directory.
inline constexpr const char* kDatabaseFile = "database.jsonl";
inline constexpr const char* kLabelsFile = "labels.jsonl";
inline constexpr const char* kPlanGtFile = "plan_gt.jsonl";
inline constexpr const char* kQaFile = "qa.jsonl";
inline constexpr const char* kPromptsFile = "prompts.jsonl";
inline constexpr const char* kCaptionsFile = "captions.jsonl";

std::string file_digest(const std::filesystem::path& path);

// scenes dir (*.json, sorted by name) -> database.jsonl
StageSummary run_ingest(const PipelineConfig& cfg, std::size_t jobs);

// database.jsonl -> labels.jsonl, plan_gt.jsonl
StageSummary run_label(const PipelineConfig& cfg, std::size_t jobs);

// database.jsonl + labels.jsonl -> qa.jsonl (template provenance)
StageSummary run_generate(const PipelineConfig& cfg, std::size_t jobs);

struct CaptionOptions {
  bool offline = false;                 // replay the audit log
  Transport* transport = nullptr;       // online; defaults to HttpTransport
  Sleeper sleeper = real_sleeper();
};

// database + labels + qa -> prompts.jsonl (dry run) or captions.jsonl.
StageSummary run_caption(const PipelineConfig& cfg, const CaptionOptions& options);

// Ground-truth plan sample: waypoints, future object boxes and drivable
// area, all in the ego frame at t0.
struct PlanGroundTruth {
  PlanPrediction plan;
  std::vector<TimedBoxes> frames;
  std::vector<Polygon2D> drivable;

  static PlanGroundTruth from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// Ground truth for frame `index`, or nullopt when the recorded future does
// not cover the full 3 s grid.
std::optional<PlanGroundTruth> plan_ground_truth(const SceneRecord& scene, std::size_t index);

std::vector<PlanGroundTruth> read_plan_gt(const std::filesystem::path& path);
std::vector<PlanPrediction> read_predictions(const std::filesystem::path& path);

// Predictions are matched to ground truth by sample_id. Throws SchemaError
// for unknown ids. Writes report.json and report.csv under out_dir.
MetricReport evaluate_plan(const std::vector<PlanPrediction>& preds,
                           const std::vector<PlanGroundTruth>& gts, const std::string& method,
                           const EgoDims& ego);
StageSummary run_eval_plan(const PipelineConfig& cfg, const std::filesystem::path& predictions,
                           const std::filesystem::path& ground_truth, std::string* table = nullptr);

// Predictions: JSONL {id, answer}; references: QA JSONL whose id is
// "<scene>/wNNN/<category>" (all answers sharing an id are references).
MetricReport evaluate_vqa(const std::filesystem::path& predictions,
                          const std::filesystem::path& references);
StageSummary run_eval_vqa(const PipelineConfig& cfg, const std::filesystem::path& predictions,
                          const std::filesystem::path& references, std::string* table = nullptr);

// database + labels + qa -> stats/ (see export_stats).
StageSummary run_stats(const PipelineConfig& cfg, std::size_t jobs);

std::string qa_id(const QAPair& qa);

}  // namespace vlaforge
