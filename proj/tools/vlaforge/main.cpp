// vlaforge: scene ingestion, labeling, QA generation, MLLM captioning,
// evaluation and statistics.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "vlaforge/errors.hpp"
#include "vlaforge/pipeline.hpp"
#include "vlaforge/temporal_memory.hpp"

namespace fs = std::filesystem;
using vlaforge::PipelineConfig;

namespace {

struct GlobalOptions {
  std::string config = "configs/default.json";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::size_t jobs = 1;
  bool dry_run = false;
};

int report_error(const std::string& stage, std::string_view kind, const std::string& message,
                 int code) {
  nlohmann::json err = {{"error", std::string(kind)},
                        {"stage", stage},
                        {"message", message},
                        {"exit_code", code}};
  std::cerr << err.dump() << std::endl;
  return code;
}

PipelineConfig load_config(const GlobalOptions& g) {
  PipelineConfig cfg = PipelineConfig::load(g.config);
  if (g.seed) cfg.seed = *g.seed;
  if (g.out) cfg.out_dir = fs::absolute(*g.out);
  if (g.dry_run) cfg.dry_run = true;
  cfg.validate_files();
  return cfg;
}

void print(const nlohmann::json& j) { std::cout << j.dump(2) << std::endl; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vlaforge - grounded VLA annotation pipeline and evaluation"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("-c,--config", g.config, "pipeline config (JSON)")->capture_default_str();
  app.add_option("--seed", g.seed, "override the global seed");
  app.add_option("-o,--out", g.out, "override the output directory");
  app.add_option("-j,--jobs", g.jobs, "per-scene worker threads")->check(CLI::Range(1, 1024));
  app.add_flag("--dry-run", g.dry_run, "caption: write prompts only");

  auto* ingest = app.add_subcommand("ingest", "scene documents -> ego-centric database");
  auto* label = app.add_subcommand("label", "database -> action labels and plan ground truth");
  auto* generate = app.add_subcommand("generate", "database + labels -> template QA pairs");

  auto* caption = app.add_subcommand("caption", "template QA -> MLLM-finalized QA pairs");
  bool offline = false;
  caption->add_flag("--offline", offline, "replay the audit log instead of calling the endpoint");

  auto* eval_plan = app.add_subcommand("eval-plan", "L2 / CR / IR for trajectory predictions");
  std::string plan_pred;
  std::optional<std::string> plan_gt;
  std::optional<std::string> method;
  eval_plan->add_option("--pred", plan_pred, "predictions JSONL")->required();
  eval_plan->add_option("--gt", plan_gt, "ground truth JSONL (default <out>/plan_gt.jsonl)");
  eval_plan->add_option("--method", method, "row label in the report");

  auto* eval_vqa = app.add_subcommand("eval-vqa", "BLEU / ROUGE-L / CIDEr / METEOR for answers");
  std::string vqa_pred;
  std::optional<std::string> vqa_refs;
  eval_vqa->add_option("--pred", vqa_pred, "JSONL {id, answer}")->required();
  eval_vqa->add_option("--refs", vqa_refs, "reference QA JSONL (default <out>/qa.jsonl)");

  auto* stats = app.add_subcommand("stats", "dataset statistics under <out>/stats");
  auto* demo = app.add_subcommand("memory-demo", "two-frame temporal memory episode");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return report_error("cli", "usage", e.what(), 1);
  }

  const std::string stage = app.get_subcommands().front()->get_name();
  try {
    if (demo->parsed()) {
      const PipelineConfig cfg = PipelineConfig::load(g.config);
      print(vlaforge::memory_demo(cfg.memory));
      return 0;
    }
    PipelineConfig cfg = load_config(g);
    const std::size_t jobs = g.jobs;
    if (ingest->parsed()) {
      print(vlaforge::run_ingest(cfg, jobs));
    } else if (label->parsed()) {
      print(vlaforge::run_label(cfg, jobs));
    } else if (generate->parsed()) {
      print(vlaforge::run_generate(cfg, jobs));
    } else if (caption->parsed()) {
      vlaforge::CaptionOptions opts;
      opts.offline = offline;
      print(vlaforge::run_caption(cfg, opts));
    } else if (eval_plan->parsed()) {
      if (method) cfg.method = *method;
      std::string table;
      const auto s = vlaforge::run_eval_plan(
          cfg, plan_pred, plan_gt ? fs::path(*plan_gt) : cfg.out_dir / vlaforge::kPlanGtFile,
          &table);
      std::cout << table;
      print(s);
    } else if (eval_vqa->parsed()) {
      std::string table;
      const auto s = vlaforge::run_eval_vqa(
          cfg, vqa_pred, vqa_refs ? fs::path(*vqa_refs) : cfg.out_dir / vlaforge::kQaFile, &table);
      std::cout << table;
      print(s);
    } else if (stats->parsed()) {
      print(vlaforge::run_stats(cfg, jobs));
    }
  } catch (const vlaforge::Error& e) {
    return report_error(stage, e.kind_name(), e.what(), vlaforge::exit_code_for(e.kind()));
  } catch (const std::exception& e) {
    return report_error(stage, "internal", e.what(), 2);
  }
  return 0;
}
