#include "vlaforge/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "vlaforge/errors.hpp"
#include "vlaforge/lexicon.hpp"
#include "vlaforge/scene_store.hpp"
#include "vlaforge/text_metrics.hpp"
#include "vlaforge/util.hpp"

namespace vlaforge {

namespace fs = std::filesystem;

namespace {

constexpr double kPlanStep = 0.5;
constexpr int kPlanSteps = 6;

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

std::vector<nlohmann::json> read_jsonl(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingInputError("missing input '" + path.string() + "'");
  std::vector<nlohmann::json> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      out.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  if (ec) throw IOError("cannot create '" + path.parent_path().string() + "': " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IOError("cannot write '" + path.string() + "'");
  for (const auto& l : lines) out << l << '\n';
  if (!out) throw IOError("failed writing '" + path.string() + "'");
}

void write_text(const fs::path& path, const std::string& text) {
  write_lines(path, {text});
}

nlohmann::json label_to_json(const ActionLabel& l) {
  return {{"speed_state", std::string(to_string(l.speed_state))},
          {"longitudinal", std::string(to_string(l.longitudinal))},
          {"maneuver", std::string(to_string(l.maneuver))},
          {"command", std::string(to_string(l.command))}};
}

ActionLabel label_from_json(const nlohmann::json& j) {
  try {
    const auto s = parse_speed_state(j.at("speed_state").get<std::string>());
    const auto l = parse_longitudinal(j.at("longitudinal").get<std::string>());
    const auto m = parse_maneuver(j.at("maneuver").get<std::string>());
    const auto c = parse_command(j.at("command").get<std::string>());
    if (!s || !l || !m || !c) throw SchemaError("label: unknown enum value");
    return {*s, *l, *m, *c};
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed label: ") + e.what());
  }
}

using LabelTable = std::map<std::string, std::vector<ActionLabel>>;

LabelTable read_labels(const fs::path& path) {
  LabelTable out;
  for (const auto& j : read_jsonl(path)) {
    try {
      auto& v = out[j.at("scene_id").get<std::string>()];
      const auto idx = j.at("frame_index").get<std::size_t>();
      if (idx != v.size()) throw SchemaError("labels out of order in '" + path.string() + "'");
      v.push_back(label_from_json(j.at("label")));
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(path.string() + ": " + e.what());
    }
  }
  return out;
}

const std::vector<ActionLabel>& labels_for(const LabelTable& labels, const SceneRecord& scene) {
  const auto it = labels.find(scene.scene_id());
  if (it == labels.end() || it->second.size() != scene.size()) {
    throw MissingInputError("no complete labels for scene '" + scene.scene_id() +
                            "'; run the label stage first");
  }
  return it->second;
}

// (scene, window, category) -> template QA pair
using QaTable = std::map<std::string, QAPair>;

QaTable read_qa(const fs::path& path) {
  QaTable out;
  for (const auto& j : read_jsonl(path)) {
    QAPair qa = qa_from_json(j);
    out.emplace(qa_id(qa), std::move(qa));
  }
  return out;
}

std::vector<SceneRecord> load_database(const PipelineConfig& cfg) {
  const fs::path db = cfg.out_dir / kDatabaseFile;
  if (!fs::exists(db)) {
    throw MissingInputError("missing input '" + db.string() + "'; run the ingest stage first");
  }
  return read_database_file(db);
}

StageSummary summary(const std::string& stage, const std::vector<fs::path>& outputs,
                     nlohmann::json counts) {
  nlohmann::json digests = nlohmann::json::object();
  for (const auto& p : outputs) digests[p.filename().string()] = file_digest(p);
  return {{"stage", stage}, {"outputs", digests}, {"counts", std::move(counts)}};
}

Vec2 interpolate(const std::vector<Waypoint>& wps, double t) {
  for (std::size_t i = 1; i < wps.size(); ++i) {
    if (wps[i].t >= t - kGridTolerance) {
      const double span = wps[i].t - wps[i - 1].t;
      const double u = span > 0.0 ? std::clamp((t - wps[i - 1].t) / span, 0.0, 1.0) : 1.0;
      return wps[i - 1].position + u * (wps[i].position - wps[i - 1].position);
    }
  }
  return wps.back().position;
}

nlohmann::json vec2_json(const Vec2& v) { return nlohmann::json::array({v.x(), v.y()}); }

Vec2 vec2_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) throw SchemaError("expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

// ------------------------------------------------------------------ config

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  PipelineConfig c;
  try {
    c.seed = j.value("seed", c.seed);
    c.dry_run = j.value("dry_run", c.dry_run);

    const auto& paths = j.at("paths");
    c.scenes_dir = resolve(base_dir, paths.at("scenes").get<std::string>());
    c.out_dir = resolve(base_dir, paths.at("out").get<std::string>());

    const auto store = j.value("scene_store", nlohmann::json::object());
    c.window_len = store.value("window_len", c.window_len);
    c.stride = store.value("stride", c.stride);
    if (c.window_len == 0 || c.stride == 0) {
      throw ConfigError("[scene_store] window_len and stride must be positive");
    }

    if (!j.contains("labeler")) throw ConfigError("missing [labeler] block");
    c.labeler = LabelerThresholds::from_json(j.at("labeler"));

    const auto& tpl = j.at("templates");
    c.templates_file = resolve(base_dir, tpl.at("file").get<std::string>());
    c.priors_file = resolve(base_dir, tpl.at("priors").get<std::string>());
    if (tpl.contains("lexicon")) c.lexicon_file = resolve(base_dir, tpl.at("lexicon").get<std::string>());
    if (tpl.contains("categories")) {
      c.categories.clear();
      for (const auto& name : tpl.at("categories")) {
        const auto cat = parse_qa_category(name.get<std::string>());
        if (!cat) throw ConfigError("[templates] unknown category '" + name.get<std::string>() + "'");
        c.categories.push_back(*cat);
      }
    }
    c.facts = FactThresholds::from_json(tpl.value("facts", nlohmann::json::object()));

    const auto orch = j.value("orchestrator", nlohmann::json::object());
    c.endpoint = EndpointConfig::from_json(orch);
    c.rubric_file = resolve(base_dir, orch.at("rubric").get<std::string>());
    const auto policy = parse_reject_policy(orch.value("reject_policy", std::string("fallback")));
    if (!policy) throw ConfigError("[orchestrator] reject_policy must be drop or fallback");
    c.reject_policy = *policy;
    c.audit_log = orch.value("audit_log", c.audit_log.string());

    const auto metrics = j.value("metrics", nlohmann::json::object());
    c.method = metrics.value("method", c.method);
    c.ego.length = metrics.value("ego_length", c.ego.length);
    c.ego.width = metrics.value("ego_width", c.ego.width);
    if (!(c.ego.length > 0.0) || !(c.ego.width > 0.0)) {
      throw ConfigError("[metrics] ego dimensions must be positive");
    }

    const auto analysis = j.value("analysis", nlohmann::json::object());
    c.bin_width_m = analysis.value("bin_width_m", c.bin_width_m);
    c.max_distance_m = analysis.value("max_distance_m", c.max_distance_m);
    c.max_count_bin = analysis.value("max_count_bin", c.max_count_bin);
    if (analysis.contains("stopwords")) {
      c.stopwords_file = resolve(base_dir, analysis.at("stopwords").get<std::string>());
    }

    c.memory = MemoryDims::from_json(j.value("temporal_memory", nlohmann::json::object()));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingInputError("cannot open config '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("'" + path.string() + "': " + e.what());
  }
  return from_json(j, fs::absolute(path).parent_path());
}

void PipelineConfig::validate_files() const {
  std::vector<std::pair<std::string, fs::path>> files = {
      {"templates.file", templates_file},
      {"templates.priors", priors_file},
      {"orchestrator.rubric", rubric_file}};
  if (lexicon_file) files.emplace_back("templates.lexicon", *lexicon_file);
  if (stopwords_file) files.emplace_back("analysis.stopwords", *stopwords_file);
  for (const auto& [key, path] : files) {
    if (!fs::is_regular_file(path)) {
      throw ConfigError("config " + key + ": file '" + path.string() + "' does not exist");
    }
  }
}

fs::path PipelineConfig::audit_path() const {
  return audit_log.is_absolute() ? audit_log : out_dir / audit_log;
}

TemplateSet PipelineConfig::load_templates() const {
  TemplateSet set = TemplateSet::load(templates_file);
  set.set_priors(PriorLibrary::load(priors_file));
  if (lexicon_file) {
    std::ifstream in(*lexicon_file);
    if (!in) throw MissingInputError("cannot open lexicon '" + lexicon_file->string() + "'");
    try {
      set.set_lexicon(Lexicon::from_json(nlohmann::json::parse(in)));
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("'" + lexicon_file->string() + "': " + e.what());
    }
  }
  return set;
}

StatsOptions PipelineConfig::stats_options() const {
  StatsOptions o;
  o.bin_width_m = bin_width_m;
  o.max_distance_m = max_distance_m;
  o.max_count_bin = max_count_bin;
  if (stopwords_file) o.stopwords = StatsOptions::load_stopwords(*stopwords_file);
  return o;
}

// ------------------------------------------------------------- utilities

void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string file_digest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInputError("missing input '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return to_hex64(fnv1a64(buf.str()));
}

std::string qa_id(const QAPair& qa) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "/w%03zu/", qa.window_index);
  return qa.scene_id + buf + std::string(to_string(qa.category));
}

// ------------------------------------------------------------------ stages

StageSummary run_ingest(const PipelineConfig& cfg, std::size_t jobs) {
  if (!fs::is_directory(cfg.scenes_dir)) {
    throw MissingInputError("scenes directory '" + cfg.scenes_dir.string() + "' does not exist");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(cfg.scenes_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw MissingInputError("no *.json scenes in '" + cfg.scenes_dir.string() + "'");
  }

  std::vector<std::vector<std::string>> lines(files.size());
  std::vector<std::string> ids(files.size());
  parallel_for(files.size(), jobs, [&](std::size_t i) {
    try {
      const SceneRecord scene = ingest_scene_file(files[i]);
      ids[i] = scene.scene_id();
      lines[i] = database_lines(scene);
    } catch (const Error& e) {
      throw SchemaError(files[i].filename().string() + ": " + e.what());
    }
  });
  for (std::size_t i = 1; i < ids.size(); ++i) {
    for (std::size_t k = 0; k < i; ++k) {
      if (ids[k] == ids[i]) throw SchemaError("duplicate scene_id '" + ids[i] + "'");
    }
  }

  std::vector<std::string> all;
  for (auto& l : lines) all.insert(all.end(), l.begin(), l.end());
  const fs::path out = cfg.out_dir / kDatabaseFile;
  write_lines(out, all);
  return summary("ingest", {out}, {{"scenes", files.size()}, {"frames", all.size()}});
}

std::optional<PlanGroundTruth> plan_ground_truth(const SceneRecord& scene, std::size_t index) {
  const auto& frames = scene.frames();
  const double horizon = kPlanStep * kPlanSteps;
  const FutureTrajectory future = future_trajectory(scene, index, horizon);
  if (future.extrapolated || future.trajectory.horizon() < horizon - kGridTolerance) {
    return std::nullopt;
  }

  PlanGroundTruth gt;
  const FrameRecord& now = frames[index];
  gt.plan.sample_id = scene.scene_id() + "/" + now.frame_id;
  for (int k = 1; k <= kPlanSteps; ++k) {
    const double t = kPlanStep * k;
    gt.plan.waypoints.push_back({t, interpolate(future.trajectory.waypoints(), t)});
  }

  const RigidTransform to_now = now.ego.pose();
  for (std::size_t j = index + 1; j < frames.size(); ++j) {
    const double t = static_cast<double>(frames[j].timestamp_us() - now.timestamp_us()) * 1e-6;
    if (t > horizon + kFrameMatchTolerance) break;
    const RigidTransform rel = to_now * frames[j].ego.world_pose;
    const double dyaw = rel.yaw();
    TimedBoxes tb;
    tb.t = t;
    for (const auto& o : frames[j].objects) {
      OrientedBox2D box;
      box.center = rel.apply(o.center).head<2>();
      box.half_extents = Vec2(o.size.x() / 2.0, o.size.y() / 2.0);
      box.yaw = wrap_angle(o.yaw + dyaw);
      tb.boxes.push_back(box);
    }
    gt.frames.push_back(std::move(tb));
  }
  gt.drivable = now.lanes.drivable_polygons;
  return gt;
}

PlanGroundTruth PlanGroundTruth::from_json(const nlohmann::json& j) {
  PlanGroundTruth gt;
  try {
    gt.plan = PlanPrediction::from_json(j);
    for (const auto& f : j.at("frames")) {
      TimedBoxes tb;
      tb.t = f.at("t").get<double>();
      for (const auto& b : f.at("boxes")) {
        OrientedBox2D box;
        box.center = vec2_from(b.at("center"));
        box.half_extents = vec2_from(b.at("half_extents"));
        box.yaw = b.at("yaw").get<double>();
        tb.boxes.push_back(box);
      }
      gt.frames.push_back(std::move(tb));
    }
    for (const auto& poly : j.at("drivable")) {
      Polygon2D p;
      for (const auto& v : poly) p.push_back(vec2_from(v));
      gt.drivable.push_back(std::move(p));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed plan ground truth: ") + e.what());
  }
  return gt;
}

nlohmann::json PlanGroundTruth::to_json() const {
  nlohmann::json j = plan.to_json();
  nlohmann::json fr = nlohmann::json::array();
  for (const auto& f : frames) {
    nlohmann::json boxes = nlohmann::json::array();
    for (const auto& b : f.boxes) {
      boxes.push_back({{"center", vec2_json(b.center)},
                       {"half_extents", vec2_json(b.half_extents)},
                       {"yaw", b.yaw}});
    }
    fr.push_back({{"t", f.t}, {"boxes", boxes}});
  }
  nlohmann::json polys = nlohmann::json::array();
  for (const auto& p : drivable) {
    nlohmann::json ring = nlohmann::json::array();
    for (const auto& v : p) ring.push_back(vec2_json(v));
    polys.push_back(ring);
  }
  j["frames"] = fr;
  j["drivable"] = polys;
  return j;
}

StageSummary run_label(const PipelineConfig& cfg, std::size_t jobs) {
  const auto scenes = load_database(cfg);
  std::vector<std::vector<std::string>> label_lines(scenes.size());
  std::vector<std::vector<std::string>> gt_lines(scenes.size());
  std::vector<std::size_t> extrapolated(scenes.size(), 0);

  parallel_for(scenes.size(), jobs, [&](std::size_t s) {
    const SceneRecord& scene = scenes[s];
    for (std::size_t i = 0; i < scene.size(); ++i) {
      const FrameRecord& f = scene.frames()[i];
      const FutureTrajectory future = future_trajectory(scene, i);
      const ActionLabel label = label_action(f.ego.speed, future.trajectory, f.lanes, cfg.labeler);
      if (future.extrapolated) ++extrapolated[s];
      label_lines[s].push_back(nlohmann::json{{"scene_id", scene.scene_id()},
                                              {"frame_index", i},
                                              {"frame_id", f.frame_id},
                                              {"label", label_to_json(label)},
                                              {"extrapolated", future.extrapolated}}
                                   .dump());
      if (auto gt = plan_ground_truth(scene, i)) gt_lines[s].push_back(gt->to_json().dump());
    }
  });

  std::vector<std::string> labels;
  std::vector<std::string> gts;
  std::size_t extra = 0;
  for (std::size_t s = 0; s < scenes.size(); ++s) {
    labels.insert(labels.end(), label_lines[s].begin(), label_lines[s].end());
    gts.insert(gts.end(), gt_lines[s].begin(), gt_lines[s].end());
    extra += extrapolated[s];
  }
  const fs::path lp = cfg.out_dir / kLabelsFile;
  const fs::path gp = cfg.out_dir / kPlanGtFile;
  write_lines(lp, labels);
  write_lines(gp, gts);
  return summary("label", {lp, gp},
                 {{"frames", labels.size()}, {"extrapolated", extra}, {"plan_samples", gts.size()}});
}

StageSummary run_generate(const PipelineConfig& cfg, std::size_t jobs) {
  const auto scenes = load_database(cfg);
  const LabelTable labels = read_labels(cfg.out_dir / kLabelsFile);
  const TemplateSet templates = cfg.load_templates();

  std::vector<std::vector<std::string>> lines(scenes.size());
  std::vector<std::size_t> windows(scenes.size(), 0);
  parallel_for(scenes.size(), jobs, [&](std::size_t s) {
    const SceneRecord& scene = scenes[s];
    const auto& scene_labels = labels_for(labels, scene);
    for (const auto& w : partition_windows(scene, cfg.window_len, cfg.stride)) {
      const ActionLabel& label = scene_labels[w.start_index + w.frames.size() - 1];
      for (const auto& qa : generate_qa(w, label, templates, derive_seed(cfg.seed, w.key()),
                                        cfg.categories, cfg.facts)) {
        nlohmann::json j = qa_to_json(qa);
        j["id"] = qa_id(qa);
        lines[s].push_back(j.dump());
      }
      ++windows[s];
    }
  });

  std::vector<std::string> all;
  std::size_t nwin = 0;
  for (std::size_t s = 0; s < scenes.size(); ++s) {
    all.insert(all.end(), lines[s].begin(), lines[s].end());
    nwin += windows[s];
  }
  const fs::path out = cfg.out_dir / kQaFile;
  write_lines(out, all);
  return summary("generate", {out}, {{"windows", nwin}, {"qa_pairs", all.size()}});
}

StageSummary run_caption(const PipelineConfig& cfg, const CaptionOptions& options) {
  const auto scenes = load_database(cfg);
  const LabelTable labels = read_labels(cfg.out_dir / kLabelsFile);
  const QaTable qa = read_qa(cfg.out_dir / kQaFile);
  const TemplateSet templates = cfg.load_templates();
  const PromptSettings settings = PromptSettings::load(cfg.rubric_file);

  struct Task {
    SceneWindow window;
    std::vector<GroundedFact> facts;
    std::vector<GroundedCaption> captions;
    const QAPair* template_qa;
  };
  std::vector<Task> tasks;
  for (const auto& scene : scenes) {
    const auto& scene_labels = labels_for(labels, scene);
    for (auto& w : partition_windows(scene, cfg.window_len, cfg.stride)) {
      const ActionLabel& label = scene_labels[w.start_index + w.frames.size() - 1];
      auto facts = extract_facts(w, cfg.facts);
      for (auto& f : action_facts(label, w.last_frame().frame_id)) facts.push_back(std::move(f));
      std::vector<GroundedCaption> captions;
      std::vector<const QAPair*> pairs;
      for (QACategory c : cfg.categories) {
        QAPair probe;
        probe.scene_id = w.scene_id;
        probe.window_index = w.window_index;
        probe.category = c;
        const auto it = qa.find(qa_id(probe));
        if (it == qa.end()) {
          throw MissingInputError("no template QA for '" + qa_id(probe) +
                                  "'; run the generate stage first");
        }
        captions.push_back(it->second.answer);
        pairs.push_back(&it->second);
      }
      for (const QAPair* p : pairs) tasks.push_back({w, facts, captions, p});
    }
  }

  std::vector<PromptBundle> bundles(tasks.size());
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    bundles[i] = build_prompt(tasks[i].window, tasks[i].facts, tasks[i].captions,
                              templates.priors(), tasks[i].template_qa->category, settings);
  }

  if (cfg.dry_run) {
    std::vector<std::string> lines;
    for (const auto& b : bundles) lines.push_back(b.to_json().dump());
    const fs::path out = cfg.out_dir / kPromptsFile;
    write_lines(out, lines);
    return summary("caption", {out}, {{"prompts", lines.size()}, {"dry_run", true}});
  }

  std::unique_ptr<HttpTransport> http;
  std::unique_ptr<AuditLog> audit;
  Transport* transport = options.transport;
  if (!options.offline) {
    if (!transport) {
      http = std::make_unique<HttpTransport>(cfg.endpoint.base_url, cfg.endpoint.timeout_s);
      transport = http.get();
    }
    audit = std::make_unique<AuditLog>(cfg.audit_path());
  }

  std::vector<std::optional<std::string>> lines(tasks.size());
  std::vector<int> verdicts(tasks.size(), 0);
  std::vector<Provenance> provenance(tasks.size(), Provenance::kTemplate);
  parallel_for(tasks.size(), cfg.endpoint.max_inflight, [&](std::size_t i) {
    const Task& t = tasks[i];
    const RawCompletion raw =
        options.offline ? replay_completion(bundles[i], cfg.endpoint, cfg.audit_path())
                        : request_completion(bundles[i], cfg.endpoint, *transport, audit.get(),
                                             options.sleeper);
    const ValidationReport report = validate_grounding(raw.text, t.facts, templates.lexicon());
    const FinalAnnotation fin = repair_or_finalize(raw.text, report, t.facts, templates.lexicon(),
                                                   t.template_qa->answer, cfg.reject_policy);
    verdicts[i] = static_cast<int>(fin.verdict);
    if (fin.dropped()) return;
    QAPair out = *t.template_qa;
    out.answer = *fin.caption;
    out.validation = fin.validation;
    provenance[i] = fin.validation;
    nlohmann::json j = qa_to_json(out);
    j["id"] = qa_id(out);
    j["verdict"] = std::string(to_string(fin.verdict));
    lines[i] = j.dump();
  });

  std::vector<std::string> kept;
  std::size_t counts[3] = {0, 0, 0};
  std::size_t prov[3] = {0, 0, 0};
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    ++counts[verdicts[i]];
    if (lines[i]) {
      kept.push_back(*lines[i]);
      ++prov[static_cast<int>(provenance[i])];
    }
  }
  const fs::path out = cfg.out_dir / kCaptionsFile;
  write_lines(out, kept);
  std::vector<fs::path> outputs{out};
  return summary("caption", outputs,
                 {{"requests", tasks.size()},
                  {"kept", kept.size()},
                  {"dropped", tasks.size() - kept.size()},
                  {"pass", counts[0]},
                  {"repairable", counts[1]},
                  {"reject", counts[2]},
                  {"template", prov[0]},
                  {"mllm_validated", prov[1]},
                  {"mllm_repaired", prov[2]},
                  {"offline", options.offline}});
}

std::vector<PlanGroundTruth> read_plan_gt(const fs::path& path) {
  std::vector<PlanGroundTruth> out;
  for (const auto& j : read_jsonl(path)) out.push_back(PlanGroundTruth::from_json(j));
  return out;
}

std::vector<PlanPrediction> read_predictions(const fs::path& path) {
  std::vector<PlanPrediction> out;
  for (const auto& j : read_jsonl(path)) out.push_back(PlanPrediction::from_json(j));
  return out;
}

MetricReport evaluate_plan(const std::vector<PlanPrediction>& preds,
                           const std::vector<PlanGroundTruth>& gts, const std::string& method,
                           const EgoDims& ego) {
  std::map<std::string, const PlanGroundTruth*> by_id;
  for (const auto& g : gts) by_id[g.plan.sample_id] = &g;

  std::vector<PlanPrediction> gt_plans;
  std::vector<std::vector<TimedBoxes>> frames;
  std::vector<std::vector<Polygon2D>> drivable;
  for (const auto& p : preds) {
    const auto it = by_id.find(p.sample_id);
    if (it == by_id.end()) throw SchemaError("prediction for unknown sample '" + p.sample_id + "'");
    gt_plans.push_back(it->second->plan);
    frames.push_back(it->second->frames);
    drivable.push_back(it->second->drivable);
  }

  MetricReport report;
  report.plan = PlanRow{method, l2_batch(preds, gt_plans), collision_rate(preds, frames, ego),
                        intersection_rate(preds, drivable)};
  report.plan_samples = preds.size();
  return report;
}

StageSummary run_eval_plan(const PipelineConfig& cfg, const fs::path& predictions,
                           const fs::path& ground_truth, std::string* table) {
  const MetricReport report =
      evaluate_plan(read_predictions(predictions), read_plan_gt(ground_truth), cfg.method, cfg.ego);
  const fs::path json = cfg.out_dir / "report.json";
  const fs::path csv = cfg.out_dir / "report.csv";
  write_text(json, report.to_json().dump(2));
  std::ofstream(csv, std::ios::binary | std::ios::trunc) << report.to_csv();
  if (table) *table = report.to_table();
  StageSummary s = summary("eval-plan", {json, csv}, {{"samples", report.plan_samples}});
  s["report"] = report.to_json();
  return s;
}

MetricReport evaluate_vqa(const fs::path& predictions, const fs::path& references) {
  std::map<std::string, std::vector<std::string>> refs;
  for (const auto& j : read_jsonl(references)) {
    const QAPair qa = qa_from_json(j);
    refs[qa_id(qa)].push_back(qa.answer.text);
  }
  std::vector<TextSample> samples;
  for (const auto& j : read_jsonl(predictions)) {
    TextSample s;
    try {
      s.id = j.at("id").get<std::string>();
      s.candidate = j.at("answer").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(std::string("malformed vqa prediction: ") + e.what());
    }
    const auto it = refs.find(s.id);
    if (it == refs.end()) throw SchemaError("prediction for unknown qa id '" + s.id + "'");
    s.references = it->second;
    samples.push_back(std::move(s));
  }
  if (samples.empty()) throw EmptyBatchError("no vqa predictions in '" + predictions.string() + "'");
  MetricReport report;
  report.nlg = text_scores(samples);
  report.nlg_samples = samples.size();
  return report;
}

StageSummary run_eval_vqa(const PipelineConfig& cfg, const fs::path& predictions,
                          const fs::path& references, std::string* table) {
  const MetricReport report = evaluate_vqa(predictions, references);
  const fs::path json = cfg.out_dir / "vqa_report.json";
  const fs::path csv = cfg.out_dir / "vqa_report.csv";
  write_text(json, report.to_json().dump(2));
  std::ofstream(csv, std::ios::binary | std::ios::trunc) << report.to_csv();
  if (table) *table = report.to_table();
  StageSummary s = summary("eval-vqa", {json, csv}, {{"samples", report.nlg_samples}});
  s["report"] = report.to_json();
  return s;
}

StageSummary run_stats(const PipelineConfig& cfg, std::size_t jobs) {
  const auto scenes = load_database(cfg);
  const LabelTable labels = read_labels(cfg.out_dir / kLabelsFile);
  const QaTable qa = read_qa(cfg.out_dir / kQaFile);
  const StatsOptions options = cfg.stats_options();

  std::vector<StatsAccumulator> parts(scenes.size(), StatsAccumulator(options));
  parallel_for(scenes.size(), jobs, [&](std::size_t s) {
    const SceneRecord& scene = scenes[s];
    const auto& scene_labels = labels_for(labels, scene);
    std::vector<std::string> reasoning(scene.size());
    for (const auto& w : partition_windows(scene, cfg.window_len, cfg.stride)) {
      QAPair probe;
      probe.scene_id = w.scene_id;
      probe.window_index = w.window_index;
      probe.category = QACategory::kReasoning;
      if (const auto it = qa.find(qa_id(probe)); it != qa.end()) {
        reasoning[w.start_index + w.frames.size() - 1] = it->second.answer.text;
      }
    }
    for (std::size_t i = 0; i < scene.size(); ++i) {
      parts[s].add(scene.frames()[i], scene_labels[i], reasoning[i]);
    }
  });
  StatsAccumulator total(options);
  for (const auto& p : parts) total.merge(p);
  const StatsBundle bundle = total.finish();

  const fs::path dir = cfg.out_dir / "stats";
  export_stats(bundle, dir);
  std::vector<fs::path> outputs;
  for (const auto& entry : fs::directory_iterator(dir)) outputs.push_back(entry.path());
  std::sort(outputs.begin(), outputs.end());
  return summary("stats", outputs, {{"frames", bundle.frames}, {"words", bundle.word_freq.size()}});
}

}  // namespace vlaforge
