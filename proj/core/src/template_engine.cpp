#include "vlaforge/template_engine.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "vlaforge/errors.hpp"
#include "vlaforge/util.hpp"

namespace vlaforge {

namespace {

constexpr ObjectCategory kStaticCategories[] = {ObjectCategory::kTrafficLight,
                                                ObjectCategory::kTrafficSign,
                                                ObjectCategory::kOther};
constexpr ObjectCategory kDynamicCategories[] = {ObjectCategory::kVehicle,
                                                 ObjectCategory::kPedestrian,
                                                 ObjectCategory::kCyclist};

struct SlotFill {
  std::string text;
  std::vector<std::string> facts;
};

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingInputError("cannot open '" + path.string() + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("'" + path.string() + "': " + e.what());
  }
}

std::vector<std::string> pattern_slots(const std::string& pattern) {
  std::vector<std::string> slots;
  std::size_t pos = 0;
  while ((pos = pattern.find('{', pos)) != std::string::npos) {
    const std::size_t end = pattern.find('}', pos);
    if (end == std::string::npos) throw ConfigError("unterminated slot in '" + pattern + "'");
    slots.push_back(pattern.substr(pos + 1, end - pos - 1));
    pos = end + 1;
  }
  return slots;
}

std::string number_phrase(const Lexicon& lex, std::int64_t n, const std::string& singular,
                          const std::string& plural) {
  if (n == 0) return "no " + plural;
  return lex.count_word(n) + " " + (n == 1 ? singular : plural);
}

// "same=2;opposite=1;cross=1" -> {2, 1, 1}
std::map<std::string, std::int64_t> parse_lane_value(const std::string& value) {
  std::map<std::string, std::int64_t> out;
  std::size_t start = 0;
  while (start < value.size()) {
    std::size_t end = value.find(';', start);
    if (end == std::string::npos) end = value.size();
    const std::string part = value.substr(start, end - start);
    const std::size_t eq = part.find('=');
    if (eq != std::string::npos) out[part.substr(0, eq)] = std::stoll(part.substr(eq + 1));
    start = end + 1;
  }
  return out;
}

std::string road_phrase(const std::string& road) {
  if (road == "highway") return "a highway";
  if (road == "intersection") return "an intersection";
  return "a " + road + " road";
}

std::string speed_state_phrase(SpeedState s) {
  switch (s) {
    case SpeedState::kCrawling: return "crawling";
    case SpeedState::kModerateSpeed: return "moving at a moderate speed";
    case SpeedState::kMovingFast: return "moving fast";
  }
  return "moving";
}

std::string longitudinal_phrase(Longitudinal l) {
  switch (l) {
    case Longitudinal::kAccelerate: return "accelerate";
    case Longitudinal::kDecelerate: return "slow down";
    case Longitudinal::kMaintainSpeed: return "maintain its speed";
    case Longitudinal::kVehicleStarting: return "start moving from a standstill";
    case Longitudinal::kStop: return "come to a stop";
  }
  return "maintain its speed";
}

std::string maneuver_phrase(Maneuver m) {
  switch (m) {
    case Maneuver::kGoStraight: return "continue straight";
    case Maneuver::kLaneChangeLeft: return "change lanes to the left";
    case Maneuver::kLaneChangeRight: return "change lanes to the right";
    case Maneuver::kTurnLeft: return "turn left";
    case Maneuver::kTurnRight: return "turn right";
  }
  return "continue straight";
}

std::string command_phrase(Command c) {
  switch (c) {
    case Command::kForward: return "go forward";
    case Command::kLeft: return "turn left";
    case Command::kRight: return "turn right";
  }
  return "go forward";
}

class Renderer {
 public:
  Renderer(const std::vector<GroundedFact>& facts, const Lexicon& lexicon,
           const PriorLibrary* priors)
      : facts_(facts), lex_(lexicon), priors_(priors) {}

  std::optional<SlotFill> fill(const std::string& slot) const {
    if (slot == "weather") return env_value("env/weather", Predicate::kWeatherIs, false);
    if (slot == "road") return env_value("env/road", Predicate::kRoadIs, true);
    if (slot == "lanes") return lanes(false);
    if (slot == "cross_lanes") return lanes(true);
    if (slot == "static_objects") return objects(kStaticCategories);
    if (slot == "dynamic_objects") return objects(kDynamicCategories);
    if (slot == "signal") return signal();
    if (slot == "nearest_dynamic") return nearest_dynamic();
    if (slot == "speed_state" || slot == "longitudinal" || slot == "maneuver" ||
        slot == "command") {
      return action(slot);
    }
    if (slot == "observations") return observations();
    if (slot == "constraints") return constraints();
    if (slot == "decision") return decision();
    return std::nullopt;
  }

 private:
  const std::vector<GroundedFact>& facts_;
  const Lexicon& lex_;
  const PriorLibrary* priors_;

  std::optional<SlotFill> env_value(std::string_view id, Predicate p, bool road) const {
    const GroundedFact* f = find_fact(facts_, id);
    if (f == nullptr) f = find_first(facts_, p);
    if (f == nullptr) return std::nullopt;
    return SlotFill{road ? road_phrase(f->value_text()) : f->value_text(), {f->fact_id}};
  }

  std::optional<SlotFill> lanes(bool cross) const {
    const GroundedFact* f = find_first(facts_, Predicate::kLaneTopology);
    if (f == nullptr) return std::nullopt;
    auto v = parse_lane_value(f->value_text());
    if (cross) {
      return SlotFill{number_phrase(lex_, v["cross"], "crossing lane", "crossing lanes"),
                      {f->fact_id}};
    }
    return SlotFill{
        number_phrase(lex_, v["same"], "same-direction lane", "same-direction lanes") + " and " +
            number_phrase(lex_, v["opposite"], "opposite-direction lane",
                          "opposite-direction lanes"),
        {f->fact_id}};
  }

  // "<indefinite noun> at <band> <side>" for one object; consumed facts
  // appended to `used`.
  std::optional<std::string> locate(const std::string& subject, ObjectCategory category,
                                    std::vector<std::string>& used, bool with_article) const {
    const GroundedFact* e = subject_fact(facts_, subject, Predicate::kExists);
    const GroundedFact* s = subject_fact(facts_, subject, Predicate::kPositionSide);
    const GroundedFact* b = subject_fact(facts_, subject, Predicate::kDistanceBand);
    if (e == nullptr || s == nullptr || b == nullptr) return std::nullopt;
    const auto side = parse_side(s->value_text());
    const auto band = parse_band(b->value_text());
    if (!side || !band) return std::nullopt;
    used.insert(used.end(), {e->fact_id, s->fact_id, b->fact_id});
    std::string head = with_article ? lex_.indefinite(category) + " " : "";
    return head + "at " + Lexicon::band_phrase(*band) + " " + Lexicon::side_phrase(*side);
  }

  template <std::size_t N>
  std::optional<SlotFill> objects(const ObjectCategory (&categories)[N]) const {
    SlotFill out;
    std::vector<std::string> sentences;
    for (ObjectCategory c : categories) {
      const auto subjects = subjects_of_category(facts_, c);
      if (subjects.empty()) continue;
      const std::int64_t n = category_count(facts_, c);
      std::vector<std::string> used;
      const GroundedFact* count = find_fact(facts_, "count/" + std::string(to_string(c)));
      if (count != nullptr) used.push_back(count->fact_id);
      if (n <= 1) {
        auto where = locate(subjects.front(), c, used, true);
        if (!where) continue;
        sentences.push_back("There is " + *where + ".");
      } else {
        auto where = locate(subjects.front(), c, used, false);
        if (!where) continue;
        sentences.push_back("There are " + lex_.count_word(n) + " " + lex_.noun(c, n) +
                            ", the nearest " + *where + ".");
      }
      out.facts.insert(out.facts.end(), used.begin(), used.end());
    }
    if (sentences.empty()) return std::nullopt;
    out.text = join(sentences, " ");
    return out;
  }

  std::optional<SlotFill> signal() const {
    for (const auto& f : facts_) {
      if (f.predicate != Predicate::kSignalState) continue;
      const GroundedFact* s = subject_fact(facts_, f.subject(), Predicate::kPositionSide);
      const GroundedFact* e = subject_fact(facts_, f.subject(), Predicate::kExists);
      if (s == nullptr || e == nullptr) continue;
      const auto side = parse_side(s->value_text());
      if (!side) continue;
      return SlotFill{"the nearest traffic light " + Lexicon::side_phrase(*side) + " shows " +
                          f.value_text(),
                      {e->fact_id, s->fact_id, f.fact_id}};
    }
    return std::nullopt;
  }

  std::optional<SlotFill> nearest_dynamic() const {
    // exists facts are emitted nearest first
    for (const auto& f : facts_) {
      if (f.predicate != Predicate::kExists) continue;
      const auto c = parse_category(f.value_text());
      if (!c || !is_dynamic(*c)) continue;
      SlotFill out;
      auto where = locate(f.subject(), *c, out.facts, true);
      if (!where) continue;
      out.text = *where;
      return out;
    }
    return std::nullopt;
  }

  const GroundedFact* action_fact(const std::string& which) const {
    return find_fact(facts_, "action/" + which);
  }

  std::optional<SlotFill> action(const std::string& which) const {
    const GroundedFact* f = action_fact(which);
    if (f == nullptr) return std::nullopt;
    const std::string v = f->value_text();
    std::string text;
    if (which == "speed_state") {
      auto s = parse_speed_state(v);
      if (!s) return std::nullopt;
      text = speed_state_phrase(*s);
    } else if (which == "longitudinal") {
      auto l = parse_longitudinal(v);
      if (!l) return std::nullopt;
      text = longitudinal_phrase(*l);
    } else if (which == "maneuver") {
      auto m = parse_maneuver(v);
      if (!m) return std::nullopt;
      text = maneuver_phrase(*m);
    } else {
      auto c = parse_command(v);
      if (!c) return std::nullopt;
      text = command_phrase(*c);
    }
    return SlotFill{text, {f->fact_id}};
  }

  std::optional<SlotFill> observations() const {
    SlotFill out;
    std::vector<std::string> sentences;
    for (const GroundedFact* h : hazard_facts(facts_)) {
      if (h->predicate == Predicate::kExists) {
        const auto c = parse_category(h->value_text());
        if (!c) continue;
        std::vector<std::string> used;
        auto where = locate(h->subject(), *c, used, false);
        if (!where) continue;
        sentences.push_back("Observation: " + lex_.indefinite(*c) + " is " + *where + ".");
        out.facts.insert(out.facts.end(), used.begin(), used.end());
      } else {
        const GroundedFact* s = subject_fact(facts_, h->subject(), Predicate::kPositionSide);
        const GroundedFact* e = subject_fact(facts_, h->subject(), Predicate::kExists);
        const auto side = s ? parse_side(s->value_text()) : std::nullopt;
        if (!side || e == nullptr) continue;
        sentences.push_back("Observation: the traffic light " + Lexicon::side_phrase(*side) +
                            " is " + h->value_text() + ".");
        out.facts.insert(out.facts.end(), {e->fact_id, s->fact_id, h->fact_id});
      }
    }
    if (sentences.empty()) {
      const GroundedFact* road = find_first(facts_, Predicate::kRoadIs);
      if (road == nullptr) return std::nullopt;
      sentences.push_back("Observation: no hazards are close to the ego vehicle.");
      out.facts.push_back(road->fact_id);
    }
    out.text = join(sentences, " ");
    return out;
  }

  std::optional<SlotFill> constraints() const {
    if (priors_ == nullptr) return std::nullopt;
    SlotFill out;
    std::vector<std::string> sentences;
    const auto triggers = prior_triggers(facts_);
    for (const PriorRow* row : priors_->matching(triggers)) {
      sentences.push_back("Constraint: " + row->constraint_text);
      for (auto& id : trigger_sources(facts_, row->trigger)) out.facts.push_back(std::move(id));
    }
    if (sentences.empty()) {
      const PriorRow* row = priors_->default_row();
      if (row == nullptr) return std::nullopt;
      sentences.push_back("Constraint: " + row->constraint_text);
    }
    out.text = join(sentences, " ");
    return out;
  }

  std::optional<SlotFill> decision() const {
    auto l = action("longitudinal");
    auto m = action("maneuver");
    if (!l || !m) return std::nullopt;
    return SlotFill{"the ego vehicle should " + l->text + " and " + m->text,
                    {l->facts.front(), m->facts.front()}};
  }
};

GroundedCaption render_impl(const std::vector<GroundedFact>& facts, const TemplateSpec& spec,
                            QACategory category, const Lexicon& lexicon,
                            const PriorLibrary* priors) {
  for (Predicate p : spec.required_predicates) {
    if (find_first(facts, p) == nullptr) {
      throw MissingSlotError(spec.id, std::string(to_string(p)));
    }
  }
  Renderer renderer(facts, lexicon, priors);
  GroundedCaption out;
  out.category = category;
  std::set<std::string> seen;
  std::size_t pos = 0;
  while (pos < spec.pattern.size()) {
    const std::size_t open = spec.pattern.find('{', pos);
    if (open == std::string::npos) {
      out.text += spec.pattern.substr(pos);
      break;
    }
    const std::size_t close = spec.pattern.find('}', open);
    if (close == std::string::npos) throw ConfigError("unterminated slot in '" + spec.id + "'");
    out.text += spec.pattern.substr(pos, open - pos);
    const std::string slot = spec.pattern.substr(open + 1, close - open - 1);
    auto fill = renderer.fill(slot);
    if (!fill) throw MissingSlotError(spec.id, slot);
    out.text += fill->text;
    for (auto& id : fill->facts) {
      if (seen.insert(id).second) out.facts_used.push_back(std::move(id));
    }
    pos = close + 1;
  }
  return out;
}

std::uint64_t pick_seed(std::uint64_t seed, std::string_view what, QACategory category) {
  return derive_seed(seed, std::string(what) + "/" + std::string(to_string(category)));
}

std::vector<GroundedFact> with_action_facts(std::vector<GroundedFact> facts,
                                            const ActionLabel& label) {
  if (find_fact(facts, "action/longitudinal") != nullptr) return facts;
  std::string frame_id = facts.empty() ? std::string() : facts.front().frame_id;
  for (auto& f : action_facts(label, frame_id)) facts.push_back(std::move(f));
  return facts;
}

}  // namespace

std::string_view to_string(QACategory c) {
  switch (c) {
    case QACategory::kEnvironment: return "environment";
    case QACategory::kStatic: return "static";
    case QACategory::kDynamic: return "dynamic";
    case QACategory::kReasoning: return "reasoning";
    case QACategory::kAction: return "action";
  }
  return "environment";
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::kTemplate: return "template";
    case Provenance::kMllmValidated: return "mllm_validated";
    case Provenance::kMllmRepaired: return "mllm_repaired";
  }
  return "template";
}

std::optional<QACategory> parse_qa_category(std::string_view s) {
  for (QACategory c : kAllQACategories) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

std::optional<Provenance> parse_provenance(std::string_view s) {
  for (Provenance p : {Provenance::kTemplate, Provenance::kMllmValidated,
                       Provenance::kMllmRepaired}) {
    if (to_string(p) == s) return p;
  }
  return std::nullopt;
}

std::string_view empty_scene_sentence(QACategory category) {
  switch (category) {
    case QACategory::kEnvironment: return "The environment of this scene is not annotated.";
    case QACategory::kStatic: return "There are no static objects around the ego vehicle.";
    case QACategory::kDynamic: return "There are no moving agents around the ego vehicle.";
    case QACategory::kReasoning: return "No reasoning is available for this scene.";
    case QACategory::kAction: return "No action is annotated for this scene.";
  }
  return "";
}

nlohmann::json caption_to_json(const GroundedCaption& caption) {
  return {{"text", caption.text},
          {"facts_used", caption.facts_used},
          {"category", std::string(to_string(caption.category))}};
}

GroundedCaption caption_from_json(const nlohmann::json& j) {
  try {
    GroundedCaption c;
    c.text = j.at("text").get<std::string>();
    c.facts_used = j.at("facts_used").get<std::vector<std::string>>();
    const auto cat = parse_qa_category(j.at("category").get<std::string>());
    if (!cat) throw SchemaError("caption: unknown category");
    c.category = *cat;
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed caption: ") + e.what());
  }
}

nlohmann::json qa_to_json(const QAPair& qa) {
  return {{"scene_id", qa.scene_id},
          {"window_index", qa.window_index},
          {"category", std::string(to_string(qa.category))},
          {"question", qa.question},
          {"answer", caption_to_json(qa.answer)},
          {"validation", std::string(to_string(qa.validation))}};
}

QAPair qa_from_json(const nlohmann::json& j) {
  try {
    QAPair qa;
    qa.scene_id = j.at("scene_id").get<std::string>();
    qa.window_index = j.at("window_index").get<std::size_t>();
    const auto cat = parse_qa_category(j.at("category").get<std::string>());
    const auto val = parse_provenance(j.at("validation").get<std::string>());
    if (!cat || !val) throw SchemaError("qa pair: unknown category or validation");
    qa.category = *cat;
    qa.validation = *val;
    qa.question = j.at("question").get<std::string>();
    qa.answer = caption_from_json(j.at("answer"));
    return qa;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed qa pair: ") + e.what());
  }
}

PriorLibrary::PriorLibrary(std::vector<PriorRow> rows) : rows_(std::move(rows)) {}

PriorLibrary PriorLibrary::from_json(const nlohmann::json& rows) {
  if (!rows.is_array()) throw ConfigError("prior library must be a JSON array");
  std::vector<PriorRow> out;
  try {
    for (const auto& r : rows) {
      out.push_back({r.at("trigger").get<std::string>(), r.at("constraint_text").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("prior library: ") + e.what());
  }
  return PriorLibrary(std::move(out));
}

PriorLibrary PriorLibrary::load(const std::filesystem::path& path) {
  return from_json(read_json_file(path));
}

std::vector<const PriorRow*> PriorLibrary::matching(const std::vector<std::string>& triggers) const {
  std::vector<const PriorRow*> out;
  for (const auto& r : rows_) {
    if (std::find(triggers.begin(), triggers.end(), r.trigger) != triggers.end()) {
      out.push_back(&r);
    }
  }
  return out;
}

const PriorRow* PriorLibrary::default_row() const {
  for (const auto& r : rows_) {
    if (r.trigger == "default") return &r;
  }
  return nullptr;
}

const std::vector<std::string>& known_slots() {
  static const std::vector<std::string> slots = {
      "weather",     "road",         "lanes",       "cross_lanes", "static_objects",
      "dynamic_objects", "signal",   "nearest_dynamic", "speed_state", "longitudinal",
      "maneuver",    "command",      "observations", "constraints", "decision"};
  return slots;
}

TemplateSet TemplateSet::from_json(const nlohmann::json& j) {
  TemplateSet set;
  if (!j.is_object() || !j.contains("categories")) {
    throw ConfigError("template set needs a 'categories' object");
  }
  const auto& slots = known_slots();
  try {
    for (const auto& [name, rows] : j.at("categories").items()) {
      const auto cat = parse_qa_category(name);
      if (!cat) throw ConfigError("template set: unknown category '" + name + "'");
      auto& list = set.templates_[*cat];
      for (const auto& row : rows) {
        TemplateSpec spec;
        spec.id = row.at("id").get<std::string>();
        spec.pattern = row.at("pattern").get<std::string>();
        for (const auto& p : row.value("required_predicates", nlohmann::json::array())) {
          const auto pred = parse_predicate(p.get<std::string>());
          if (!pred) throw ConfigError("template '" + spec.id + "': unknown predicate");
          spec.required_predicates.push_back(*pred);
        }
        if (auto it = row.find("fallback_id"); it != row.end() && !it->is_null()) {
          spec.fallback_id = it->get<std::string>();
        }
        for (const auto& s : pattern_slots(spec.pattern)) {
          if (std::find(slots.begin(), slots.end(), s) == slots.end()) {
            throw ConfigError("template '" + spec.id + "': unknown slot '{" + s + "}'");
          }
        }
        for (const auto& existing : list) {
          if (existing.id == spec.id) throw ConfigError("duplicate template id '" + spec.id + "'");
        }
        list.push_back(std::move(spec));
      }
    }
    if (auto it = j.find("questions"); it != j.end()) {
      for (const auto& [name, rows] : it->items()) {
        const auto cat = parse_qa_category(name);
        if (!cat) throw ConfigError("template set: unknown question category '" + name + "'");
        set.questions_[*cat] = rows.get<std::vector<std::string>>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("template set: ") + e.what());
  }

  // Fallbacks must resolve within the category and must not loop.
  for (const auto& [cat, list] : set.templates_) {
    for (const auto& spec : list) {
      std::set<std::string> visited{spec.id};
      const TemplateSpec* cur = &spec;
      while (cur->fallback_id) {
        const TemplateSpec* next = set.find(cat, *cur->fallback_id);
        if (next == nullptr) {
          throw ConfigError("template '" + cur->id + "': unknown fallback '" + *cur->fallback_id +
                            "'");
        }
        if (!visited.insert(next->id).second) {
          throw ConfigError("template '" + spec.id + "': fallback cycle");
        }
        cur = next;
      }
    }
  }
  return set;
}

TemplateSet TemplateSet::load(const std::filesystem::path& path) {
  return from_json(read_json_file(path));
}

const std::vector<TemplateSpec>& TemplateSet::templates(QACategory category) const {
  static const std::vector<TemplateSpec> empty;
  auto it = templates_.find(category);
  return it == templates_.end() ? empty : it->second;
}

const std::vector<std::string>& TemplateSet::questions(QACategory category) const {
  static const std::vector<std::string> empty;
  auto it = questions_.find(category);
  return it == questions_.end() ? empty : it->second;
}

const TemplateSpec* TemplateSet::find(QACategory category, std::string_view id) const {
  for (const auto& spec : templates(category)) {
    if (spec.id == id) return &spec;
  }
  return nullptr;
}

GroundedCaption render_template(const std::vector<GroundedFact>& facts, const TemplateSpec& spec,
                                QACategory category, const Lexicon& lexicon) {
  return render_impl(facts, spec, category, lexicon, nullptr);
}

GroundedCaption render_caption(const std::vector<GroundedFact>& facts, QACategory category,
                               const TemplateSet& templates, std::uint64_t seed) {
  const auto& list = templates.templates(category);
  if (list.empty()) {
    throw EmptyTemplateSetError("no templates for category '" + std::string(to_string(category)) +
                                "'");
  }
  SeededStream rng(pick_seed(seed, "template", category));
  const TemplateSpec& spec = list[rng.index(list.size())];
  return render_impl(facts, spec, category, templates.lexicon(), &templates.priors());
}

GroundedCaption render_with_fallback(const std::vector<GroundedFact>& facts, QACategory category,
                                     const TemplateSet& templates, std::uint64_t seed) {
  const auto& list = templates.templates(category);
  if (list.empty()) {
    throw EmptyTemplateSetError("no templates for category '" + std::string(to_string(category)) +
                                "'");
  }
  SeededStream rng(pick_seed(seed, "template", category));
  const TemplateSpec* spec = &list[rng.index(list.size())];
  while (spec != nullptr) {
    try {
      return render_impl(facts, *spec, category, templates.lexicon(), &templates.priors());
    } catch (const MissingSlotError&) {
      spec = spec->fallback_id ? templates.find(category, *spec->fallback_id) : nullptr;
    }
  }
  return GroundedCaption{std::string(empty_scene_sentence(category)), {}, category};
}

GroundedCaption compose_reasoning(const std::vector<GroundedFact>& facts,
                                  const ActionLabel& label, const TemplateSet& templates,
                                  std::uint64_t seed) {
  return render_with_fallback(with_action_facts(facts, label), QACategory::kReasoning, templates,
                              seed);
}

std::vector<std::string> decision_lexemes(Longitudinal longitudinal) {
  switch (longitudinal) {
    case Longitudinal::kStop: return {"stop"};
    case Longitudinal::kVehicleStarting: return {"start", "moving"};
    case Longitudinal::kAccelerate: return {"accelerate"};
    case Longitudinal::kDecelerate: return {"slow", "down"};
    case Longitudinal::kMaintainSpeed: return {"maintain", "speed"};
  }
  return {};
}

std::string pick_question(QACategory category, const TemplateSet& templates, std::uint64_t seed) {
  const auto& list = templates.questions(category);
  if (list.empty()) {
    return "Describe the " + std::string(to_string(category)) + " aspects of the scene.";
  }
  SeededStream rng(pick_seed(seed, "question", category));
  return list[rng.index(list.size())];
}

std::vector<QAPair> generate_qa(const SceneWindow& window, const ActionLabel& label,
                                const TemplateSet& templates, std::uint64_t seed,
                                const std::vector<QACategory>& categories,
                                const FactThresholds& thresholds) {
  auto facts = extract_facts(window, thresholds);
  facts = with_action_facts(std::move(facts), label);
  std::vector<QAPair> out;
  out.reserve(categories.size());
  for (QACategory c : categories) {
    QAPair qa;
    qa.scene_id = window.scene_id;
    qa.window_index = window.window_index;
    qa.category = c;
    qa.question = pick_question(c, templates, seed);
    qa.answer = render_with_fallback(facts, c, templates, seed);
    qa.validation = Provenance::kTemplate;
    out.push_back(std::move(qa));
  }
  return out;
}

}  // namespace vlaforge
