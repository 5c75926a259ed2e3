#include "vlaforge/facts.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <utility>

#include "vlaforge/errors.hpp"
#include "vlaforge/util.hpp"

namespace vlaforge {

namespace {

template <typename E, std::size_t N>
using NameTable = std::array<std::pair<E, std::string_view>, N>;

constexpr NameTable<Predicate, 9> kPredicateNames{{
    {Predicate::kExists, "exists"},
    {Predicate::kCount, "count"},
    {Predicate::kPositionSide, "position_side"},
    {Predicate::kDistanceBand, "distance_band"},
    {Predicate::kSignalState, "signal_state"},
    {Predicate::kLaneTopology, "lane_topology"},
    {Predicate::kWeatherIs, "weather_is"},
    {Predicate::kRoadIs, "road_is"},
    {Predicate::kActionIs, "action_is"},
}};
constexpr NameTable<Side, 6> kSideNames{{
    {Side::kFront, "front"},
    {Side::kFrontLeft, "front_left"},
    {Side::kFrontRight, "front_right"},
    {Side::kLeft, "left"},
    {Side::kRight, "right"},
    {Side::kRear, "rear"},
}};
constexpr NameTable<DistanceBand, 3> kBandNames{{
    {DistanceBand::kNear, "near"},
    {DistanceBand::kMid, "mid"},
    {DistanceBand::kFar, "far"},
}};

template <typename E, std::size_t N>
std::string_view name_of(const NameTable<E, N>& table, E e) {
  for (const auto& [value, name] : table) {
    if (value == e) return name;
  }
  return "unknown";
}

template <typename E, std::size_t N>
std::optional<E> value_of(const NameTable<E, N>& table, std::string_view s) {
  for (const auto& [value, name] : table) {
    if (name == s) return value;
  }
  return std::nullopt;
}

std::string signal_value(const ObjectAnnotation& obj) {
  for (const char* key : {"color", "state", "light_state"}) {
    auto it = obj.attributes.find(key);
    if (it != obj.attributes.end() && !it->second.empty()) return to_lower(it->second);
  }
  return {};
}

GroundedFact make_fact(std::string id, Predicate predicate, std::vector<std::string> subjects,
                       FactValue value, const std::string& frame_id,
                       std::optional<double> measure = std::nullopt) {
  GroundedFact f;
  f.fact_id = std::move(id);
  f.predicate = predicate;
  f.subject_ids = std::move(subjects);
  f.value = std::move(value);
  f.frame_id = frame_id;
  f.measure = measure;
  return f;
}

bool is_near_agent(const std::vector<GroundedFact>& facts, const GroundedFact& exists_fact,
                   ObjectCategory category) {
  if (exists_fact.predicate != Predicate::kExists) return false;
  if (exists_fact.value_text() != to_string(category)) return false;
  const GroundedFact* band = subject_fact(facts, exists_fact.subject(), Predicate::kDistanceBand);
  return band != nullptr && band->value_text() == "near";
}

}  // namespace

std::string_view to_string(Predicate p) { return name_of(kPredicateNames, p); }
std::string_view to_string(Side s) { return name_of(kSideNames, s); }
std::string_view to_string(DistanceBand b) { return name_of(kBandNames, b); }
std::optional<Predicate> parse_predicate(std::string_view s) { return value_of(kPredicateNames, s); }
std::optional<Side> parse_side(std::string_view s) { return value_of(kSideNames, s); }
std::optional<DistanceBand> parse_band(std::string_view s) { return value_of(kBandNames, s); }

std::string GroundedFact::value_text() const {
  if (const auto* s = std::get_if<std::string>(&value)) return *s;
  return std::to_string(std::get<std::int64_t>(value));
}

std::int64_t GroundedFact::value_int() const {
  if (const auto* i = std::get_if<std::int64_t>(&value)) return *i;
  return 0;
}

nlohmann::json fact_to_json(const GroundedFact& fact) {
  nlohmann::json j = {{"fact_id", fact.fact_id},
                      {"predicate", std::string(to_string(fact.predicate))},
                      {"subject_ids", fact.subject_ids},
                      {"frame_id", fact.frame_id}};
  if (const auto* s = std::get_if<std::string>(&fact.value)) {
    j["value"] = *s;
  } else {
    j["value"] = std::get<std::int64_t>(fact.value);
  }
  if (fact.measure) j["measure"] = *fact.measure;
  return j;
}

GroundedFact fact_from_json(const nlohmann::json& j) {
  GroundedFact f;
  try {
    f.fact_id = j.at("fact_id").get<std::string>();
    const auto pred = parse_predicate(j.at("predicate").get<std::string>());
    if (!pred) throw SchemaError("fact '" + f.fact_id + "': unknown predicate");
    f.predicate = *pred;
    f.subject_ids = j.at("subject_ids").get<std::vector<std::string>>();
    f.frame_id = j.at("frame_id").get<std::string>();
    const auto& v = j.at("value");
    if (v.is_number_integer()) {
      f.value = v.get<std::int64_t>();
    } else {
      f.value = v.get<std::string>();
    }
    if (auto it = j.find("measure"); it != j.end()) f.measure = it->get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed fact: ") + e.what());
  }
  return f;
}

std::string serialize_fact(const GroundedFact& fact) {
  return fact.fact_id + " | " + std::string(to_string(fact.predicate)) + " | " +
         join(fact.subject_ids, ",") + " | " + fact.value_text();
}

void FactThresholds::validate() const {
  if (!(near_max > 0.0) || !(mid_max > near_max)) {
    throw ConfigError("[templates] distance bands need 0 < near_max < mid_max");
  }
  if (!(front_half_angle_deg > 0.0) || !(rear_half_angle_deg > 0.0) ||
      front_half_angle_deg >= 90.0 || rear_half_angle_deg >= 90.0) {
    throw ConfigError("[templates] sector half angles must lie in (0, 90) degrees");
  }
}

FactThresholds FactThresholds::from_json(const nlohmann::json& block) {
  FactThresholds t;
  if (!block.is_object()) return t;
  t.near_max = block.value("near_max", t.near_max);
  t.mid_max = block.value("mid_max", t.mid_max);
  t.front_half_angle_deg = block.value("front_half_angle_deg", t.front_half_angle_deg);
  t.rear_half_angle_deg = block.value("rear_half_angle_deg", t.rear_half_angle_deg);
  t.validate();
  return t;
}

Side side_of(const Vec2& position, const FactThresholds& thresholds) {
  const double angle = rad_to_deg(std::atan2(position.y(), position.x()));
  const double front = thresholds.front_half_angle_deg;
  const double rear = 180.0 - thresholds.rear_half_angle_deg;
  const double magnitude = std::abs(angle);
  if (magnitude < front) return Side::kFront;
  if (magnitude >= rear) return Side::kRear;
  if (angle > 0.0) return angle < 90.0 ? Side::kFrontLeft : Side::kLeft;
  return angle > -90.0 ? Side::kFrontRight : Side::kRight;
}

DistanceBand band_of(double distance, const FactThresholds& thresholds) {
  if (distance < thresholds.near_max) return DistanceBand::kNear;
  if (distance <= thresholds.mid_max) return DistanceBand::kMid;
  return DistanceBand::kFar;
}

std::vector<GroundedFact> extract_frame_facts(const FrameRecord& frame,
                                              const FactThresholds& thresholds) {
  std::vector<GroundedFact> facts;
  const std::string& fid = frame.frame_id;
  facts.push_back(make_fact("env/weather", Predicate::kWeatherIs, {"ego"},
                            std::string(to_string(frame.weather)), fid));
  facts.push_back(make_fact("env/road", Predicate::kRoadIs, {"ego"},
                            std::string(to_string(frame.road_type)), fid));
  facts.push_back(make_fact(
      "env/lanes", Predicate::kLaneTopology, {"ego"},
      "same=" + std::to_string(frame.lanes.same_direction_lanes) +
          ";opposite=" + std::to_string(frame.lanes.opposite_direction_lanes) +
          ";cross=" + std::to_string(frame.lanes.cross_lanes.size()),
      fid));

  std::vector<const ObjectAnnotation*> ordered;
  for (const ObjectAnnotation& o : frame.objects) ordered.push_back(&o);
  std::stable_sort(ordered.begin(), ordered.end(), [](const auto* a, const auto* b) {
    const double da = a->center.norm();
    const double db = b->center.norm();
    if (da != db) return da < db;
    return a->object_id < b->object_id;
  });

  for (ObjectCategory category : kAllCategories) {
    std::vector<std::string> ids;
    for (const auto* o : ordered) {
      if (o->category == category) ids.push_back(o->object_id);
    }
    if (ids.empty()) continue;
    const auto n = static_cast<std::int64_t>(ids.size());
    facts.push_back(make_fact("count/" + std::string(to_string(category)), Predicate::kCount,
                              std::move(ids), n, fid));
  }

  for (const auto* o : ordered) {
    const std::string prefix = "obj/" + o->object_id + "/";
    const double distance = o->center.norm();
    facts.push_back(make_fact(prefix + "exists", Predicate::kExists, {o->object_id},
                              std::string(to_string(o->category)), fid, distance));
    facts.push_back(make_fact(prefix + "side", Predicate::kPositionSide, {o->object_id},
                              std::string(to_string(side_of(o->center.head<2>(), thresholds))),
                              fid));
    facts.push_back(make_fact(prefix + "band", Predicate::kDistanceBand, {o->object_id},
                              std::string(to_string(band_of(distance, thresholds))), fid,
                              distance));
    if (o->category == ObjectCategory::kTrafficLight) {
      const std::string state = signal_value(*o);
      if (!state.empty()) {
        facts.push_back(
            make_fact(prefix + "signal", Predicate::kSignalState, {o->object_id}, state, fid));
      }
    }
  }
  return facts;
}

std::vector<GroundedFact> extract_facts(const SceneWindow& window,
                                        const FactThresholds& thresholds) {
  if (window.frames.empty()) throw SchemaError("window has no frames");
  return extract_frame_facts(window.last_frame(), thresholds);
}

std::vector<GroundedFact> action_facts(const ActionLabel& label, const std::string& frame_id) {
  return {
      make_fact("action/command", Predicate::kActionIs, {"ego"},
                std::string(to_string(label.command)), frame_id),
      make_fact("action/longitudinal", Predicate::kActionIs, {"ego"},
                std::string(to_string(label.longitudinal)), frame_id),
      make_fact("action/maneuver", Predicate::kActionIs, {"ego"},
                std::string(to_string(label.maneuver)), frame_id),
      make_fact("action/speed_state", Predicate::kActionIs, {"ego"},
                std::string(to_string(label.speed_state)), frame_id),
  };
}

const GroundedFact* find_fact(const std::vector<GroundedFact>& facts, std::string_view fact_id) {
  for (const auto& f : facts) {
    if (f.fact_id == fact_id) return &f;
  }
  return nullptr;
}

const GroundedFact* find_first(const std::vector<GroundedFact>& facts, Predicate predicate) {
  for (const auto& f : facts) {
    if (f.predicate == predicate) return &f;
  }
  return nullptr;
}

std::optional<ObjectCategory> category_of_subject(const std::vector<GroundedFact>& facts,
                                                  std::string_view subject) {
  const GroundedFact* f = subject_fact(facts, subject, Predicate::kExists);
  if (f == nullptr) return std::nullopt;
  return parse_category(f->value_text());
}

std::vector<std::string> subjects_of_category(const std::vector<GroundedFact>& facts,
                                              ObjectCategory category) {
  std::vector<std::string> out;
  for (const auto& f : facts) {
    if (f.predicate == Predicate::kExists && f.value_text() == to_string(category)) {
      out.push_back(f.subject());
    }
  }
  return out;
}

const GroundedFact* subject_fact(const std::vector<GroundedFact>& facts,
                                 std::string_view subject, Predicate predicate) {
  for (const auto& f : facts) {
    if (f.predicate == predicate && !f.subject_ids.empty() && f.subject() == subject) return &f;
  }
  return nullptr;
}

std::int64_t category_count(const std::vector<GroundedFact>& facts, ObjectCategory category) {
  const std::string id = "count/" + std::string(to_string(category));
  for (const auto& f : facts) {
    if (f.predicate == Predicate::kCount && f.fact_id == id) return f.value_int();
  }
  return static_cast<std::int64_t>(subjects_of_category(facts, category).size());
}

std::vector<std::string> prior_triggers(const std::vector<GroundedFact>& facts) {
  std::set<std::string> triggers;
  for (const auto& f : facts) {
    switch (f.predicate) {
      case Predicate::kExists:
        for (ObjectCategory c : {ObjectCategory::kPedestrian, ObjectCategory::kCyclist,
                                 ObjectCategory::kVehicle}) {
          if (is_near_agent(facts, f, c)) triggers.insert(std::string(to_string(c)) + "_near");
        }
        break;
      case Predicate::kSignalState: {
        const std::string v = f.value_text();
        if (v == "red" || v == "yellow" || v == "green") triggers.insert("signal_" + v);
        break;
      }
      case Predicate::kWeatherIs:
        if (f.value_text() != "clear") triggers.insert("weather_" + f.value_text());
        break;
      case Predicate::kRoadIs:
        if (f.value_text() == "intersection" || f.value_text() == "highway") {
          triggers.insert("road_" + f.value_text());
        }
        break;
      case Predicate::kLaneTopology:
        if (f.value_text().find("cross=0") == std::string::npos) triggers.insert("cross_lanes");
        break;
      default:
        break;
    }
  }
  return {triggers.begin(), triggers.end()};
}

std::vector<std::string> trigger_sources(const std::vector<GroundedFact>& facts,
                                         std::string_view trigger) {
  std::vector<std::string> ids;
  const auto raised = prior_triggers(facts);
  if (std::find(raised.begin(), raised.end(), trigger) == raised.end()) return ids;
  for (const auto& f : facts) {
    switch (f.predicate) {
      case Predicate::kExists:
        for (ObjectCategory c : {ObjectCategory::kPedestrian, ObjectCategory::kCyclist,
                                 ObjectCategory::kVehicle}) {
          if (trigger == std::string(to_string(c)) + "_near" && is_near_agent(facts, f, c)) {
            ids.push_back(f.fact_id);
            for (Predicate p : {Predicate::kPositionSide, Predicate::kDistanceBand}) {
              if (const auto* s = subject_fact(facts, f.subject(), p)) ids.push_back(s->fact_id);
            }
          }
        }
        break;
      case Predicate::kSignalState:
        if (trigger == "signal_" + f.value_text()) {
          if (const auto* e = subject_fact(facts, f.subject(), Predicate::kExists)) {
            ids.push_back(e->fact_id);
          }
          ids.push_back(f.fact_id);
        }
        break;
      case Predicate::kWeatherIs:
        if (trigger == "weather_" + f.value_text()) ids.push_back(f.fact_id);
        break;
      case Predicate::kRoadIs:
        if (trigger == "road_" + f.value_text()) ids.push_back(f.fact_id);
        break;
      case Predicate::kLaneTopology:
        if (trigger == "cross_lanes") ids.push_back(f.fact_id);
        break;
      default:
        break;
    }
  }
  return ids;
}

std::vector<const GroundedFact*> hazard_facts(const std::vector<GroundedFact>& facts) {
  std::vector<const GroundedFact*> out;
  for (const auto& f : facts) {
    if (f.predicate == Predicate::kExists) {
      for (ObjectCategory c : {ObjectCategory::kPedestrian, ObjectCategory::kCyclist,
                               ObjectCategory::kVehicle}) {
        if (is_near_agent(facts, f, c)) out.push_back(&f);
      }
    } else if (f.predicate == Predicate::kSignalState && f.value_text() == "red") {
      out.push_back(&f);
    }
  }
  return out;
}

}  // namespace vlaforge
