#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "vlaforge/action_labeler.hpp"
#include "vlaforge/scene.hpp"

namespace vlaforge {

enum class Predicate {
  kExists,
  kCount,
  kPositionSide,
  kDistanceBand,
  kSignalState,
  kLaneTopology,
  kWeatherIs,
  kRoadIs,
  kActionIs,
};

enum class Side { kFront, kFrontLeft, kFrontRight, kLeft, kRight, kRear };
enum class DistanceBand { kNear, kMid, kFar };

std::string_view to_string(Predicate p);
std::string_view to_string(Side s);
std::string_view to_string(DistanceBand b);
std::optional<Predicate> parse_predicate(std::string_view s);
std::optional<Side> parse_side(std::string_view s);
std::optional<DistanceBand> parse_band(std::string_view s);

using FactValue = std::variant<std::string, std::int64_t>;

// An atomic, machine-checkable assertion about one frame of a window.
struct GroundedFact {
  std::string fact_id;
  Predicate predicate = Predicate::kExists;
  std::vector<std::string> subject_ids;  // object ids or "ego"
  FactValue value;
  std::string frame_id;
  // Magnitude behind a banded value (metres for distance_band).
  std::optional<double> measure;

  const std::string& subject() const { return subject_ids.front(); }
  std::string value_text() const;
  std::int64_t value_int() const;

  friend bool operator==(const GroundedFact&, const GroundedFact&) = default;
};

nlohmann::json fact_to_json(const GroundedFact& fact);
GroundedFact fact_from_json(const nlohmann::json& j);

// One-line "id | predicate | subjects | value" serialization used in prompts.
std::string serialize_fact(const GroundedFact& fact);

struct FactThresholds {
  double near_max = 10.0;        // near  < near_max
  double mid_max = 30.0;         // mid in [near_max, mid_max], far beyond
  double front_half_angle_deg = 30.0;
  double rear_half_angle_deg = 30.0;

  void validate() const;
  static FactThresholds from_json(const nlohmann::json& block);
};

// Polar sector of an ego-frame position (+x forward, +y left).
Side side_of(const Vec2& position, const FactThresholds& thresholds = {});
DistanceBand band_of(double distance, const FactThresholds& thresholds = {});

// Environment facts (weather, road, lane topology) for the window, then
// count facts per present category and exists / position_side /
// distance_band (and signal_state for lights) facts per object of the last
// frame, objects ordered by distance.
std::vector<GroundedFact> extract_facts(const SceneWindow& window,
                                        const FactThresholds& thresholds = {});
std::vector<GroundedFact> extract_frame_facts(const FrameRecord& frame,
                                              const FactThresholds& thresholds = {});

// speed_state / longitudinal / maneuver / command facts about "ego".
std::vector<GroundedFact> action_facts(const ActionLabel& label, const std::string& frame_id);

// --- queries over a fact list ---

const GroundedFact* find_fact(const std::vector<GroundedFact>& facts, std::string_view fact_id);
const GroundedFact* find_first(const std::vector<GroundedFact>& facts, Predicate predicate);
std::optional<ObjectCategory> category_of_subject(const std::vector<GroundedFact>& facts,
                                                  std::string_view subject);
// Object ids asserted to exist with the given category, in fact order.
std::vector<std::string> subjects_of_category(const std::vector<GroundedFact>& facts,
                                              ObjectCategory category);
const GroundedFact* subject_fact(const std::vector<GroundedFact>& facts,
                                 std::string_view subject, Predicate predicate);
// Count fact value if present, else the number of exists facts.
std::int64_t category_count(const std::vector<GroundedFact>& facts, ObjectCategory category);

// Human-prior trigger names raised by a fact list, sorted and unique:
// pedestrian_near, cyclist_near, vehicle_near, signal_red, signal_yellow,
// signal_green, weather_<w> for non-clear weather, road_intersection,
// road_highway, cross_lanes.
std::vector<std::string> prior_triggers(const std::vector<GroundedFact>& facts);

// Facts whose presence raises `trigger`.
std::vector<std::string> trigger_sources(const std::vector<GroundedFact>& facts,
                                         std::string_view trigger);

// Hazard-class facts: exists facts of dynamic agents in the near band and
// red signal facts.
std::vector<const GroundedFact*> hazard_facts(const std::vector<GroundedFact>& facts);

}  // namespace vlaforge
