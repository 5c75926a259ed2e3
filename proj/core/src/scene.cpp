#include "vlaforge/scene.hpp"

#include <array>
#include <cstdio>
#include <set>
#include <utility>

#include "vlaforge/errors.hpp"

namespace vlaforge {

namespace {

template <typename E, std::size_t N>
std::optional<E> lookup(const std::array<std::pair<E, std::string_view>, N>& table,
                        std::string_view s) {
  for (const auto& [value, name] : table) {
    if (name == s) return value;
  }
  return std::nullopt;
}

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E e) {
  for (const auto& [value, name] : table) {
    if (value == e) return name;
  }
  return "unknown";
}

constexpr std::array<std::pair<ObjectCategory, std::string_view>, 6> kCategoryNames{{
    {ObjectCategory::kVehicle, "vehicle"},
    {ObjectCategory::kPedestrian, "pedestrian"},
    {ObjectCategory::kCyclist, "cyclist"},
    {ObjectCategory::kTrafficLight, "traffic_light"},
    {ObjectCategory::kTrafficSign, "traffic_sign"},
    {ObjectCategory::kOther, "other"},
}};

constexpr std::array<std::pair<Weather, std::string_view>, 6> kWeatherNames{{
    {Weather::kClear, "clear"},
    {Weather::kRain, "rain"},
    {Weather::kFog, "fog"},
    {Weather::kSnow, "snow"},
    {Weather::kTwilight, "twilight"},
    {Weather::kNight, "night"},
}};

constexpr std::array<std::pair<RoadType, std::string_view>, 4> kRoadNames{{
    {RoadType::kCity, "city"},
    {RoadType::kRural, "rural"},
    {RoadType::kHighway, "highway"},
    {RoadType::kIntersection, "intersection"},
}};

constexpr std::array<std::pair<CrossDirection, std::string_view>, 2> kCrossNames{{
    {CrossDirection::kLeftToRight, "left_to_right"},
    {CrossDirection::kRightToLeft, "right_to_left"},
}};

bool vec_equal(const Eigen::Ref<const Eigen::VectorXd>& a,
               const Eigen::Ref<const Eigen::VectorXd>& b) {
  return a.size() == b.size() && (a.array() == b.array()).all();
}

bool polyline_equal(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!vec_equal(a[i], b[i])) return false;
  }
  return true;
}

bool object_equal(const ObjectAnnotation& a, const ObjectAnnotation& b) {
  return a.object_id == b.object_id && a.category == b.category &&
         vec_equal(a.center, b.center) && vec_equal(a.size, b.size) && a.yaw == b.yaw &&
         vec_equal(a.velocity, b.velocity) && a.attributes == b.attributes;
}

bool lanes_equal(const LaneGraph& a, const LaneGraph& b) {
  if (a.same_direction_lanes != b.same_direction_lanes ||
      a.opposite_direction_lanes != b.opposite_direction_lanes ||
      a.lane_width != b.lane_width || a.cross_lanes.size() != b.cross_lanes.size() ||
      a.drivable_polygons.size() != b.drivable_polygons.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.cross_lanes.size(); ++i) {
    if (a.cross_lanes[i].direction != b.cross_lanes[i].direction ||
        !polyline_equal(a.cross_lanes[i].polyline, b.cross_lanes[i].polyline)) {
      return false;
    }
  }
  for (std::size_t i = 0; i < a.drivable_polygons.size(); ++i) {
    if (!polyline_equal(a.drivable_polygons[i], b.drivable_polygons[i])) return false;
  }
  return true;
}

}  // namespace

std::string_view to_string(ObjectCategory c) { return name_of(kCategoryNames, c); }
std::string_view to_string(Weather w) { return name_of(kWeatherNames, w); }
std::string_view to_string(RoadType r) { return name_of(kRoadNames, r); }
std::string_view to_string(CrossDirection d) { return name_of(kCrossNames, d); }

std::optional<ObjectCategory> parse_category(std::string_view s) {
  return lookup(kCategoryNames, s);
}
std::optional<Weather> parse_weather(std::string_view s) { return lookup(kWeatherNames, s); }
std::optional<RoadType> parse_road_type(std::string_view s) { return lookup(kRoadNames, s); }
std::optional<CrossDirection> parse_cross_direction(std::string_view s) {
  return lookup(kCrossNames, s);
}

bool is_dynamic(ObjectCategory c) {
  return c == ObjectCategory::kVehicle || c == ObjectCategory::kPedestrian ||
         c == ObjectCategory::kCyclist;
}

bool operator==(const FrameRecord& a, const FrameRecord& b) {
  if (a.frame_id != b.frame_id || a.weather != b.weather || a.road_type != b.road_type ||
      a.media_refs != b.media_refs || a.extras != b.extras) {
    return false;
  }
  if (!a.ego.world_pose.approx_equal(b.ego.world_pose, 0.0) || a.ego.speed != b.ego.speed ||
      a.ego.yaw_rate != b.ego.yaw_rate || a.ego.timestamp_us != b.ego.timestamp_us) {
    return false;
  }
  if (a.objects.size() != b.objects.size()) return false;
  for (std::size_t i = 0; i < a.objects.size(); ++i) {
    if (!object_equal(a.objects[i], b.objects[i])) return false;
  }
  return lanes_equal(a.lanes, b.lanes);
}

SceneRecord::SceneRecord(std::string scene_id, std::vector<FrameRecord> frames,
                         nlohmann::json extras)
    : scene_id_(std::move(scene_id)), frames_(std::move(frames)), extras_(std::move(extras)) {
  if (frames_.empty()) {
    throw SchemaError("scene '" + scene_id_ + "': frames must contain at least one frame");
  }
  std::set<std::string> ids;
  for (std::size_t i = 0; i < frames_.size(); ++i) {
    if (!ids.insert(frames_[i].frame_id).second) {
      throw SchemaError("scene '" + scene_id_ + "': frames[" + std::to_string(i) +
                        "].frame_id '" + frames_[i].frame_id + "' is not unique");
    }
    if (i > 0 && frames_[i].timestamp_us() <= frames_[i - 1].timestamp_us()) {
      throw OrderError("scene '" + scene_id_ + "': frames[" + std::to_string(i) +
                       "].timestamp_us " + std::to_string(frames_[i].timestamp_us()) +
                       " does not exceed previous " +
                       std::to_string(frames_[i - 1].timestamp_us()));
    }
  }
}

bool operator==(const SceneRecord& a, const SceneRecord& b) {
  return a.scene_id_ == b.scene_id_ && a.frames_ == b.frames_ && a.extras_ == b.extras_;
}

std::string SceneWindow::key() const {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "/w%03zu", window_index);
  return scene_id + buf;
}

}  // namespace vlaforge
