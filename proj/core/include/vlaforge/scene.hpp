#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "vlaforge/geometry.hpp"

namespace vlaforge {

enum class ObjectCategory { kVehicle, kPedestrian, kCyclist, kTrafficLight, kTrafficSign, kOther };
enum class Weather { kClear, kRain, kFog, kSnow, kTwilight, kNight };
enum class RoadType { kCity, kRural, kHighway, kIntersection };
enum class CrossDirection { kLeftToRight, kRightToLeft };

inline constexpr ObjectCategory kAllCategories[] = {
    ObjectCategory::kVehicle,      ObjectCategory::kPedestrian,   ObjectCategory::kCyclist,
    ObjectCategory::kTrafficLight, ObjectCategory::kTrafficSign, ObjectCategory::kOther};

std::string_view to_string(ObjectCategory c);
std::string_view to_string(Weather w);
std::string_view to_string(RoadType r);
std::string_view to_string(CrossDirection d);

std::optional<ObjectCategory> parse_category(std::string_view s);
std::optional<Weather> parse_weather(std::string_view s);
std::optional<RoadType> parse_road_type(std::string_view s);
std::optional<CrossDirection> parse_cross_direction(std::string_view s);

// Vehicles, pedestrians and cyclists move; lights, signs and other
// obstacles are treated as static scene content.
bool is_dynamic(ObjectCategory c);

// Ego-frame convention: +x forward, +y left, yaw counter-clockwise about +z.
struct EgoState {
  // Ego-to-world pose as recorded in the source document.
  RigidTransform world_pose;
  double speed = 0.0;     // m/s, >= 0
  double yaw_rate = 0.0;  // rad/s
  std::int64_t timestamp_us = 0;

  // World-to-ego transform.
  RigidTransform pose() const { return world_pose.inverse(); }
  Vec3 world_position() const { return world_pose.translation(); }
  double world_yaw() const { return world_pose.yaw(); }
};

struct ObjectAnnotation {
  std::string object_id;
  ObjectCategory category = ObjectCategory::kOther;
  Vec3 center = Vec3::Zero();  // ego frame
  Vec3 size = Vec3::Ones();    // length, width, height
  double yaw = 0.0;            // ego frame
  Vec2 velocity = Vec2::Zero();
  std::map<std::string, std::string> attributes;
};

struct CrossLane {
  CrossDirection direction = CrossDirection::kLeftToRight;
  std::vector<Vec2> polyline;
};

struct LaneGraph {
  int same_direction_lanes = 0;
  int opposite_direction_lanes = 0;
  std::vector<CrossLane> cross_lanes;
  std::vector<Polygon2D> drivable_polygons;
  double lane_width = 3.5;

  int total_lanes() const { return same_direction_lanes + opposite_direction_lanes; }
};

struct FrameRecord {
  std::string frame_id;
  EgoState ego;
  std::vector<ObjectAnnotation> objects;
  LaneGraph lanes;
  Weather weather = Weather::kClear;
  RoadType road_type = RoadType::kCity;
  std::vector<std::string> media_refs;
  // Unknown keys from the source document, carried through untouched.
  nlohmann::json extras = nlohmann::json::object();

  std::int64_t timestamp_us() const { return ego.timestamp_us; }
};

bool operator==(const FrameRecord& a, const FrameRecord& b);

// Immutable after construction. The constructor enforces strictly increasing
// timestamps and unique frame ids.
class SceneRecord {
 public:
  SceneRecord(std::string scene_id, std::vector<FrameRecord> frames,
              nlohmann::json extras = nlohmann::json::object());

  const std::string& scene_id() const { return scene_id_; }
  const std::vector<FrameRecord>& frames() const { return frames_; }
  const nlohmann::json& extras() const { return extras_; }
  std::size_t size() const { return frames_.size(); }

  friend bool operator==(const SceneRecord& a, const SceneRecord& b);

 private:
  std::string scene_id_;
  std::vector<FrameRecord> frames_;
  nlohmann::json extras_;
};

struct SceneWindow {
  std::string scene_id;
  std::size_t window_index = 0;
  std::size_t start_index = 0;  // index of frames.front() in the scene
  std::size_t stride = 1;
  std::vector<FrameRecord> frames;

  const FrameRecord& last_frame() const { return frames.back(); }
  // "<scene_id>/w<index>", zero padded to three digits.
  std::string key() const;
};

}  // namespace vlaforge
