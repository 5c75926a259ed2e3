#include "vlaforge/scene_store.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "vlaforge/errors.hpp"

namespace vlaforge {

using nlohmann::json;

namespace {

const std::set<std::string> kFrameKeys = {"frame_id", "timestamp_us", "ego",     "objects",
                                          "lanes",    "weather",      "road_type", "media_refs"};
const std::set<std::string> kSceneKeys = {"scene_id", "frames", "coordinate_frame"};
const std::set<std::string> kDatabaseKeys = {"schema_version", "scene_id", "frame_index",
                                             "scene_extras"};

const json& require(const json& j, const char* key, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(path + "." + key + ": missing required field");
  return *it;
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError(path + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw SchemaError(path + ": expected a finite number");
  return v;
}

std::int64_t as_integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw SchemaError(path + ": expected an integer");
  return j.get<std::int64_t>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw SchemaError(path + ": expected a string");
  return j.get<std::string>();
}

const json& as_array(const json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaError(path + ": expected an array");
  return j;
}

Eigen::VectorXd as_vector(const json& j, std::size_t n, const std::string& path) {
  as_array(j, path);
  if (j.size() != n) {
    throw SchemaError(path + ": expected " + std::to_string(n) + " numbers, got " +
                      std::to_string(j.size()));
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    v(static_cast<Eigen::Index>(i)) = as_number(j[i], path + "[" + std::to_string(i) + "]");
  }
  return v;
}

Vec2 as_vec2(const json& j, const std::string& path) { return as_vector(j, 2, path); }
Vec3 as_vec3(const json& j, const std::string& path) { return as_vector(j, 3, path); }

std::vector<Vec2> as_points(const json& j, const std::string& path) {
  as_array(j, path);
  std::vector<Vec2> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(as_vec2(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

const json* optional_field(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

// Maps a world-frame xy point onto the ego frame, evaluated on the ego's
// ground plane.
struct FrameConverter {
  bool world = true;
  RigidTransform to_ego;
  double plane_z = 0.0;

  Vec3 point(const Vec3& p) const { return world ? to_ego.apply(p) : p; }
  Vec2 point_xy(const Vec2& p) const {
    return world ? to_ego.apply(Vec3(p.x(), p.y(), plane_z)).head<2>().eval() : p;
  }
  Vec2 direction_xy(const Vec2& v) const { return world ? to_ego.rotate_xy(v) : v; }
  double yaw(double y, double ego_world_yaw) const {
    return world ? wrap_angle(y - ego_world_yaw) : y;
  }
};

EgoState parse_ego(const json& j, const std::string& path) {
  EgoState ego;
  const Vec3 position = as_vec3(require(j, "position", path), path + ".position");
  const Eigen::VectorXd r = as_vector(require(j, "rotation", path), 9, path + ".rotation");
  Mat3 rotation;
  rotation << r(0), r(1), r(2), r(3), r(4), r(5), r(6), r(7), r(8);
  if (!RigidTransform::is_proper_rotation(rotation)) {
    throw GeometryError(path + ".rotation: not orthonormal with determinant +1 within 1e-9");
  }
  ego.world_pose = RigidTransform(rotation, position);
  ego.speed = as_number(require(j, "speed", path), path + ".speed");
  if (ego.speed < 0.0) throw SchemaError(path + ".speed: must be >= 0");
  ego.yaw_rate = as_number(require(j, "yaw_rate", path), path + ".yaw_rate");
  return ego;
}

ObjectAnnotation parse_object(const json& j, const std::string& path,
                              const FrameConverter& conv, double ego_world_yaw) {
  ObjectAnnotation obj;
  obj.object_id = as_string(require(j, "object_id", path), path + ".object_id");
  if (obj.object_id.empty()) throw SchemaError(path + ".object_id: must not be empty");
  if (obj.object_id == "ego") throw SchemaError(path + ".object_id: 'ego' is reserved");
  const std::string cat = as_string(require(j, "category", path), path + ".category");
  const auto parsed = parse_category(cat);
  if (!parsed) throw SchemaError(path + ".category: unknown category '" + cat + "'");
  obj.category = *parsed;
  obj.center = conv.point(as_vec3(require(j, "center", path), path + ".center"));
  obj.size = as_vec3(require(j, "size", path), path + ".size");
  if ((obj.size.array() <= 0.0).any()) {
    throw SchemaError(path + ".size: all components must be > 0");
  }
  if (const json* yaw = optional_field(j, "yaw")) {
    obj.yaw = conv.yaw(as_number(*yaw, path + ".yaw"), ego_world_yaw);
  }
  if (const json* vel = optional_field(j, "velocity")) {
    obj.velocity = conv.direction_xy(as_vec2(*vel, path + ".velocity"));
  }
  if (const json* attrs = optional_field(j, "attributes")) {
    if (!attrs->is_object()) throw SchemaError(path + ".attributes: expected an object");
    for (const auto& [key, value] : attrs->items()) {
      obj.attributes[key] = as_string(value, path + ".attributes." + key);
    }
  }
  return obj;
}

LaneGraph parse_lanes(const json& j, const std::string& path, const FrameConverter& conv) {
  LaneGraph lanes;
  const auto same = as_integer(require(j, "same_direction", path), path + ".same_direction");
  const auto opposite =
      as_integer(require(j, "opposite_direction", path), path + ".opposite_direction");
  if (same < 0 || opposite < 0) throw SchemaError(path + ": lane counts must be >= 0");
  lanes.same_direction_lanes = static_cast<int>(same);
  lanes.opposite_direction_lanes = static_cast<int>(opposite);
  if (const json* width = optional_field(j, "lane_width")) {
    lanes.lane_width = as_number(*width, path + ".lane_width");
  }
  if (lanes.lane_width <= 0.0) throw SchemaError(path + ".lane_width: must be > 0");
  if (const json* cross = optional_field(j, "cross_lanes")) {
    as_array(*cross, path + ".cross_lanes");
    for (std::size_t i = 0; i < cross->size(); ++i) {
      const std::string p = path + ".cross_lanes[" + std::to_string(i) + "]";
      const json& item = (*cross)[i];
      CrossLane lane;
      const std::string dir = as_string(require(item, "direction", p), p + ".direction");
      const auto parsed = parse_cross_direction(dir);
      if (!parsed) throw SchemaError(p + ".direction: unknown direction '" + dir + "'");
      lane.direction = *parsed;
      if (const json* poly = optional_field(item, "polyline")) {
        for (const Vec2& pt : as_points(*poly, p + ".polyline")) {
          lane.polyline.push_back(conv.point_xy(pt));
        }
      }
      lanes.cross_lanes.push_back(std::move(lane));
    }
  }
  if (const json* polys = optional_field(j, "drivable_polygons")) {
    as_array(*polys, path + ".drivable_polygons");
    for (std::size_t i = 0; i < polys->size(); ++i) {
      const std::string p = path + ".drivable_polygons[" + std::to_string(i) + "]";
      Polygon2D poly;
      for (const Vec2& pt : as_points((*polys)[i], p)) poly.push_back(conv.point_xy(pt));
      if (!is_simple_polygon_candidate(poly)) {
        throw GeometryError(p + ": polygon needs >= 3 non-collinear vertices");
      }
      lanes.drivable_polygons.push_back(std::move(poly));
    }
  }
  return lanes;
}

FrameRecord parse_frame(const json& j, const std::string& path, bool world_frame) {
  if (!j.is_object()) throw SchemaError(path + ": expected an object");
  FrameRecord frame;
  frame.frame_id = as_string(require(j, "frame_id", path), path + ".frame_id");
  frame.ego = parse_ego(require(j, "ego", path), path + ".ego");
  frame.ego.timestamp_us = as_integer(require(j, "timestamp_us", path), path + ".timestamp_us");

  FrameConverter conv;
  conv.world = world_frame;
  conv.to_ego = frame.ego.pose();
  conv.plane_z = frame.ego.world_position().z();
  const double ego_yaw = frame.ego.world_yaw();

  const json& objects = as_array(require(j, "objects", path), path + ".objects");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const std::string p = path + ".objects[" + std::to_string(i) + "]";
    ObjectAnnotation obj = parse_object(objects[i], p, conv, ego_yaw);
    if (!ids.insert(obj.object_id).second) {
      throw SchemaError(p + ".object_id: '" + obj.object_id + "' is not unique in frame");
    }
    frame.objects.push_back(std::move(obj));
  }
  frame.lanes = parse_lanes(require(j, "lanes", path), path + ".lanes", conv);

  const std::string weather = as_string(require(j, "weather", path), path + ".weather");
  const auto w = parse_weather(weather);
  if (!w) throw SchemaError(path + ".weather: unknown weather '" + weather + "'");
  frame.weather = *w;
  const std::string road = as_string(require(j, "road_type", path), path + ".road_type");
  const auto r = parse_road_type(road);
  if (!r) throw SchemaError(path + ".road_type: unknown road type '" + road + "'");
  frame.road_type = *r;

  if (const json* refs = optional_field(j, "media_refs")) {
    as_array(*refs, path + ".media_refs");
    for (std::size_t i = 0; i < refs->size(); ++i) {
      frame.media_refs.push_back(
          as_string((*refs)[i], path + ".media_refs[" + std::to_string(i) + "]"));
    }
  }
  for (const auto& [key, value] : j.items()) {
    if (!kFrameKeys.contains(key) && !kDatabaseKeys.contains(key)) frame.extras[key] = value;
  }
  return frame;
}

json points_json(const std::vector<Vec2>& pts) {
  json out = json::array();
  for (const Vec2& p : pts) out.push_back({p.x(), p.y()});
  return out;
}

}  // namespace

SceneRecord ingest_scene(const json& document) {
  if (!document.is_object()) throw SchemaError("$: expected a JSON object");
  const std::string scene_id = as_string(require(document, "scene_id", "$"), "$.scene_id");
  bool world_frame = true;
  if (const json* cf = optional_field(document, "coordinate_frame")) {
    const std::string mode = as_string(*cf, "$.coordinate_frame");
    if (mode == "ego") {
      world_frame = false;
    } else if (mode != "world") {
      throw SchemaError("$.coordinate_frame: expected 'world' or 'ego', got '" + mode + "'");
    }
  }
  const json& frames_json = as_array(require(document, "frames", "$"), "$.frames");
  if (frames_json.empty()) throw SchemaError("$.frames: must contain at least one frame");
  std::vector<FrameRecord> frames;
  frames.reserve(frames_json.size());
  for (std::size_t i = 0; i < frames_json.size(); ++i) {
    frames.push_back(parse_frame(frames_json[i], "$.frames[" + std::to_string(i) + "]",
                                 world_frame));
  }
  json extras = json::object();
  for (const auto& [key, value] : document.items()) {
    if (!kSceneKeys.contains(key)) extras[key] = value;
  }
  return SceneRecord(scene_id, std::move(frames), std::move(extras));
}

SceneRecord ingest_scene_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("$: invalid JSON: ") + e.what());
  }
  return ingest_scene(doc);
}

SceneRecord ingest_scene_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingInputError("cannot open scene document " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return ingest_scene_text(buffer.str());
  } catch (const SchemaError& e) {
    throw SchemaError(path.filename().string() + ": " + e.what());
  }
}

json frame_to_json(const FrameRecord& frame) {
  json j = frame.extras.is_object() ? frame.extras : json::object();
  j["frame_id"] = frame.frame_id;
  j["timestamp_us"] = frame.ego.timestamp_us;
  const Mat3& r = frame.ego.world_pose.rotation();
  const Vec3& t = frame.ego.world_pose.translation();
  j["ego"] = {{"position", {t.x(), t.y(), t.z()}},
              {"rotation", {r(0, 0), r(0, 1), r(0, 2), r(1, 0), r(1, 1), r(1, 2), r(2, 0),
                            r(2, 1), r(2, 2)}},
              {"speed", frame.ego.speed},
              {"yaw_rate", frame.ego.yaw_rate}};
  json objects = json::array();
  for (const ObjectAnnotation& o : frame.objects) {
    json attrs = json::object();
    for (const auto& [k, v] : o.attributes) attrs[k] = v;
    objects.push_back({{"object_id", o.object_id},
                       {"category", std::string(to_string(o.category))},
                       {"center", {o.center.x(), o.center.y(), o.center.z()}},
                       {"size", {o.size.x(), o.size.y(), o.size.z()}},
                       {"yaw", o.yaw},
                       {"velocity", {o.velocity.x(), o.velocity.y()}},
                       {"attributes", attrs}});
  }
  j["objects"] = std::move(objects);
  json cross = json::array();
  for (const CrossLane& c : frame.lanes.cross_lanes) {
    cross.push_back({{"direction", std::string(to_string(c.direction))},
                     {"polyline", points_json(c.polyline)}});
  }
  json polys = json::array();
  for (const Polygon2D& p : frame.lanes.drivable_polygons) polys.push_back(points_json(p));
  j["lanes"] = {{"same_direction", frame.lanes.same_direction_lanes},
                {"opposite_direction", frame.lanes.opposite_direction_lanes},
                {"cross_lanes", std::move(cross)},
                {"drivable_polygons", std::move(polys)},
                {"lane_width", frame.lanes.lane_width}};
  j["weather"] = std::string(to_string(frame.weather));
  j["road_type"] = std::string(to_string(frame.road_type));
  j["media_refs"] = frame.media_refs;
  return j;
}

FrameRecord frame_from_json(const json& j, const std::string& path) {
  return parse_frame(j, path, /*world_frame=*/false);
}

json scene_to_document(const SceneRecord& scene) {
  json doc = scene.extras().is_object() ? scene.extras() : json::object();
  doc["scene_id"] = scene.scene_id();
  doc["coordinate_frame"] = "ego";
  json frames = json::array();
  for (const FrameRecord& f : scene.frames()) frames.push_back(frame_to_json(f));
  doc["frames"] = std::move(frames);
  return doc;
}

std::vector<SceneWindow> partition_windows(const SceneRecord& scene, std::size_t window_len,
                                           std::size_t stride) {
  if (window_len < 1 || stride < 1) {
    throw RangeError("window_len and stride must both be >= 1");
  }
  if (scene.size() < window_len) {
    throw TooShortError("scene '" + scene.scene_id() + "' has " + std::to_string(scene.size()) +
                        " frames, fewer than window length " + std::to_string(window_len));
  }
  std::vector<SceneWindow> windows;
  const auto starts = window_starts(scene.size(), window_len, stride);
  windows.reserve(starts.size());
  for (std::size_t w = 0; w < starts.size(); ++w) {
    SceneWindow window;
    window.scene_id = scene.scene_id();
    window.window_index = w;
    window.start_index = starts[w];
    window.stride = stride;
    const auto first = scene.frames().begin() + static_cast<std::ptrdiff_t>(starts[w]);
    window.frames.assign(first, first + static_cast<std::ptrdiff_t>(window_len));
    windows.push_back(std::move(window));
  }
  return windows;
}

std::vector<std::size_t> window_starts(std::size_t frame_count, std::size_t window_len,
                                       std::size_t stride) {
  std::vector<std::size_t> starts;
  if (window_len == 0 || stride == 0 || frame_count < window_len) return starts;
  for (std::size_t s = 0; s + window_len <= frame_count; s += stride) starts.push_back(s);
  if (starts.back() + window_len < frame_count) starts.push_back(frame_count - window_len);
  return starts;
}

ProximitySummary min_distances(const FrameRecord& frame, ObjectCategory category) {
  ProximitySummary summary;
  for (const ObjectAnnotation& o : frame.objects) {
    if (o.category != category) continue;
    ++summary.count;
    const double d = o.center.norm();
    if (!summary.min_distance || d < *summary.min_distance) summary.min_distance = d;
  }
  return summary;
}

std::vector<std::string> database_lines(const SceneRecord& scene) {
  std::vector<std::string> lines;
  lines.reserve(scene.size());
  for (std::size_t i = 0; i < scene.size(); ++i) {
    json j = frame_to_json(scene.frames()[i]);
    j["schema_version"] = kDatabaseSchemaVersion;
    j["scene_id"] = scene.scene_id();
    j["frame_index"] = i;
    if (i == 0 && scene.extras().is_object() && !scene.extras().empty()) {
      j["scene_extras"] = scene.extras();
    }
    lines.push_back(j.dump());
  }
  return lines;
}

void write_database(std::ostream& out, const std::vector<SceneRecord>& scenes) {
  for (const SceneRecord& scene : scenes) {
    for (const std::string& line : database_lines(scene)) out << line << '\n';
  }
}

std::vector<SceneRecord> read_database(std::istream& in) {
  struct Pending {
    std::string scene_id;
    std::vector<std::pair<std::int64_t, FrameRecord>> frames;
    json extras = json::object();
  };
  std::vector<Pending> pending;
  std::unordered_map<std::string, std::size_t> index;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string path = "line " + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw SchemaError(path + ": invalid JSON: " + e.what());
    }
    const auto version = as_integer(require(j, "schema_version", path), path + ".schema_version");
    if (version != kDatabaseSchemaVersion) {
      throw SchemaError(path + ".schema_version: unsupported version " + std::to_string(version));
    }
    const std::string scene_id = as_string(require(j, "scene_id", path), path + ".scene_id");
    const auto frame_index = as_integer(require(j, "frame_index", path), path + ".frame_index");
    auto [it, inserted] = index.try_emplace(scene_id, pending.size());
    if (inserted) pending.push_back(Pending{scene_id, {}, json::object()});
    Pending& p = pending[it->second];
    if (auto extras = j.find("scene_extras"); extras != j.end()) p.extras = *extras;
    p.frames.emplace_back(frame_index, frame_from_json(j, path));
  }
  std::vector<SceneRecord> scenes;
  scenes.reserve(pending.size());
  for (Pending& p : pending) {
    std::stable_sort(p.frames.begin(), p.frames.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<FrameRecord> frames;
    frames.reserve(p.frames.size());
    for (auto& [idx, frame] : p.frames) frames.push_back(std::move(frame));
    scenes.emplace_back(p.scene_id, std::move(frames), std::move(p.extras));
  }
  return scenes;
}

std::vector<SceneRecord> read_database_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingInputError("cannot open database " + path.string());
  return read_database(in);
}

}  // namespace vlaforge
