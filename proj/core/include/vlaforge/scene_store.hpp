#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vlaforge/scene.hpp"

namespace vlaforge {

inline constexpr int kDatabaseSchemaVersion = 1;
inline constexpr std::size_t kDefaultWindowLength = 5;
inline constexpr std::size_t kDefaultWindowStride = 2;

// Parses one scene document and converts world-frame content to the ego
// frame of each frame's ego pose. Documents carrying
// "coordinate_frame": "ego" are taken as already ego-relative.
//
// Throws SchemaError (with a JSON path), OrderError for non-increasing
// timestamps and GeometryError for improper ego rotations or degenerate
// drivable polygons.
SceneRecord ingest_scene(const nlohmann::json& document);
SceneRecord ingest_scene_text(const std::string& text);
SceneRecord ingest_scene_file(const std::filesystem::path& path);

// Emits an ego-frame document that ingest_scene accepts and that reproduces
// `scene` exactly.
nlohmann::json scene_to_document(const SceneRecord& scene);

// Windows start at 0, stride, 2*stride, ... while they fit; when the tail
// would be left uncovered one extra window is anchored to end at the last
// frame. Throws TooShortError when the scene has fewer than window_len
// frames and RangeError for zero window_len or stride.
std::vector<SceneWindow> partition_windows(const SceneRecord& scene,
                                           std::size_t window_len = kDefaultWindowLength,
                                           std::size_t stride = kDefaultWindowStride);

// Start indices partition_windows would use, without copying frames.
std::vector<std::size_t> window_starts(std::size_t frame_count, std::size_t window_len,
                                       std::size_t stride);

struct ProximitySummary {
  std::size_t count = 0;
  std::optional<double> min_distance;  // metres, absent when count == 0
};

ProximitySummary min_distances(const FrameRecord& frame, ObjectCategory category);

// --- ego-centric database (JSONL, one line per frame) ---

nlohmann::json frame_to_json(const FrameRecord& frame);
FrameRecord frame_from_json(const nlohmann::json& j, const std::string& path);

std::vector<std::string> database_lines(const SceneRecord& scene);
void write_database(std::ostream& out, const std::vector<SceneRecord>& scenes);
// Groups lines by scene_id in order of first appearance.
std::vector<SceneRecord> read_database(std::istream& in);
std::vector<SceneRecord> read_database_file(const std::filesystem::path& path);

}  // namespace vlaforge
