#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vlaforge/scene.hpp"

namespace vlaforge::test {

// Ego-frame object with the given category at (x, y).
inline ObjectAnnotation object_at(const std::string& id, ObjectCategory cat, double x, double y,
                                  double yaw = 0.0) {
  ObjectAnnotation o;
  o.object_id = id;
  o.category = cat;
  o.center = Vec3(x, y, 0.0);
  o.size = Vec3(4.0, 2.0, 1.5);
  o.yaw = yaw;
  return o;
}

// Frame whose ego pose is (x, y, yaw) in the world.
inline FrameRecord frame_at(const std::string& id, std::int64_t t_us, double x, double y,
                            double yaw, double speed, std::vector<ObjectAnnotation> objects = {}) {
  FrameRecord f;
  f.frame_id = id;
  f.ego.world_pose = RigidTransform::from_yaw(yaw, Vec3(x, y, 0.0));
  f.ego.speed = speed;
  f.ego.timestamp_us = t_us;
  f.objects = std::move(objects);
  f.lanes.same_direction_lanes = 2;
  f.lanes.opposite_direction_lanes = 1;
  f.media_refs = {"cam://" + id + "/front"};
  return f;
}

// Straight drive along world +x at constant speed, 0.5 s spacing.
inline SceneRecord straight_scene(const std::string& id, std::size_t n, double speed) {
  std::vector<FrameRecord> frames;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 0.5 * static_cast<double>(i);
    frames.push_back(frame_at(id + "-" + std::to_string(i), static_cast<std::int64_t>(i) * 500000,
                              speed * t, 0.0, 0.0, speed));
  }
  return SceneRecord(id, std::move(frames));
}

}  // namespace vlaforge::test
