#pragma once

#include <array>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vlaforge/geometry.hpp"

namespace vlaforge {

inline constexpr std::array<double, 3> kReportHorizons = {1.0, 2.0, 3.0};
inline constexpr double kGridTolerance = 1e-6;       // seconds
inline constexpr double kFrameMatchTolerance = 0.25;  // seconds

struct TimedPoint {
  double t = 0.0;
  Vec2 position = Vec2::Zero();
};

// Ego-frame waypoints at t0 on a fixed grid (default 0.5 .. 3.0 s).
struct PlanPrediction {
  std::string sample_id;
  std::vector<TimedPoint> waypoints;

  // {"sample_id": str, "waypoints": [[t, x, y], ...]}
  static PlanPrediction from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// One Table-2 cell group: values at 1 s, 2 s, 3 s and their mean.
struct HorizonValues {
  std::array<double, 3> at{0.0, 0.0, 0.0};

  double avg() const { return (at[0] + at[1] + at[2]) / 3.0; }
  static HorizonValues of(double h1, double h2, double h3) { return {{h1, h2, h3}}; }
};

// Per-sample L2 error at 1/2/3 s. Throws GridMismatchError when either
// side lacks a grid point at a reporting horizon.
HorizonValues l2_at_horizons(const PlanPrediction& pred, const PlanPrediction& gt);
// Mean over samples; predictions and ground truth are paired by index and
// must carry the same sample ids. Throws EmptyBatchError, GridMismatchError.
HorizonValues l2_batch(const std::vector<PlanPrediction>& preds,
                       const std::vector<PlanPrediction>& gts);

struct EgoDims {
  double length = 4.6;
  double width = 1.9;
};

// Object boxes of one ground-truth frame, in the sample's ego frame at t0.
struct TimedBoxes {
  double t = 0.0;
  std::vector<OrientedBox2D> boxes;
};

// Headings of each waypoint from central differences over
// [origin, waypoints...]; the last point uses a backward difference and a
// standstill keeps the previous heading (0 at the start).
std::vector<double> waypoint_headings(const PlanPrediction& pred);

OrientedBox2D ego_box(const Vec2& position, double heading, const EgoDims& dims);

// True when the prediction collides at some grid time <= horizon.
bool sample_collides(const PlanPrediction& pred, const std::vector<TimedBoxes>& frames,
                     double horizon, const EgoDims& dims);

// Percentages at 1/2/3 s. `frames[i]` belongs to `preds[i]`; an empty frame
// list means no annotated objects. Throws EmptyBatchError and
// GridMismatchError (no object frame within 0.25 s of a grid time).
HorizonValues collision_rate(const std::vector<PlanPrediction>& preds,
                             const std::vector<std::vector<TimedBoxes>>& frames,
                             const EgoDims& dims = {});

// Drivable-area violation: a waypoint at a grid time <= h outside every
// polygon (even-odd rule). Throws DegenerateGeometryError for polygons with
// fewer than three vertices, EmptyBatchError.
HorizonValues intersection_rate(const std::vector<PlanPrediction>& preds,
                                const std::vector<std::vector<Polygon2D>>& drivable);

}  // namespace vlaforge
