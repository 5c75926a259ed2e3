#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "vlaforge/geometry.hpp"
#include "vlaforge/scene.hpp"

namespace vlaforge {

enum class SpeedState { kCrawling, kModerateSpeed, kMovingFast };
enum class Longitudinal { kAccelerate, kDecelerate, kMaintainSpeed, kVehicleStarting, kStop };
enum class Maneuver { kGoStraight, kLaneChangeLeft, kLaneChangeRight, kTurnLeft, kTurnRight };
enum class Command { kForward, kLeft, kRight };

inline constexpr SpeedState kAllSpeedStates[] = {SpeedState::kCrawling, SpeedState::kModerateSpeed,
                                                 SpeedState::kMovingFast};
inline constexpr Longitudinal kAllLongitudinal[] = {
    Longitudinal::kAccelerate, Longitudinal::kDecelerate, Longitudinal::kMaintainSpeed,
    Longitudinal::kVehicleStarting, Longitudinal::kStop};
inline constexpr Maneuver kAllManeuvers[] = {Maneuver::kGoStraight, Maneuver::kLaneChangeLeft,
                                             Maneuver::kLaneChangeRight, Maneuver::kTurnLeft,
                                             Maneuver::kTurnRight};

std::string_view to_string(SpeedState s);
std::string_view to_string(Longitudinal l);
std::string_view to_string(Maneuver m);
std::string_view to_string(Command c);
std::optional<SpeedState> parse_speed_state(std::string_view s);
std::optional<Longitudinal> parse_longitudinal(std::string_view s);
std::optional<Maneuver> parse_maneuver(std::string_view s);
std::optional<Command> parse_command(std::string_view s);

struct ActionLabel {
  SpeedState speed_state = SpeedState::kCrawling;
  Longitudinal longitudinal = Longitudinal::kMaintainSpeed;
  Maneuver maneuver = Maneuver::kGoStraight;
  Command command = Command::kForward;

  friend bool operator==(const ActionLabel&, const ActionLabel&) = default;
};

// All five thresholds are required in the [labeler] config block.
struct LabelerThresholds {
  double crawl_speed = 2.0;   // m/s
  double fast_speed = 8.0;    // m/s
  double stop_speed = 0.5;    // m/s
  double delta_speed = 1.0;   // m/s
  double turn_angle = deg_to_rad(45.0);

  // Throws ConfigError on inconsistent values.
  void validate() const;

  static LabelerThresholds from_json(const nlohmann::json& block);
  nlohmann::json to_json() const;
};

inline constexpr double kMinLabelHorizon = 0.5;  // seconds
inline constexpr double kDefaultLaneWidth = 3.5;

struct Waypoint {
  double t = 0.0;           // seconds from now
  Vec2 position = Vec2::Zero();  // ego frame at t0
  double heading = 0.0;     // radians, ego frame at t0
};

class TrajectorySample {
 public:
  // Throws DegenerateTrajectoryError when fewer than two waypoints are
  // given, times are not strictly increasing, or the first time is negative.
  explicit TrajectorySample(std::vector<Waypoint> waypoints);

  const std::vector<Waypoint>& waypoints() const { return waypoints_; }
  double horizon() const { return waypoints_.back().t; }

 private:
  std::vector<Waypoint> waypoints_;
};

SpeedState classify_speed_state(double current_speed, const LabelerThresholds& thresholds);

// Time-weighted mean speed over the final third of the horizon, from finite
// differences between consecutive waypoints.
double terminal_speed(const TrajectorySample& traj);

Longitudinal label_longitudinal(double current_speed, const TrajectorySample& traj,
                                const LabelerThresholds& thresholds);

Maneuver label_maneuver(const TrajectorySample& traj, double lane_width,
                        const LabelerThresholds& thresholds);
Maneuver label_maneuver(const TrajectorySample& traj, const LaneGraph& lanes,
                        const LabelerThresholds& thresholds);

Command command_for(Maneuver maneuver);
Command derive_command(const TrajectorySample& traj, const LabelerThresholds& thresholds,
                       double lane_width = kDefaultLaneWidth);

ActionLabel label_action(double current_speed, const TrajectorySample& traj,
                         const LaneGraph& lanes, const LabelerThresholds& thresholds);

// Future ego trajectory of frame `index`, expressed in that frame's ego
// frame, using subsequent frames up to `horizon_s`. When the recorded future
// is shorter than kMinLabelHorizon the motion is extrapolated from the
// current speed and yaw rate (constant turn rate and velocity) instead.
struct FutureTrajectory {
  TrajectorySample trajectory;
  bool extrapolated = false;
};
FutureTrajectory future_trajectory(const SceneRecord& scene, std::size_t index,
                                   double horizon_s = 3.0, double extrapolation_step_s = 0.5);

}  // namespace vlaforge
