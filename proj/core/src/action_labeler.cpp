#include "vlaforge/action_labeler.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

#include "vlaforge/errors.hpp"

namespace vlaforge {

namespace {

template <typename E, std::size_t N>
using NameTable = std::array<std::pair<E, std::string_view>, N>;

constexpr NameTable<SpeedState, 3> kSpeedNames{{
    {SpeedState::kCrawling, "Crawling"},
    {SpeedState::kModerateSpeed, "ModerateSpeed"},
    {SpeedState::kMovingFast, "MovingFast"},
}};
constexpr NameTable<Longitudinal, 5> kLongNames{{
    {Longitudinal::kAccelerate, "Accelerate"},
    {Longitudinal::kDecelerate, "Decelerate"},
    {Longitudinal::kMaintainSpeed, "MaintainSpeed"},
    {Longitudinal::kVehicleStarting, "VehicleStarting"},
    {Longitudinal::kStop, "Stop"},
}};
constexpr NameTable<Maneuver, 5> kManeuverNames{{
    {Maneuver::kGoStraight, "GoStraight"},
    {Maneuver::kLaneChangeLeft, "LaneChangeLeft"},
    {Maneuver::kLaneChangeRight, "LaneChangeRight"},
    {Maneuver::kTurnLeft, "TurnLeft"},
    {Maneuver::kTurnRight, "TurnRight"},
}};
constexpr NameTable<Command, 3> kCommandNames{{
    {Command::kForward, "Forward"},
    {Command::kLeft, "Left"},
    {Command::kRight, "Right"},
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

void require_horizon(const TrajectorySample& traj) {
  if (traj.horizon() < kMinLabelHorizon) {
    throw DegenerateTrajectoryError("trajectory horizon " + std::to_string(traj.horizon()) +
                                    " s is shorter than " + std::to_string(kMinLabelHorizon) +
                                    " s");
  }
}

double read_threshold(const nlohmann::json& block, const char* key) {
  auto it = block.find(key);
  if (it == block.end()) {
    throw ConfigError(std::string("[labeler] missing required threshold '") + key + "'");
  }
  if (!it->is_number()) {
    throw ConfigError(std::string("[labeler] threshold '") + key + "' must be a number");
  }
  return it->get<double>();
}

}  // namespace

std::string_view to_string(SpeedState s) { return name_of(kSpeedNames, s); }
std::string_view to_string(Longitudinal l) { return name_of(kLongNames, l); }
std::string_view to_string(Maneuver m) { return name_of(kManeuverNames, m); }
std::string_view to_string(Command c) { return name_of(kCommandNames, c); }
std::optional<SpeedState> parse_speed_state(std::string_view s) { return value_of(kSpeedNames, s); }
std::optional<Longitudinal> parse_longitudinal(std::string_view s) {
  return value_of(kLongNames, s);
}
std::optional<Maneuver> parse_maneuver(std::string_view s) { return value_of(kManeuverNames, s); }
std::optional<Command> parse_command(std::string_view s) { return value_of(kCommandNames, s); }

void LabelerThresholds::validate() const {
  const double values[] = {crawl_speed, fast_speed, stop_speed, delta_speed, turn_angle};
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) {
      throw ConfigError("[labeler] thresholds must be finite and non-negative");
    }
  }
  if (crawl_speed >= fast_speed) {
    throw ConfigError("[labeler] crawl_speed must be below fast_speed");
  }
  if (turn_angle <= 0.0 || turn_angle >= kPi) {
    throw ConfigError("[labeler] turn_deg must lie in (0, 180)");
  }
}

LabelerThresholds LabelerThresholds::from_json(const nlohmann::json& block) {
  if (!block.is_object()) throw ConfigError("[labeler] block must be an object");
  LabelerThresholds t;
  t.crawl_speed = read_threshold(block, "crawl_speed");
  t.fast_speed = read_threshold(block, "fast_speed");
  t.stop_speed = read_threshold(block, "stop_speed");
  t.delta_speed = read_threshold(block, "delta_speed");
  t.turn_angle = deg_to_rad(read_threshold(block, "turn_deg"));
  t.validate();
  return t;
}

nlohmann::json LabelerThresholds::to_json() const {
  return {{"crawl_speed", crawl_speed},
          {"fast_speed", fast_speed},
          {"stop_speed", stop_speed},
          {"delta_speed", delta_speed},
          {"turn_deg", rad_to_deg(turn_angle)}};
}

TrajectorySample::TrajectorySample(std::vector<Waypoint> waypoints)
    : waypoints_(std::move(waypoints)) {
  if (waypoints_.size() < 2) {
    throw DegenerateTrajectoryError("trajectory needs at least two waypoints");
  }
  if (waypoints_.front().t < 0.0) {
    throw DegenerateTrajectoryError("trajectory times must start at or after 0");
  }
  for (std::size_t i = 1; i < waypoints_.size(); ++i) {
    if (!(waypoints_[i].t > waypoints_[i - 1].t)) {
      throw DegenerateTrajectoryError("trajectory times must be strictly increasing");
    }
  }
}

SpeedState classify_speed_state(double current_speed, const LabelerThresholds& thresholds) {
  if (thresholds.crawl_speed >= thresholds.fast_speed) {
    throw ConfigError("[labeler] crawl_speed must be below fast_speed");
  }
  if (current_speed < thresholds.crawl_speed) return SpeedState::kCrawling;
  if (current_speed < thresholds.fast_speed) return SpeedState::kModerateSpeed;
  return SpeedState::kMovingFast;
}

double terminal_speed(const TrajectorySample& traj) {
  const auto& wp = traj.waypoints();
  const double horizon = traj.horizon();
  const double window_start = std::max(wp.front().t, horizon - horizon / 3.0);
  double distance = 0.0;
  double duration = 0.0;
  for (std::size_t i = 1; i < wp.size(); ++i) {
    const double t0 = wp[i - 1].t;
    const double t1 = wp[i].t;
    const double overlap = std::min(t1, horizon) - std::max(t0, window_start);
    if (overlap <= 0.0) continue;
    const double speed = (wp[i].position - wp[i - 1].position).norm() / (t1 - t0);
    distance += speed * overlap;
    duration += overlap;
  }
  return duration > 0.0 ? distance / duration : 0.0;
}

Longitudinal label_longitudinal(double current_speed, const TrajectorySample& traj,
                                const LabelerThresholds& thresholds) {
  require_horizon(traj);
  const double v_end = terminal_speed(traj);
  if (v_end < thresholds.stop_speed) return Longitudinal::kStop;
  if (current_speed < thresholds.crawl_speed && v_end >= thresholds.crawl_speed) {
    return Longitudinal::kVehicleStarting;
  }
  if (v_end - current_speed > thresholds.delta_speed) return Longitudinal::kAccelerate;
  if (current_speed - v_end > thresholds.delta_speed) return Longitudinal::kDecelerate;
  return Longitudinal::kMaintainSpeed;
}

Maneuver label_maneuver(const TrajectorySample& traj, double lane_width,
                        const LabelerThresholds& thresholds) {
  require_horizon(traj);
  const Waypoint& first = traj.waypoints().front();
  const Waypoint& last = traj.waypoints().back();
  const double heading_change = wrap_angle(last.heading - first.heading);
  const Vec2 dir(std::cos(first.heading), std::sin(first.heading));
  const Vec2 d = last.position - first.position;
  const double lateral = dir.x() * d.y() - dir.y() * d.x();

  if (std::abs(heading_change) > thresholds.turn_angle) {
    return heading_change > 0.0 ? Maneuver::kTurnLeft : Maneuver::kTurnRight;
  }
  if (std::abs(lateral) > lane_width / 2.0) {
    return lateral > 0.0 ? Maneuver::kLaneChangeLeft : Maneuver::kLaneChangeRight;
  }
  return Maneuver::kGoStraight;
}

Maneuver label_maneuver(const TrajectorySample& traj, const LaneGraph& lanes,
                        const LabelerThresholds& thresholds) {
  return label_maneuver(traj, lanes.lane_width, thresholds);
}

Command command_for(Maneuver maneuver) {
  switch (maneuver) {
    case Maneuver::kTurnLeft:
    case Maneuver::kLaneChangeLeft:
      return Command::kLeft;
    case Maneuver::kTurnRight:
    case Maneuver::kLaneChangeRight:
      return Command::kRight;
    case Maneuver::kGoStraight:
      break;
  }
  return Command::kForward;
}

Command derive_command(const TrajectorySample& traj, const LabelerThresholds& thresholds,
                       double lane_width) {
  return command_for(label_maneuver(traj, lane_width, thresholds));
}

ActionLabel label_action(double current_speed, const TrajectorySample& traj,
                         const LaneGraph& lanes, const LabelerThresholds& thresholds) {
  ActionLabel label;
  label.speed_state = classify_speed_state(current_speed, thresholds);
  label.longitudinal = label_longitudinal(current_speed, traj, thresholds);
  label.maneuver = label_maneuver(traj, lanes, thresholds);
  label.command = command_for(label.maneuver);
  return label;
}

FutureTrajectory future_trajectory(const SceneRecord& scene, std::size_t index,
                                   double horizon_s, double extrapolation_step_s) {
  const auto& frames = scene.frames();
  const FrameRecord& now = frames.at(index);
  const RigidTransform to_ego = now.ego.pose();
  const double yaw_now = now.ego.world_yaw();

  std::vector<Waypoint> waypoints{{0.0, Vec2::Zero(), 0.0}};
  for (std::size_t j = index + 1; j < frames.size(); ++j) {
    const double t = static_cast<double>(frames[j].timestamp_us() - now.timestamp_us()) * 1e-6;
    if (t > horizon_s + 1e-9) break;
    const Vec3 p = to_ego.apply(frames[j].ego.world_position());
    waypoints.push_back({t, p.head<2>(), wrap_angle(frames[j].ego.world_yaw() - yaw_now)});
  }
  if (waypoints.back().t >= kMinLabelHorizon) {
    return {TrajectorySample(std::move(waypoints)), false};
  }

  // Constant turn rate and velocity from the current ego state.
  const double v = now.ego.speed;
  const double w = now.ego.yaw_rate;
  std::vector<Waypoint> extrapolated{{0.0, Vec2::Zero(), 0.0}};
  for (double t = extrapolation_step_s; t <= horizon_s + 1e-9; t += extrapolation_step_s) {
    Waypoint wp;
    wp.t = t;
    if (std::abs(w) < 1e-9) {
      wp.position = Vec2(v * t, 0.0);
      wp.heading = 0.0;
    } else {
      wp.position = Vec2(v / w * std::sin(w * t), v / w * (1.0 - std::cos(w * t)));
      wp.heading = wrap_angle(w * t);
    }
    extrapolated.push_back(wp);
  }
  return {TrajectorySample(std::move(extrapolated)), true};
}

}  // namespace vlaforge
