#include "vlaforge/plan_metrics.hpp"

#include <cmath>
#include <optional>

#include "vlaforge/errors.hpp"

namespace vlaforge {

PlanPrediction PlanPrediction::from_json(const nlohmann::json& j) {
  PlanPrediction p;
  try {
    p.sample_id = j.at("sample_id").get<std::string>();
    for (const auto& w : j.at("waypoints")) {
      if (!w.is_array() || w.size() != 3) {
        throw SchemaError("sample '" + p.sample_id + "': waypoints must be [t, x, y]");
      }
      TimedPoint tp{w[0].get<double>(), Vec2(w[1].get<double>(), w[2].get<double>())};
      if (!std::isfinite(tp.t) || !tp.position.allFinite()) {
        throw SchemaError("sample '" + p.sample_id + "': non-finite waypoint");
      }
      p.waypoints.push_back(tp);
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed prediction: ") + e.what());
  }
  return p;
}

nlohmann::json PlanPrediction::to_json() const {
  nlohmann::json w = nlohmann::json::array();
  for (const auto& p : waypoints) w.push_back({p.t, p.position.x(), p.position.y()});
  return {{"sample_id", sample_id}, {"waypoints", w}};
}

namespace {

std::optional<std::size_t> grid_index(const PlanPrediction& p, double t) {
  for (std::size_t i = 0; i < p.waypoints.size(); ++i) {
    if (std::abs(p.waypoints[i].t - t) <= kGridTolerance) return i;
  }
  return std::nullopt;
}

std::size_t require_grid(const PlanPrediction& p, double t) {
  auto i = grid_index(p, t);
  if (!i) {
    throw GridMismatchError("sample '" + p.sample_id + "' has no waypoint at t = " +
                            std::to_string(t) + " s");
  }
  return *i;
}

void require_batch(std::size_t n) {
  if (n == 0) throw EmptyBatchError("empty prediction batch");
}

}  // namespace

HorizonValues l2_at_horizons(const PlanPrediction& pred, const PlanPrediction& gt) {
  HorizonValues out;
  for (std::size_t h = 0; h < kReportHorizons.size(); ++h) {
    const auto& a = pred.waypoints[require_grid(pred, kReportHorizons[h])].position;
    const auto& b = gt.waypoints[require_grid(gt, kReportHorizons[h])].position;
    out.at[h] = (a - b).norm();
  }
  return out;
}

HorizonValues l2_batch(const std::vector<PlanPrediction>& preds,
                       const std::vector<PlanPrediction>& gts) {
  require_batch(preds.size());
  if (preds.size() != gts.size()) {
    throw GridMismatchError("prediction and ground-truth batches differ in size");
  }
  HorizonValues sum;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i].sample_id != gts[i].sample_id) {
      throw GridMismatchError("sample '" + preds[i].sample_id + "' paired with '" +
                              gts[i].sample_id + "'");
    }
    const auto v = l2_at_horizons(preds[i], gts[i]);
    for (std::size_t h = 0; h < 3; ++h) sum.at[h] += v.at[h];
  }
  for (double& v : sum.at) v /= static_cast<double>(preds.size());
  return sum;
}

std::vector<double> waypoint_headings(const PlanPrediction& pred) {
  const auto& w = pred.waypoints;
  std::vector<double> out(w.size(), 0.0);
  double previous = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const Vec2 before = i == 0 ? Vec2::Zero() : w[i - 1].position;
    const Vec2 after = i + 1 < w.size() ? w[i + 1].position : w[i].position;
    const Vec2 d = after - before;
    if (d.norm() > 1e-9) previous = std::atan2(d.y(), d.x());
    out[i] = previous;
  }
  return out;
}

OrientedBox2D ego_box(const Vec2& position, double heading, const EgoDims& dims) {
  return OrientedBox2D{position, Vec2(dims.length / 2.0, dims.width / 2.0), heading};
}

namespace {

const TimedBoxes* nearest_frame(const std::vector<TimedBoxes>& frames, double t,
                                const std::string& sample_id) {
  const TimedBoxes* best = nullptr;
  for (const auto& f : frames) {
    if (best == nullptr || std::abs(f.t - t) < std::abs(best->t - t)) best = &f;
  }
  if (best == nullptr || std::abs(best->t - t) > kFrameMatchTolerance) {
    throw GridMismatchError("sample '" + sample_id + "': no object frame within 0.25 s of t = " +
                            std::to_string(t) + " s");
  }
  return best;
}

// Earliest grid time with a collision, if any.
std::optional<double> first_collision(const PlanPrediction& pred,
                                      const std::vector<TimedBoxes>& frames, double horizon,
                                      const EgoDims& dims) {
  if (frames.empty()) return std::nullopt;
  const auto headings = waypoint_headings(pred);
  for (std::size_t i = 0; i < pred.waypoints.size(); ++i) {
    const auto& wp = pred.waypoints[i];
    if (wp.t > horizon + kGridTolerance) continue;
    const TimedBoxes* f = nearest_frame(frames, wp.t, pred.sample_id);
    const OrientedBox2D ego = ego_box(wp.position, headings[i], dims);
    for (const auto& box : f->boxes) {
      if (boxes_overlap(ego, box)) return wp.t;
    }
  }
  return std::nullopt;
}

}  // namespace

bool sample_collides(const PlanPrediction& pred, const std::vector<TimedBoxes>& frames,
                     double horizon, const EgoDims& dims) {
  return first_collision(pred, frames, horizon, dims).has_value();
}

HorizonValues collision_rate(const std::vector<PlanPrediction>& preds,
                             const std::vector<std::vector<TimedBoxes>>& frames,
                             const EgoDims& dims) {
  require_batch(preds.size());
  if (frames.size() != preds.size()) {
    throw GridMismatchError("collision batch: one object-frame list per prediction required");
  }
  HorizonValues out;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    for (double h : kReportHorizons) require_grid(preds[i], h);
    const auto hit = first_collision(preds[i], frames[i], kReportHorizons.back(), dims);
    for (std::size_t h = 0; h < 3; ++h) {
      if (hit && *hit <= kReportHorizons[h] + kGridTolerance) out.at[h] += 1.0;
    }
  }
  for (double& v : out.at) v = 100.0 * v / static_cast<double>(preds.size());
  return out;
}

HorizonValues intersection_rate(const std::vector<PlanPrediction>& preds,
                                const std::vector<std::vector<Polygon2D>>& drivable) {
  require_batch(preds.size());
  if (drivable.size() != preds.size()) {
    throw GridMismatchError("intersection batch: one polygon set per prediction required");
  }
  HorizonValues out;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    for (const auto& poly : drivable[i]) {
      if (poly.size() < 3) {
        throw DegenerateGeometryError("sample '" + preds[i].sample_id +
                                      "': drivable polygon with fewer than 3 vertices");
      }
    }
    for (double h : kReportHorizons) require_grid(preds[i], h);
    std::optional<double> first_out;
    for (const auto& wp : preds[i].waypoints) {
      if (wp.t > kReportHorizons.back() + kGridTolerance) continue;
      bool inside = false;
      for (const auto& poly : drivable[i]) {
        if (point_in_polygon(wp.position, poly)) {
          inside = true;
          break;
        }
      }
      if (!inside && (!first_out || wp.t < *first_out)) first_out = wp.t;
    }
    for (std::size_t h = 0; h < 3; ++h) {
      if (first_out && *first_out <= kReportHorizons[h] + kGridTolerance) out.at[h] += 1.0;
    }
  }
  for (double& v : out.at) v = 100.0 * v / static_cast<double>(preds.size());
  return out;
}

}  // namespace vlaforge
