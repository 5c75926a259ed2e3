#include "vlaforge/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "vlaforge/errors.hpp"

namespace vlaforge {

double deg_to_rad(double deg) { return deg * kPi / 180.0; }
double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

double wrap_angle(double rad) {
  double wrapped = std::remainder(rad, 2.0 * kPi);
  if (wrapped <= -kPi) wrapped += 2.0 * kPi;
  return wrapped;
}

RigidTransform::RigidTransform()
    : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}

RigidTransform::RigidTransform(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  if (!rotation_.allFinite() || !translation_.allFinite()) {
    throw GeometryError("rigid transform has non-finite entries");
  }
  if (!is_proper_rotation(rotation_)) {
    std::ostringstream msg;
    msg << "rotation is not orthonormal with det +1 (|R^T R - I|max="
        << (rotation_.transpose() * rotation_ - Mat3::Identity()).cwiseAbs().maxCoeff()
        << ", det=" << rotation_.determinant() << ")";
    throw GeometryError(msg.str());
  }
}

RigidTransform RigidTransform::from_yaw(double yaw, const Vec3& translation) {
  Mat3 r = Mat3::Identity();
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  r(0, 0) = c;
  r(0, 1) = -s;
  r(1, 0) = s;
  r(1, 1) = c;
  return {r, translation};
}

RigidTransform RigidTransform::translation_only(const Vec3& translation) {
  return {Mat3::Identity(), translation};
}

bool RigidTransform::is_proper_rotation(const Mat3& rotation, double tol) {
  if (!rotation.allFinite()) return false;
  const double ortho_err =
      (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
  return ortho_err <= tol && std::abs(rotation.determinant() - 1.0) <= tol;
}

Vec2 RigidTransform::apply_xy(const Vec2& point) const {
  const Vec3 out = apply(Vec3(point.x(), point.y(), 0.0));
  return out.head<2>();
}

Vec2 RigidTransform::rotate_xy(const Vec2& v) const {
  const Vec3 out = rotation_ * Vec3(v.x(), v.y(), 0.0);
  return out.head<2>();
}

RigidTransform RigidTransform::compose(const RigidTransform& other) const {
  RigidTransform out;
  out.rotation_ = rotation_ * other.rotation_;
  out.translation_ = rotation_ * other.translation_ + translation_;
  return out;
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform out;
  out.rotation_ = rotation_.transpose();
  out.translation_ = -(out.rotation_ * translation_);
  return out;
}

double RigidTransform::yaw() const { return std::atan2(rotation_(1, 0), rotation_(0, 0)); }

Eigen::Matrix4d RigidTransform::homogeneous() const {
  Eigen::Matrix4d h = Eigen::Matrix4d::Identity();
  h.topLeftCorner<3, 3>() = rotation_;
  h.topRightCorner<3, 1>() = translation_;
  return h;
}

bool RigidTransform::approx_equal(const RigidTransform& other, double tol) const {
  return (rotation_ - other.rotation_).cwiseAbs().maxCoeff() <= tol &&
         (translation_ - other.translation_).cwiseAbs().maxCoeff() <= tol;
}

RigidTransform operator*(const RigidTransform& lhs, const RigidTransform& rhs) {
  return lhs.compose(rhs);
}

std::vector<Vec2> OrientedBox2D::corners() const {
  const Vec2 ax(std::cos(yaw), std::sin(yaw));
  const Vec2 ay(-ax.y(), ax.x());
  const Vec2 ex = ax * half_extents.x();
  const Vec2 ey = ay * half_extents.y();
  return {center + ex + ey, center - ex + ey, center - ex - ey, center + ex - ey};
}

bool OrientedBox2D::contains(const Vec2& point) const {
  const Vec2 d = point - center;
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  const double local_x = c * d.x() + s * d.y();
  const double local_y = -s * d.x() + c * d.y();
  return std::abs(local_x) <= half_extents.x() && std::abs(local_y) <= half_extents.y();
}

namespace {

// Projection radius of a box onto a unit axis.
double projected_radius(const OrientedBox2D& box, const Vec2& axis) {
  const Vec2 ax(std::cos(box.yaw), std::sin(box.yaw));
  const Vec2 ay(-ax.y(), ax.x());
  return box.half_extents.x() * std::abs(ax.dot(axis)) +
         box.half_extents.y() * std::abs(ay.dot(axis));
}

}  // namespace

bool boxes_overlap(const OrientedBox2D& a, const OrientedBox2D& b) {
  const std::array<Vec2, 4> axes = {
      Vec2(std::cos(a.yaw), std::sin(a.yaw)), Vec2(-std::sin(a.yaw), std::cos(a.yaw)),
      Vec2(std::cos(b.yaw), std::sin(b.yaw)), Vec2(-std::sin(b.yaw), std::cos(b.yaw))};
  const Vec2 delta = b.center - a.center;
  for (const Vec2& axis : axes) {
    const double distance = std::abs(delta.dot(axis));
    if (distance > projected_radius(a, axis) + projected_radius(b, axis)) {
      return false;
    }
  }
  return true;
}

bool point_in_polygon(const Vec2& point, std::span<const Vec2> polygon) {
  bool inside = false;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& pi = polygon[i];
    const Vec2& pj = polygon[j];
    if ((pi.y() > point.y()) != (pj.y() > point.y())) {
      const double x_cross =
          (pj.x() - pi.x()) * (point.y() - pi.y()) / (pj.y() - pi.y()) + pi.x();
      if (point.x() < x_cross) inside = !inside;
    }
  }
  return inside;
}

bool is_simple_polygon_candidate(std::span<const Vec2> polygon, double collinear_tol) {
  if (polygon.size() < 3) return false;
  const Vec2& origin = polygon[0];
  for (std::size_t i = 1; i < polygon.size(); ++i) {
    for (std::size_t j = i + 1; j < polygon.size(); ++j) {
      const Vec2 u = polygon[i] - origin;
      const Vec2 v = polygon[j] - origin;
      if (std::abs(u.x() * v.y() - u.y() * v.x()) > collinear_tol) return true;
    }
  }
  return false;
}

Vec2 polygon_centroid(std::span<const Vec2> polygon) {
  double area2 = 0.0;
  Vec2 acc = Vec2::Zero();
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& p = polygon[i];
    const Vec2& q = polygon[(i + 1) % n];
    const double cross = p.x() * q.y() - q.x() * p.y();
    area2 += cross;
    acc += (p + q) * cross;
  }
  if (std::abs(area2) < 1e-15) {
    Vec2 mean = Vec2::Zero();
    for (const auto& p : polygon) mean += p;
    return mean / static_cast<double>(std::max<std::size_t>(n, 1));
  }
  return acc / (3.0 * area2);
}

}  // namespace vlaforge
