#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace vlaforge {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kOrthonormalTolerance = 1e-9;
inline constexpr double kPi = 3.14159265358979323846;

double deg_to_rad(double deg);
double rad_to_deg(double rad);

// Wraps an angle to (-pi, pi].
double wrap_angle(double rad);

// A proper rigid motion x -> R x + t. Construction validates that R is
// orthonormal with determinant +1 (within kOrthonormalTolerance).
class RigidTransform {
 public:
  RigidTransform();
  RigidTransform(const Mat3& rotation, const Vec3& translation);

  static RigidTransform identity() { return {}; }
  static RigidTransform from_yaw(double yaw, const Vec3& translation = Vec3::Zero());
  static RigidTransform translation_only(const Vec3& translation);

  // Returns true when R is orthonormal with det +1 within tol.
  static bool is_proper_rotation(const Mat3& rotation,
                                 double tol = kOrthonormalTolerance);

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Vec3 apply(const Vec3& point) const { return rotation_ * point + translation_; }
  Vec2 apply_xy(const Vec2& point) const;
  Vec2 rotate_xy(const Vec2& v) const;

  // (*this) * other, i.e. apply `other` first.
  RigidTransform compose(const RigidTransform& other) const;
  RigidTransform inverse() const;

  // Heading of the transformed +x axis in the xy plane.
  double yaw() const;

  Eigen::Matrix4d homogeneous() const;

  bool approx_equal(const RigidTransform& other, double tol) const;

 private:
  Mat3 rotation_;
  Vec3 translation_;
};

RigidTransform operator*(const RigidTransform& lhs, const RigidTransform& rhs);

struct OrientedBox2D {
  Vec2 center = Vec2::Zero();
  Vec2 half_extents = Vec2::Ones();  // along local x (length) and y (width)
  double yaw = 0.0;

  // Corners in counter-clockwise order.
  std::vector<Vec2> corners() const;
  bool contains(const Vec2& point) const;
};

// Separating-axis test. Boxes that touch along an edge count as overlapping.
bool boxes_overlap(const OrientedBox2D& a, const OrientedBox2D& b);

using Polygon2D = std::vector<Vec2>;

// Even-odd (crossing number) rule. Points exactly on an edge may land on
// either side.
bool point_in_polygon(const Vec2& point, std::span<const Vec2> polygon);

// True when the ring has >= 3 vertices and they are not all collinear.
bool is_simple_polygon_candidate(std::span<const Vec2> polygon,
                                 double collinear_tol = 1e-12);

Vec2 polygon_centroid(std::span<const Vec2> polygon);

}  // namespace vlaforge
