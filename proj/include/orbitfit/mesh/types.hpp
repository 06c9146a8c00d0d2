#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <span>
#include <vector>

namespace orbitfit {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Points = std::vector<Vec3>;

/// Proper rigid motion p' = R p + t. Construction checks that R is a rotation.
class RigidTransform {
 public:
  RigidTransform() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}
  RigidTransform(const Mat3& rotation, const Vec3& translation);

  static RigidTransform identity() { return {}; }
  static RigidTransform from_translation(const Vec3& t) { return {Mat3::Identity(), t}; }
  /// Rotation by angle (radians) about a unit axis through the origin.
  static RigidTransform from_axis_angle(const Vec3& axis, double angle);
  /// Accepts a homogeneous 4x4; throws RejectedTransform when not rigid within tol.
  static RigidTransform from_matrix(const Mat4& m, double tol = 1e-9);

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }
  Vec3 apply_vector(const Vec3& v) const { return rotation_ * v; }

  /// (a * b)(p) == a(b(p))
  friend RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) {
    RigidTransform out;
    out.rotation_ = a.rotation_ * b.rotation_;
    out.translation_ = a.rotation_ * b.translation_ + a.translation_;
    return out;
  }

  RigidTransform inverse() const;
  Mat4 matrix() const;

  bool operator==(const RigidTransform& other) const {
    return rotation_ == other.rotation_ && translation_ == other.translation_;
  }

 private:
  Mat3 rotation_;
  Vec3 translation_;
};

/// General invertible affine map p' = L p + t.
class AffineTransform {
 public:
  AffineTransform() : linear_(Mat3::Identity()), translation_(Vec3::Zero()) {}
  AffineTransform(const Mat3& linear, const Vec3& translation);
  explicit AffineTransform(const RigidTransform& rigid)
      : linear_(rigid.rotation()), translation_(rigid.translation()) {}

  static AffineTransform from_matrix(const Mat4& m);

  const Mat3& linear() const { return linear_; }
  const Vec3& translation() const { return translation_; }

  Vec3 apply(const Vec3& p) const { return linear_ * p + translation_; }

  friend AffineTransform operator*(const AffineTransform& a, const AffineTransform& b) {
    return {a.linear_ * b.linear_, a.linear_ * b.translation_ + a.translation_};
  }

  AffineTransform inverse() const;
  Mat4 matrix() const;

 private:
  Mat3 linear_;
  Vec3 translation_;
};

/// Plane through `point` with unit `normal`.
class MirrorPlane {
 public:
  MirrorPlane(const Vec3& point, const Vec3& normal);

  const Vec3& point() const { return point_; }
  const Vec3& normal() const { return normal_; }

  Vec3 reflect(const Vec3& p) const {
    return p - 2.0 * (p - point_).dot(normal_) * normal_;
  }

 private:
  Vec3 point_;
  Vec3 normal_;
};

/// Nearest proper rotation to `m` (polar decomposition via SVD).
Mat3 nearest_rotation(const Mat3& m);

/// Frobenius norm of R^T R - I plus |det R - 1|.
double rotation_defect(const Mat3& m);

}  // namespace orbitfit
