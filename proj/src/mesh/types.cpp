#include "orbitfit/mesh/types.hpp"

#include "orbitfit/error.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <sstream>

namespace orbitfit {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "parse-error";
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::InsufficientLandmarks: return "insufficient-landmarks";
    case ErrorKind::DegenerateConfiguration: return "degenerate-configuration";
    case ErrorKind::RegistrationFailed: return "registration-failed";
    case ErrorKind::ReflectionCollapse: return "reflection-collapse";
    case ErrorKind::NumericFailure: return "numeric-failure";
    case ErrorKind::InvalidPlate: return "invalid-plate";
    case ErrorKind::MissingPivot: return "missing-pivot";
    case ErrorKind::MissingHistory: return "missing-history";
    case ErrorKind::RejectedTransform: return "rejected-transform";
    case ErrorKind::Migration: return "migration-error";
    case ErrorKind::Conflict: return "conflict";
    case ErrorKind::NotFound: return "not-found";
    case ErrorKind::Io: return "io-error";
  }
  return "unknown";
}

double rotation_defect(const Mat3& m) {
  return (m.transpose() * m - Mat3::Identity()).norm() + std::abs(m.determinant() - 1.0);
}

Mat3 nearest_rotation(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(2) *= -1.0;
  return u * v.transpose();
}

RigidTransform::RigidTransform(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  if (!rotation.allFinite() || !translation.allFinite()) {
    fail(ErrorKind::RejectedTransform, "rigid transform has non-finite entries");
  }
  if (rotation_defect(rotation) > 1e-9) {
    std::ostringstream os;
    os << "matrix is not a proper rotation (defect " << rotation_defect(rotation) << ")";
    fail(ErrorKind::RejectedTransform, os.str());
  }
}

RigidTransform RigidTransform::from_axis_angle(const Vec3& axis, double angle) {
  const double n = axis.norm();
  if (!(n > 0.0) || !std::isfinite(angle)) {
    fail(ErrorKind::InvalidInput, "rotation axis must be non-zero and angle finite");
  }
  return {Eigen::AngleAxisd(angle, axis / n).toRotationMatrix(), Vec3::Zero()};
}

RigidTransform RigidTransform::from_matrix(const Mat4& m, double tol) {
  if (!m.allFinite()) fail(ErrorKind::RejectedTransform, "transform has non-finite entries");
  if ((m.row(3) - Eigen::RowVector4d(0, 0, 0, 1)).norm() > tol) {
    fail(ErrorKind::RejectedTransform, "bottom row of homogeneous matrix must be 0 0 0 1");
  }
  const Mat3 r = m.topLeftCorner<3, 3>();
  const double defect = rotation_defect(r);
  if (defect > tol) {
    std::ostringstream os;
    os << "matrix is not rigid within " << tol << " (defect " << defect << ")";
    fail(ErrorKind::RejectedTransform, os.str());
  }
  RigidTransform out;
  out.rotation_ = r;
  out.translation_ = m.topRightCorner<3, 1>();
  return out;
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform out;
  out.rotation_ = rotation_.transpose();
  out.translation_ = -(out.rotation_ * translation_);
  return out;
}

Mat4 RigidTransform::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

AffineTransform::AffineTransform(const Mat3& linear, const Vec3& translation)
    : linear_(linear), translation_(translation) {
  if (!linear.allFinite() || !translation.allFinite()) {
    fail(ErrorKind::NumericFailure, "affine transform has non-finite entries");
  }
  if (std::abs(linear.determinant()) <= 1e-12) {
    fail(ErrorKind::DegenerateConfiguration, "affine linear part is singular");
  }
}

AffineTransform AffineTransform::from_matrix(const Mat4& m) {
  if ((m.row(3) - Eigen::RowVector4d(0, 0, 0, 1)).norm() > 1e-12) {
    fail(ErrorKind::InvalidInput, "bottom row of homogeneous matrix must be 0 0 0 1");
  }
  return {m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>()};
}

AffineTransform AffineTransform::inverse() const {
  const Mat3 inv = linear_.inverse();
  return {inv, -(inv * translation_)};
}

Mat4 AffineTransform::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = linear_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

MirrorPlane::MirrorPlane(const Vec3& point, const Vec3& normal) : point_(point) {
  const double n = normal.norm();
  if (!point.allFinite() || !(n > 0.0) || !std::isfinite(n)) {
    fail(ErrorKind::InvalidInput, "mirror plane needs a finite point and non-zero normal");
  }
  normal_ = normal / n;
}

}  // namespace orbitfit
