#include "orbitfit/registration/rigid_align.hpp"

#include "orbitfit/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace orbitfit {

namespace {

Vec3 mean_of(const Points& pts) {
  Vec3 m = Vec3::Zero();
  for (const auto& p : pts) m += p;
  return m / static_cast<double>(pts.size());
}

/// Singular values of the centered scatter, descending.
Vec3 spread(const Points& pts, const Vec3& mean) {
  Mat3 s = Mat3::Zero();
  for (const auto& p : pts) s += (p - mean) * (p - mean).transpose();
  Eigen::SelfAdjointEigenSolver<Mat3> eig(s, Eigen::EigenvaluesOnly);
  const Vec3 ev = eig.eigenvalues().cwiseMax(0.0);
  return {ev[2], ev[1], ev[0]};
}

void check_pairs(const Points& source, const Points& target) {
  if (source.size() != target.size()) {
    fail(ErrorKind::InvalidInput, "point pair lists differ in length");
  }
  if (source.size() < 3) {
    fail(ErrorKind::InsufficientLandmarks,
         "need at least 3 matched points, got " + std::to_string(source.size()));
  }
}

}  // namespace

RigidTransform fit_rigid(const Points& source, const Points& target) {
  check_pairs(source, target);
  const Vec3 cs = mean_of(source);
  const Vec3 ct = mean_of(target);
  for (const auto* pts : {&source, &target}) {
    const Vec3 s = spread(*pts, pts == &source ? cs : ct);
    if (!(s[0] > 0.0) || s[1] <= 1e-12 * s[0]) {
      fail(ErrorKind::DegenerateConfiguration, "points are collinear or coincident");
    }
  }

  Mat3 h = Mat3::Zero();
  for (std::size_t i = 0; i < source.size(); ++i) {
    h += (source[i] - cs) * (target[i] - ct).transpose();
  }
  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vec3 d = Vec3::Ones();
  if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0) d[2] = -1.0;
  Mat3 r = svd.matrixV() * d.asDiagonal() * svd.matrixU().transpose();
  if (!r.allFinite()) fail(ErrorKind::NumericFailure, "rigid fit produced non-finite rotation");
  // SVD output is orthonormal to ~1e-15; snap residual drift so the rotation invariant holds.
  if (rotation_defect(r) > 1e-12) r = nearest_rotation(r);
  return {r, ct - r * cs};
}

RigidTransform landmark_rigid_align(const LandmarkSet& source, const LandmarkSet& target) {
  const auto matched = match_landmarks(source, target);
  if (matched.source.size() < 3) {
    fail(ErrorKind::InsufficientLandmarks,
         "landmark alignment needs >= 3 shared labels, found " + std::to_string(matched.source.size()));
  }
  return fit_rigid(matched.source, matched.target);
}

AffineTransform fit_affine(const Points& source, const Points& target) {
  if (source.size() != target.size()) fail(ErrorKind::InvalidInput, "point pair lists differ in length");
  if (source.size() < 4) {
    fail(ErrorKind::DegenerateConfiguration,
         "affine fit needs >= 4 non-coplanar points, got " + std::to_string(source.size()));
  }
  const Vec3 cs = mean_of(source);
  const Vec3 ct = mean_of(target);
  Mat3 pp = Mat3::Zero();
  Mat3 qp = Mat3::Zero();
  for (std::size_t i = 0; i < source.size(); ++i) {
    const Vec3 p = source[i] - cs;
    pp += p * p.transpose();
    qp += (target[i] - ct) * p.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat3> eig(pp, Eigen::EigenvaluesOnly);
  const Vec3 ev = eig.eigenvalues();
  if (!(ev[2] > 0.0) || ev[0] <= 1e-10 * ev[2]) {
    fail(ErrorKind::DegenerateConfiguration, "affine least-squares system is singular (coplanar points)");
  }
  const Mat3 a = qp * pp.inverse();
  if (!a.allFinite()) fail(ErrorKind::NumericFailure, "affine fit produced non-finite matrix");
  if (a.determinant() <= 0.0) {
    fail(ErrorKind::ReflectionCollapse, "affine fit has non-positive determinant");
  }
  return {a, ct - a * cs};
}

}  // namespace orbitfit
