#pragma once

// Reference computations for tests. They deliberately avoid the library's own
// query code paths: the point-triangle distance here solves the in-plane
// barycentric system directly and falls back to clamped edge projections.

#include "orbitfit/mesh/triangle_mesh.hpp"

#include <cstdint>
#include <limits>
#include <random>

namespace orbitfit::oracle {

inline Vec3 closest_on_segment(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return a + t * ab;
}

inline Vec3 closest_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 e0 = b - a;
  const Vec3 e1 = c - a;
  const Vec3 r = p - a;
  // Normal equations for p ~ a + s e0 + t e1.
  const double m00 = e0.dot(e0), m01 = e0.dot(e1), m11 = e1.dot(e1);
  const double r0 = r.dot(e0), r1 = r.dot(e1);
  const double det = m00 * m11 - m01 * m01;
  const double s = (m11 * r0 - m01 * r1) / det;
  const double t = (m00 * r1 - m01 * r0) / det;
  if (s >= 0.0 && t >= 0.0 && s + t <= 1.0) return a + s * e0 + t * e1;
  Vec3 best = closest_on_segment(p, a, b);
  for (const Vec3& q : {closest_on_segment(p, b, c), closest_on_segment(p, c, a)}) {
    if ((q - p).squaredNorm() < (best - p).squaredNorm()) best = q;
  }
  return best;
}

struct BruteHit {
  Vec3 point;
  std::size_t triangle = 0;
  double distance = std::numeric_limits<double>::infinity();
};

/// Exhaustive scan over every triangle.
inline BruteHit closest_brute_force(const TriangleMesh& mesh, const Vec3& p) {
  BruteHit best;
  const auto& v = mesh.vertices();
  for (std::size_t i = 0; i < mesh.triangle_count(); ++i) {
    const auto& t = mesh.triangles()[i];
    const Vec3 q = closest_on_triangle(p, v[t[0]], v[t[1]], v[t[2]]);
    const double d = (q - p).norm();
    if (d < best.distance) best = {q, i, d};
  }
  return best;
}

/// Signed distance via the same sign convention (interpolated vertex normal),
/// but with barycentrics recomputed from areas of the brute-force hit.
inline double signed_brute_force(const TriangleMesh& mesh, const Vec3& p) {
  const auto hit = closest_brute_force(mesh, p);
  if (hit.distance == 0.0) return 0.0;
  const auto& t = mesh.triangles()[hit.triangle];
  const auto& v = mesh.vertices();
  const double area = (v[t[1]] - v[t[0]]).cross(v[t[2]] - v[t[0]]).norm();
  const double wa = (v[t[1]] - hit.point).cross(v[t[2]] - hit.point).norm() / area;
  const double wb = (v[t[2]] - hit.point).cross(v[t[0]] - hit.point).norm() / area;
  const double wc = 1.0 - wa - wb;
  const auto& n = mesh.vertex_normals();
  const Vec3 normal = wa * n[t[0]] + wb * n[t[1]] + wc * n[t[2]];
  return (p - hit.point).dot(normal) < 0.0 ? -hit.distance : hit.distance;
}

inline Vec3 random_point(std::mt19937_64& rng, const Vec3& lo, const Vec3& hi) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return {lo.x() + u(rng) * (hi.x() - lo.x()), lo.y() + u(rng) * (hi.y() - lo.y()),
          lo.z() + u(rng) * (hi.z() - lo.z())};
}

inline Mat3 random_rotation(std::mt19937_64& rng, double max_angle) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, max_angle);
  Vec3 axis(g(rng), g(rng), g(rng));
  return Eigen::AngleAxisd(u(rng), axis.normalized()).toRotationMatrix();
}

inline double rotation_angle(const Mat3& r) {
  return std::acos(std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0));
}

}  // namespace orbitfit::oracle
