#pragma once

#include "orbitfit/mesh/types.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace orbitfit {

using Triangle = std::array<std::uint32_t, 3>;

/// Indexed triangle surface. Vertex normals are angle-weighted and recomputed
/// whenever the geometry is replaced, so a constructed mesh is always consistent.
class TriangleMesh {
 public:
  TriangleMesh() = default;
  /// Validates indices and drops triangles with area <= 1e-12 mm^2.
  /// The number of dropped triangles is available via dropped_degenerate().
  TriangleMesh(Points vertices, std::vector<Triangle> triangles);

  const Points& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const Points& vertex_normals() const { return normals_; }

  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t triangle_count() const { return triangles_.size(); }
  bool empty() const { return triangles_.empty(); }
  std::size_t dropped_degenerate() const { return dropped_degenerate_; }

  Vec3 face_normal(std::size_t tri) const;  // unit, right-hand winding
  double triangle_area(std::size_t tri) const;
  double surface_area() const;
  /// Signed enclosed volume (divergence theorem); positive for outward winding.
  double signed_volume() const;
  Vec3 centroid() const;  // mean of vertices

  /// Every undirected edge used by exactly two triangles.
  bool is_watertight() const;

  /// Triangles whose three vertices all satisfy mask; vertex indexing is kept.
  TriangleMesh submesh(const std::vector<bool>& vertex_mask) const;

 private:
  void compute_normals();

  Points vertices_;
  std::vector<Triangle> triangles_;
  Points normals_;
  std::size_t dropped_degenerate_ = 0;
};

/// Merge vertices that compare bitwise equal, or within `weld_tolerance` when > 0.
/// Input is a triangle soup (3 consecutive points per facet).
TriangleMesh mesh_from_soup(const Points& soup, double weld_tolerance = 0.0);

/// Remove vertices not referenced by any triangle, remapping indices.
TriangleMesh compact(const TriangleMesh& mesh);

TriangleMesh mirror_mesh(const TriangleMesh& mesh, const MirrorPlane& plane);

Points apply_transform(const Points& points, const RigidTransform& transform);
Points apply_transform(const Points& points, const AffineTransform& transform);
TriangleMesh apply_transform(const TriangleMesh& mesh, const RigidTransform& transform);
/// Reverses winding when det(L) < 0 so normals stay outward.
TriangleMesh apply_transform(const TriangleMesh& mesh, const AffineTransform& transform);

}  // namespace orbitfit
