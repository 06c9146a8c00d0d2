#pragma once

#include "orbitfit/mesh/triangle_mesh.hpp"

#include <memory>
#include <vector>

namespace orbitfit {

struct ClosestPointResult {
  Vec3 point;
  std::uint32_t triangle_id = 0;
  /// Barycentric coordinates of `point` on the triangle (sum to 1).
  Vec3 barycentric;
  double distance = 0.0;
  /// +distance when the query is on the side the interpolated vertex normal
  /// points to (or exactly on the surface), -distance otherwise.
  double signed_distance = 0.0;
};

/// Closest point on a single triangle (a, b, c) to p, with barycentrics.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c,
                               Vec3* barycentric = nullptr);

/// Bounding-volume hierarchy over the triangles of one mesh. Immutable after
/// construction; queries may run concurrently. Holds a shared copy of the mesh.
class SpatialIndex {
 public:
  /// Throws InvalidInput for an empty mesh.
  explicit SpatialIndex(std::shared_ptr<const TriangleMesh> mesh);
  explicit SpatialIndex(TriangleMesh mesh)
      : SpatialIndex(std::make_shared<const TriangleMesh>(std::move(mesh))) {}

  const TriangleMesh& mesh() const { return *mesh_; }
  std::shared_ptr<const TriangleMesh> shared_mesh() const { return mesh_; }

  ClosestPointResult closest_point(const Vec3& query) const;
  std::vector<ClosestPointResult> closest_points(const Points& queries) const;

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t leaf_count() const;
  std::size_t max_depth() const;

 private:
  struct Node {
    Eigen::AlignedBox3d box;
    // Leaves: [first, first + count) into order_. Internal: children left/right.
    std::uint32_t first = 0;
    std::uint32_t count = 0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    bool leaf() const { return count > 0; }
  };

  std::uint32_t build(std::uint32_t first, std::uint32_t count, const std::vector<Vec3>& centroids);
  double signed_distance_at(const Vec3& query, const ClosestPointResult& hit) const;

  std::shared_ptr<const TriangleMesh> mesh_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace orbitfit
