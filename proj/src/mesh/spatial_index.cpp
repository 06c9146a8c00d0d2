#include "orbitfit/mesh/spatial_index.hpp"

#include "orbitfit/error.hpp"
#include "orbitfit/util/parallel.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace orbitfit {

namespace {

constexpr std::uint32_t kLeafSize = 4;

}  // namespace

// Voronoi-region walk (Ericson, Real-Time Collision Detection, 5.1.5).
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c,
                               Vec3* barycentric) {
  auto out = [&](double u, double v, double w) {
    if (barycentric) *barycentric = Vec3(u, v, w);
    return Vec3(u * a + v * b + w * c);
  };
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return out(1, 0, 0);

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return out(0, 1, 0);

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    return out(1 - v, v, 0);
  }

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return out(0, 0, 1);

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    return out(1 - w, 0, w);
  }

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return out(0, 1 - w, w);
  }

  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom;
  const double w = vc * denom;
  return out(1.0 - v - w, v, w);
}

SpatialIndex::SpatialIndex(std::shared_ptr<const TriangleMesh> mesh) : mesh_(std::move(mesh)) {
  if (!mesh_ || mesh_->empty()) fail(ErrorKind::InvalidInput, "cannot index an empty mesh");
  const auto& verts = mesh_->vertices();
  const auto& tris = mesh_->triangles();
  std::vector<Vec3> centroids(tris.size());
  for (std::size_t i = 0; i < tris.size(); ++i) {
    centroids[i] = (verts[tris[i][0]] + verts[tris[i][1]] + verts[tris[i][2]]) / 3.0;
  }
  order_.resize(tris.size());
  std::iota(order_.begin(), order_.end(), 0u);
  nodes_.reserve(2 * tris.size() / kLeafSize + 1);
  build(0, static_cast<std::uint32_t>(tris.size()), centroids);
}

std::uint32_t SpatialIndex::build(std::uint32_t first, std::uint32_t count,
                                  const std::vector<Vec3>& centroids) {
  const auto& verts = mesh_->vertices();
  const auto& tris = mesh_->triangles();
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();

  Eigen::AlignedBox3d box;
  Eigen::AlignedBox3d centroid_box;
  for (std::uint32_t i = first; i < first + count; ++i) {
    for (auto v : tris[order_[i]]) box.extend(verts[v]);
    centroid_box.extend(centroids[order_[i]]);
  }
  nodes_[id].box = box;

  if (count <= kLeafSize) {
    nodes_[id].first = first;
    nodes_[id].count = count;
    return id;
  }

  int axis = 0;
  centroid_box.sizes().maxCoeff(&axis);
  auto begin = order_.begin() + first;
  std::sort(begin, begin + count, [&](std::uint32_t a, std::uint32_t b) {
    const double ca = centroids[a][axis];
    const double cb = centroids[b][axis];
    return ca < cb || (ca == cb && a < b);
  });
  const std::uint32_t half = count / 2;
  const auto left = build(first, half, centroids);
  const auto right = build(first + half, count - half, centroids);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

ClosestPointResult SpatialIndex::closest_point(const Vec3& query) const {
  const auto& verts = mesh_->vertices();
  const auto& tris = mesh_->triangles();

  ClosestPointResult best;
  double best_d2 = std::numeric_limits<double>::infinity();
  bool found = false;

  std::uint32_t stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (node.box.squaredExteriorDistance(query) > best_d2) continue;
    if (node.leaf()) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
        const std::uint32_t t = order_[i];
        Vec3 bary;
        const Vec3 p = closest_point_on_triangle(query, verts[tris[t][0]], verts[tris[t][1]],
                                                 verts[tris[t][2]], &bary);
        const double d2 = (query - p).squaredNorm();
        if (!found || d2 < best_d2 || (d2 == best_d2 && t < best.triangle_id)) {
          found = true;
          best_d2 = d2;
          best.point = p;
          best.triangle_id = t;
          best.barycentric = bary;
        }
      }
      continue;
    }
    const double dl = nodes_[node.left].box.squaredExteriorDistance(query);
    const double dr = nodes_[node.right].box.squaredExteriorDistance(query);
    // Visit the nearer child first: push it last.
    if (dl <= dr) {
      stack[top++] = node.right;
      stack[top++] = node.left;
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
  best.distance = std::sqrt(best_d2);
  best.signed_distance = signed_distance_at(query, best);
  return best;
}

double SpatialIndex::signed_distance_at(const Vec3& query, const ClosestPointResult& hit) const {
  if (hit.distance == 0.0) return 0.0;
  const auto& tri = mesh_->triangles()[hit.triangle_id];
  const auto& normals = mesh_->vertex_normals();
  const Vec3 n = hit.barycentric[0] * normals[tri[0]] + hit.barycentric[1] * normals[tri[1]] +
                 hit.barycentric[2] * normals[tri[2]];
  return (query - hit.point).dot(n) < 0.0 ? -hit.distance : hit.distance;
}

std::vector<ClosestPointResult> SpatialIndex::closest_points(const Points& queries) const {
  std::vector<ClosestPointResult> out(queries.size());
  util::parallel_for(queries.size(), [&](std::size_t i) { out[i] = closest_point(queries[i]); });
  return out;
}

std::size_t SpatialIndex::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.leaf(); }));
}

std::size_t SpatialIndex::max_depth() const {
  std::size_t depth = 0;
  std::vector<std::pair<std::uint32_t, std::size_t>> stack{{0, 1}};
  while (!stack.empty()) {
    auto [id, d] = stack.back();
    stack.pop_back();
    depth = std::max(depth, d);
    if (!nodes_[id].leaf()) {
      stack.push_back({nodes_[id].left, d + 1});
      stack.push_back({nodes_[id].right, d + 1});
    }
  }
  return depth;
}

}  // namespace orbitfit
