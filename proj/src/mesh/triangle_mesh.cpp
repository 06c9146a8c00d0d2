#include "orbitfit/mesh/triangle_mesh.hpp"

#include "orbitfit/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <string>
#include <unordered_map>

namespace orbitfit {

namespace {

constexpr double kMinTriangleArea = 1e-12;

double area_of(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

double corner_angle(const Vec3& at, const Vec3& p, const Vec3& q) {
  const Vec3 u = p - at;
  const Vec3 v = q - at;
  return std::atan2(u.cross(v).norm(), u.dot(v));
}

}  // namespace

TriangleMesh::TriangleMesh(Points vertices, std::vector<Triangle> triangles)
    : vertices_(std::move(vertices)) {
  for (const auto& v : vertices_) {
    if (!v.allFinite()) fail(ErrorKind::InvalidInput, "mesh vertex has non-finite coordinate");
  }
  triangles_.reserve(triangles.size());
  for (const auto& t : triangles) {
    for (auto idx : t) {
      if (idx >= vertices_.size()) {
        fail(ErrorKind::InvalidInput, "triangle index " + std::to_string(idx) +
                                          " out of range for " +
                                          std::to_string(vertices_.size()) + " vertices");
      }
    }
    if (area_of(vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]) <= kMinTriangleArea) {
      ++dropped_degenerate_;
      continue;
    }
    triangles_.push_back(t);
  }
  compute_normals();
}

void TriangleMesh::compute_normals() {
  normals_.assign(vertices_.size(), Vec3::Zero());
  for (const auto& t : triangles_) {
    const Vec3& a = vertices_[t[0]];
    const Vec3& b = vertices_[t[1]];
    const Vec3& c = vertices_[t[2]];
    const Vec3 n = (b - a).cross(c - a).normalized();
    normals_[t[0]] += corner_angle(a, b, c) * n;
    normals_[t[1]] += corner_angle(b, c, a) * n;
    normals_[t[2]] += corner_angle(c, a, b) * n;
  }
  for (auto& n : normals_) {
    const double len = n.norm();
    // Isolated vertices get an arbitrary but valid unit normal.
    n = len > 0.0 ? Vec3(n / len) : Vec3::UnitZ();
  }
}

Vec3 TriangleMesh::face_normal(std::size_t tri) const {
  const auto& t = triangles_[tri];
  return (vertices_[t[1]] - vertices_[t[0]]).cross(vertices_[t[2]] - vertices_[t[0]]).normalized();
}

double TriangleMesh::triangle_area(std::size_t tri) const {
  const auto& t = triangles_[tri];
  return area_of(vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]);
}

double TriangleMesh::surface_area() const {
  double total = 0.0;
  for (std::size_t i = 0; i < triangles_.size(); ++i) total += triangle_area(i);
  return total;
}

double TriangleMesh::signed_volume() const {
  double total = 0.0;
  for (const auto& t : triangles_) {
    total += vertices_[t[0]].dot(vertices_[t[1]].cross(vertices_[t[2]]));
  }
  return total / 6.0;
}

Vec3 TriangleMesh::centroid() const {
  Vec3 c = Vec3::Zero();
  for (const auto& v : vertices_) c += v;
  return vertices_.empty() ? c : Vec3(c / static_cast<double>(vertices_.size()));
}

bool TriangleMesh::is_watertight() const {
  if (triangles_.empty()) return false;
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> edge_use;
  for (const auto& t : triangles_) {
    for (int k = 0; k < 3; ++k) {
      auto a = t[k];
      auto b = t[(k + 1) % 3];
      if (a > b) std::swap(a, b);
      ++edge_use[{a, b}];
    }
  }
  return std::all_of(edge_use.begin(), edge_use.end(),
                     [](const auto& e) { return e.second == 2; });
}

TriangleMesh TriangleMesh::submesh(const std::vector<bool>& vertex_mask) const {
  if (vertex_mask.size() != vertices_.size()) {
    fail(ErrorKind::InvalidInput, "vertex mask length does not match vertex count");
  }
  std::vector<Triangle> kept;
  for (const auto& t : triangles_) {
    if (vertex_mask[t[0]] && vertex_mask[t[1]] && vertex_mask[t[2]]) kept.push_back(t);
  }
  return {vertices_, std::move(kept)};
}

TriangleMesh mesh_from_soup(const Points& soup, double weld_tolerance) {
  if (soup.size() % 3 != 0) fail(ErrorKind::InvalidInput, "triangle soup size not a multiple of 3");
  Points vertices;
  std::vector<Triangle> triangles;
  triangles.reserve(soup.size() / 3);

  std::vector<std::uint32_t> ids(soup.size());
  if (weld_tolerance <= 0.0) {
    struct BitsHash {
      std::size_t operator()(const std::array<std::uint64_t, 3>& k) const noexcept {
        std::size_t h = 1469598103934665603ull;
        for (auto w : k) h = (h ^ w) * 1099511628211ull;
        return h;
      }
    };
    std::unordered_map<std::array<std::uint64_t, 3>, std::uint32_t, BitsHash> seen;
    for (std::size_t i = 0; i < soup.size(); ++i) {
      const auto& p = soup[i];
      // +0.0 and -0.0 are the same coordinate.
      const std::array<std::uint64_t, 3> key{std::bit_cast<std::uint64_t>(p.x() + 0.0),
                                             std::bit_cast<std::uint64_t>(p.y() + 0.0),
                                             std::bit_cast<std::uint64_t>(p.z() + 0.0)};
      auto [it, inserted] = seen.try_emplace(key, static_cast<std::uint32_t>(vertices.size()));
      if (inserted) vertices.push_back(p);
      ids[i] = it->second;
    }
  } else {
    // Grid hashing with neighbour lookup; first vertex in input order wins.
    const double cell = weld_tolerance;
    using Key = std::array<long long, 3>;
    std::map<Key, std::vector<std::uint32_t>> grid;
    for (std::size_t i = 0; i < soup.size(); ++i) {
      const auto& p = soup[i];
      const Key k{static_cast<long long>(std::floor(p.x() / cell)),
                  static_cast<long long>(std::floor(p.y() / cell)),
                  static_cast<long long>(std::floor(p.z() / cell))};
      std::int64_t best = -1;
      double best_d = weld_tolerance;
      for (long long dx = -1; dx <= 1; ++dx)
        for (long long dy = -1; dy <= 1; ++dy)
          for (long long dz = -1; dz <= 1; ++dz) {
            auto it = grid.find({k[0] + dx, k[1] + dy, k[2] + dz});
            if (it == grid.end()) continue;
            for (auto cand : it->second) {
              const double d = (vertices[cand] - p).norm();
              if (d <= best_d && (best < 0 || d < best_d || cand < best)) {
                best = cand;
                best_d = d;
              }
            }
          }
      if (best < 0) {
        best = static_cast<std::int64_t>(vertices.size());
        vertices.push_back(p);
        grid[k].push_back(static_cast<std::uint32_t>(best));
      }
      ids[i] = static_cast<std::uint32_t>(best);
    }
  }
  for (std::size_t f = 0; f < soup.size() / 3; ++f) {
    triangles.push_back({ids[3 * f], ids[3 * f + 1], ids[3 * f + 2]});
  }
  return {std::move(vertices), std::move(triangles)};
}

TriangleMesh compact(const TriangleMesh& mesh) {
  constexpr auto kUnused = static_cast<std::uint32_t>(-1);
  std::vector<std::uint32_t> remap(mesh.vertex_count(), kUnused);
  Points vertices;
  std::vector<Triangle> triangles;
  triangles.reserve(mesh.triangle_count());
  for (const auto& t : mesh.triangles()) {
    Triangle out{};
    for (int k = 0; k < 3; ++k) {
      auto& slot = remap[t[k]];
      if (slot == kUnused) {
        slot = static_cast<std::uint32_t>(vertices.size());
        vertices.push_back(mesh.vertices()[t[k]]);
      }
      out[k] = slot;
    }
    triangles.push_back(out);
  }
  return {std::move(vertices), std::move(triangles)};
}

TriangleMesh mirror_mesh(const TriangleMesh& mesh, const MirrorPlane& plane) {
  // Axis-aligned planes reflect one coordinate as 2c - x, which is exact when c == 0.
  int axis = -1;
  for (int k = 0; k < 3; ++k) {
    if (std::abs(plane.normal()[k]) == 1.0) axis = k;
  }
  Points vertices;
  vertices.reserve(mesh.vertex_count());
  for (const auto& v : mesh.vertices()) {
    if (axis >= 0) {
      Vec3 r = v;
      r[axis] = 2.0 * plane.point()[axis] - v[axis];
      vertices.push_back(r);
    } else {
      vertices.push_back(plane.reflect(v));
    }
  }
  std::vector<Triangle> triangles;
  triangles.reserve(mesh.triangle_count());
  for (const auto& t : mesh.triangles()) triangles.push_back({t[0], t[2], t[1]});
  return {std::move(vertices), std::move(triangles)};
}

Points apply_transform(const Points& points, const RigidTransform& transform) {
  Points out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(transform.apply(p));
  return out;
}

Points apply_transform(const Points& points, const AffineTransform& transform) {
  Points out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(transform.apply(p));
  return out;
}

TriangleMesh apply_transform(const TriangleMesh& mesh, const RigidTransform& transform) {
  return {apply_transform(mesh.vertices(), transform), mesh.triangles()};
}

TriangleMesh apply_transform(const TriangleMesh& mesh, const AffineTransform& transform) {
  auto triangles = mesh.triangles();
  if (transform.linear().determinant() < 0.0) {
    for (auto& t : triangles) std::swap(t[1], t[2]);
  }
  return {apply_transform(mesh.vertices(), transform), std::move(triangles)};
}

}  // namespace orbitfit
