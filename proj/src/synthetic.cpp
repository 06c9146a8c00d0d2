#include "orbitfit/synthetic.hpp"

#include "orbitfit/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace orbitfit::synthetic {

namespace {

constexpr double kPi = std::numbers::pi;

double smooth_side(double u) { return 0.5 + 0.5 * std::tanh(u / 3.0); }

double ramp2(double t) { return t > 0.0 ? t * t : 0.0; }

}  // namespace

TriangleMesh star_surface(const Vec3& center, const RadialFn& radius, int rings, int segments) {
  if (rings < 2 || segments < 3) fail(ErrorKind::InvalidInput, "star_surface needs rings >= 2, segments >= 3");
  Points v;
  std::vector<Triangle> t;
  auto push_dir = [&](const Vec3& d) { v.push_back(center + radius(d) * d); };
  push_dir(Vec3::UnitZ());
  for (int i = 1; i < rings; ++i) {
    const double theta = kPi * i / rings;
    for (int j = 0; j < segments; ++j) {
      const double phi = 2.0 * kPi * j / segments;
      push_dir(Vec3(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)));
    }
  }
  push_dir(-Vec3::UnitZ());
  const auto south = static_cast<std::uint32_t>(v.size() - 1);
  auto ring_vertex = [&](int i, int j) {
    return static_cast<std::uint32_t>(1 + (i - 1) * segments + ((j % segments) + segments) % segments);
  };
  for (int j = 0; j < segments; ++j) t.push_back({0, ring_vertex(1, j), ring_vertex(1, j + 1)});
  for (int i = 1; i + 1 < rings; ++i) {
    for (int j = 0; j < segments; ++j) {
      const auto a = ring_vertex(i, j), b = ring_vertex(i, j + 1);
      const auto c = ring_vertex(i + 1, j), d = ring_vertex(i + 1, j + 1);
      t.push_back({a, c, d});
      t.push_back({a, d, b});
    }
  }
  for (int j = 0; j < segments; ++j) t.push_back({ring_vertex(rings - 1, j), south, ring_vertex(rings - 1, j + 1)});
  return {std::move(v), std::move(t)};
}

TriangleMesh uv_sphere(const Vec3& center, double radius, int rings, int segments) {
  return star_surface(center, [radius](const Vec3&) { return radius; }, rings, segments);
}

TriangleMesh sphere_cap(double radius, double cap_angle, int rings, int segments) {
  Points v;
  std::vector<Triangle> t;
  v.push_back(radius * Vec3::UnitZ());
  for (int i = 1; i <= rings; ++i) {
    const double theta = cap_angle * i / rings;
    for (int j = 0; j < segments; ++j) {
      const double phi = 2.0 * kPi * j / segments;
      v.push_back(radius * Vec3(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)));
    }
  }
  auto rv = [&](int i, int j) { return static_cast<std::uint32_t>(1 + (i - 1) * segments + (j % segments)); };
  for (int j = 0; j < segments; ++j) t.push_back({0, rv(1, j), rv(1, j + 1)});
  for (int i = 1; i < rings; ++i) {
    for (int j = 0; j < segments; ++j) {
      t.push_back({rv(i, j), rv(i + 1, j), rv(i + 1, j + 1)});
      t.push_back({rv(i, j), rv(i + 1, j + 1), rv(i, j + 1)});
    }
  }
  return {std::move(v), std::move(t)};
}

TriangleMesh height_patch(const HeightFn& height, double x0, double x1, double y0, double y1, int nx, int ny) {
  if (nx < 2 || ny < 2) fail(ErrorKind::InvalidInput, "height_patch needs at least 2x2 samples");
  Points v;
  v.reserve(static_cast<std::size_t>(nx * ny));
  for (int j = 0; j < ny; ++j) {
    const double y = y0 + (y1 - y0) * j / (ny - 1);
    for (int i = 0; i < nx; ++i) {
      const double x = x0 + (x1 - x0) * i / (nx - 1);
      v.emplace_back(x, y, height(x, y));
    }
  }
  std::vector<Triangle> t;
  auto id = [nx](int i, int j) { return static_cast<std::uint32_t>(j * nx + i); };
  for (int j = 0; j + 1 < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) {
      t.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      t.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return {std::move(v), std::move(t)};
}

TriangleMesh height_solid(const HeightFn& height, double base, double x0, double x1, double y0, double y1,
                          int nx, int ny) {
  const TriangleMesh top = height_patch(height, x0, x1, y0, y1, nx, ny);
  Points v = top.vertices();
  std::vector<Triangle> t = top.triangles();
  const auto offset = static_cast<std::uint32_t>(v.size());
  for (std::size_t k = 0; k < offset; ++k) v.emplace_back(top.vertices()[k].x(), top.vertices()[k].y(), base);
  for (const auto& tri : top.triangles()) t.push_back({tri[0] + offset, tri[2] + offset, tri[1] + offset});

  // Boundary loop, counter-clockwise seen from +z.
  std::vector<std::uint32_t> loop;
  auto id = [nx](int i, int j) { return static_cast<std::uint32_t>(j * nx + i); };
  for (int i = 0; i < nx - 1; ++i) loop.push_back(id(i, 0));
  for (int j = 0; j < ny - 1; ++j) loop.push_back(id(nx - 1, j));
  for (int i = nx - 1; i > 0; --i) loop.push_back(id(i, ny - 1));
  for (int j = ny - 1; j > 0; --j) loop.push_back(id(0, j));
  for (std::size_t k = 0; k < loop.size(); ++k) {
    const auto a = loop[k];
    const auto b = loop[(k + 1) % loop.size()];
    t.push_back({a, a + offset, b + offset});
    t.push_back({a, b + offset, b});
  }
  return {std::move(v), std::move(t)};
}

double skull_radius(const Vec3& d, double scale, double warp_mm) {
  // Even in d.x(), so the surface is mirror-symmetric about x = 0.
  const double shape = 1.0 + 0.10 * d.x() * d.x() + 0.08 * d.y() * d.z() + 0.06 * d.z() * d.z() * d.z() +
                       0.05 * std::sin(3.0 * d.y()) + 0.04 * d.y() * d.y() * d.y();
  return scale * shape + warp_mm * ramp2(d.x());
}

TriangleMesh skull(double scale, int rings, int segments, double warp_mm) {
  return star_surface(Vec3::Zero(), [=](const Vec3& d) { return skull_radius(d, scale, warp_mm); }, rings,
                      segments);
}

double plate_height(const PlateShape& s, double u, double v) {
  constexpr double c = 14.0;
  return s.floor_bend * u * u + s.arch * ((v - c) * (v - c) - c * c) + s.wall_rise * ramp2(-u - 4.0) +
         s.anterior_lift * ramp2(v - (s.length - 8.0)) * smooth_side(u);
}

PlateGeometry make_plate(const PlateShape& shape, int nu, int nv) {
  const double hw = shape.width / 2.0;
  const double len = shape.length;
  PlateGeometry g;
  g.mesh = height_patch([&](double u, double v) { return plate_height(shape, u, v); }, -hw, hw, 0.0, len, nu, nv);
  auto on_plate = [&](double u, double v) { return Vec3(u, v, plate_height(shape, u, v)); };
  g.landmarks = {{"stop", on_plate(0.0, 0.0)},
                 {"medial_anterior", on_plate(-hw + 2.0, len - 2.0)},
                 {"lateral_anterior", on_plate(hw - 2.0, len - 2.0)},
                 {"lateral_posterior", on_plate(hw - 3.0, 4.0)}};

  auto curve = [&](const std::string& name, double u0, double v0, double u1, double v1) {
    Points pts;
    constexpr int kControl = 7;
    for (int k = 0; k < kControl; ++k) {
      const double s = static_cast<double>(k) / (kControl - 1);
      pts.push_back(on_plate(u0 + s * (u1 - u0), v0 + s * (v1 - v0)));
    }
    g.curves.emplace(name, Polyline(name, std::move(pts)));
  };
  curve("anterior_floor", 0.0, len - 1.0, hw - 1.0, len - 1.0);
  curve("anterior_medial_wall", -hw + 1.0, len - 1.0, -1.0, len - 1.0);
  curve("lateral_floor", hw - 1.0, 2.0, hw - 1.0, len - 2.0);
  curve("superior_medial_wall", -hw + 1.0, 2.0, -hw + 1.0, len - 2.0);
  curve("floor_wall_junction", -hw / 2.0, 2.0, -hw / 2.0, len - 2.0);
  return g;
}

PlateModel plate_model(const PlateShape& shape, const RigidTransform& frame, int nu, int nv) {
  const PlateGeometry g = make_plate(shape, nu, nv);
  std::vector<Landmark> lms;
  for (const auto& lm : g.landmarks) lms.push_back({lm.label, frame.apply(lm.position)});
  std::vector<Polyline> curves;
  for (const auto& [name, c] : g.curves) curves.push_back(apply_transform(c, frame));
  return make_plate_model(shape.plate_id, shape.vendor, shape.size_class, apply_transform(g.mesh, frame),
                          LandmarkSet(lms), "stop", std::move(curves));
}

double orbit_height(double x, double y) {
  // The ideal pose maps plate (u, v) to (x, y) = (u, v + 2).
  const double v = y - 2.0;
  constexpr double c = 14.0;
  return 10.0 + 0.011 * x * x + 0.0045 * ((v - c) * (v - c) - c * c) + 0.075 * ramp2(-x - 4.0) +
         0.02 * ramp2(v - 22.0) * smooth_side(x);
}

Vec3 orbit_stop() { return {0.0, 2.0, orbit_height(0.0, 2.0)}; }

double bone_height(double x, double y) {
  const double crater = 4.0 * std::exp(-((x - 2.0) * (x - 2.0) + (y - 16.0) * (y - 16.0)) / (2.0 * 4.5 * 4.5));
  return orbit_height(x, y) + 0.25 * std::sin(x / 3.0) * std::cos(y / 4.0) - 0.3 - crater;
}

std::vector<PlateShape> sample_plate_shapes() {
  return {
      {"vendorA_small", "A", "small", 22.0, 26.0, 0.011, 0.0040, 0.065, 0.000},
      {"vendorA_large", "A", "large", 28.0, 32.0, 0.008, 0.0020, 0.050, 0.000},
      {"vendorB_small", "B", "small", 22.0, 26.0, 0.013, 0.0070, 0.090, 0.030},
      {"vendorB_large", "B", "large", 28.0, 32.0, 0.011, 0.0060, 0.085, 0.020},
  };
}

RigidTransform vendor_frame(std::size_t plate_index) {
  const double k = static_cast<double>(plate_index);
  const auto rot = RigidTransform::from_axis_angle(Vec3(0.3 + k, 1.0, 0.5 - 0.2 * k), 0.6 + 0.25 * k);
  return RigidTransform::from_translation(Vec3(40.0 + 5.0 * k, -25.0, 15.0 - 3.0 * k)) * rot;
}

}  // namespace orbitfit::synthetic
