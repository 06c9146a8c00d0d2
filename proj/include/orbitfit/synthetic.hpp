#pragma once

// Procedural geometry for tests, demos and the bundled sample case.

#include "orbitfit/mesh/landmarks.hpp"
#include "orbitfit/mesh/polyline.hpp"
#include "orbitfit/mesh/triangle_mesh.hpp"
#include "orbitfit/plate/plate_model.hpp"

#include <functional>
#include <map>
#include <string>

namespace orbitfit::synthetic {

using RadialFn = std::function<double(const Vec3& direction)>;
using HeightFn = std::function<double(double x, double y)>;

/// Closed star-shaped surface: vertex = center + r(d) d over a UV grid of
/// directions. Azimuths are symmetric about the x = 0 plane when `segments` is even.
/// Vertex count is 2 + (rings - 1) * segments.
TriangleMesh star_surface(const Vec3& center, const RadialFn& radius, int rings, int segments);

TriangleMesh uv_sphere(const Vec3& center, double radius, int rings, int segments);

/// Part of a sphere within `cap_angle` radians of +z, outward normals.
TriangleMesh sphere_cap(double radius, double cap_angle, int rings, int segments);

/// Open heightfield z = h(x, y) on a regular nx x ny grid, normals toward +z.
/// Vertex (i, j) has index j * nx + i.
TriangleMesh height_patch(const HeightFn& height, double x0, double x1, double y0, double y1, int nx, int ny);

/// Closed solid whose top is z = h(x, y) and bottom is the plane z = base.
TriangleMesh height_solid(const HeightFn& height, double base, double x0, double x1, double y0, double y1,
                          int nx, int ny);

/// Skull-like closed surface, mirror-symmetric about x = 0, radius ~`scale` mm.
/// `warp_mm` adds a smooth outward bulge on the x > 0 side only (max at +x).
TriangleMesh skull(double scale = 40.0, int rings = 41, int segments = 50, double warp_mm = 0.0);

/// Radius function used by skull().
double skull_radius(const Vec3& direction, double scale, double warp_mm);

/// Everything needed to describe one synthetic preformed plate.
struct PlateShape {
  std::string plate_id;
  std::string vendor;
  std::string size_class;
  double width = 24.0;     ///< medial-lateral extent (u)
  double length = 30.0;    ///< posterior-anterior extent (v)
  double floor_bend = 0.01;   ///< u^2 coefficient
  double arch = 0.004;        ///< posterior-anterior curvature
  double wall_rise = 0.08;    ///< medial wall coefficient
  double anterior_lift = 0.0; ///< lateral-anterior upturn
};

/// Plate geometry in its own frame: v = 0 is the posterior edge, stop point at (0, 0).
struct PlateGeometry {
  TriangleMesh mesh;
  std::vector<Landmark> landmarks;  ///< includes the "stop" point
  std::map<std::string, Polyline> curves;
};

double plate_height(const PlateShape& shape, double u, double v);
PlateGeometry make_plate(const PlateShape& shape, int nu = 25, int nv = 31);

/// make_plate moved into `frame` and wrapped as a validated PlateModel.
PlateModel plate_model(const PlateShape& shape, const RigidTransform& frame = RigidTransform::identity(),
                       int nu = 25, int nv = 31);

/// Reconstructed orbital floor/medial wall used by the sample case.
double orbit_height(double x, double y);

/// Posterior stop of the sample orbit.
Vec3 orbit_stop();

/// Bone top surface: orbit plus mild asymmetry and a blow-out crater.
double bone_height(double x, double y);

/// The four plates of the sample case (two vendors, two sizes).
std::vector<PlateShape> sample_plate_shapes();

/// Rigid map from the ideal (stop-anchored, orbit-aligned) pose to the frame
/// the plate file is stored in; differs per plate so landmark init has work to do.
RigidTransform vendor_frame(std::size_t plate_index);

}  // namespace orbitfit::synthetic
