#include "orbitfit/plate/fit.hpp"

#include "orbitfit/error.hpp"

#include <algorithm>
#include <cstdio>

namespace orbitfit {

std::string CollisionReport::percent_text() const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%lld.%02lld", static_cast<long long>(percent_hundredths / 100),
                static_cast<long long>(percent_hundredths % 100));
  return buf;
}

std::string CollisionReport::message() const {
  return "There are " + std::to_string(collision_count) + " collision points. This is approximately " +
         percent_text() + " % of points in the plate.";
}

CollisionReport make_collision_report(std::vector<std::uint32_t> ids, std::size_t total) {
  if (ids.size() > total) fail(ErrorKind::InvalidInput, "collision count exceeds point count");
  CollisionReport r;
  r.collision_count = ids.size();
  r.total_points = total;
  if (total > 0) {
    // round(100 * count / total, 2) in integer arithmetic, half up.
    const auto c = static_cast<std::int64_t>(ids.size());
    const auto n = static_cast<std::int64_t>(total);
    r.percent_hundredths = (c * 20000 + n) / (2 * n);
  }
  r.collision_points = std::move(ids);
  return r;
}

CollisionReport detect_collisions(const Points& placed_vertices, const SpatialIndex& bone, double penetration_tol) {
  const auto hits = bone.closest_points(placed_vertices);
  std::vector<std::uint32_t> ids;
  for (std::uint32_t i = 0; i < hits.size(); ++i) {
    if (hits[i].signed_distance < -penetration_tol) ids.push_back(i);
  }
  return make_collision_report(std::move(ids), placed_vertices.size());
}

std::vector<double> plate_wide_distances(const Points& placed_vertices, const SpatialIndex& orbit) {
  const auto hits = orbit.closest_points(placed_vertices);
  std::vector<double> out(hits.size());
  for (std::size_t i = 0; i < hits.size(); ++i) out[i] = hits[i].signed_distance;
  return out;
}

std::vector<EdgeReport> edge_distances(const PlateModel& plate, const RigidTransform& placement,
                                       const SpatialIndex& orbit, std::size_t samples_per_curve) {
  std::vector<EdgeReport> out;
  for (auto name : kCanonicalCurves) {
    const Polyline& curve = plate.curve(name);
    EdgeReport e;
    e.curve_name = curve.name();
    e.sample_points = resample_polyline(apply_transform(curve, placement), samples_per_curve).points();
    double sum = 0.0;
    for (const auto& p : e.sample_points) {
      const auto hit = orbit.closest_point(p);
      e.point_distances.push_back(hit.distance);
      e.projected_points.push_back(hit.point);
      sum += hit.distance;
    }
    e.mean = sum / static_cast<double>(e.point_distances.size());
    out.push_back(std::move(e));
  }
  return out;
}

double overall_edge_mean(const std::vector<EdgeReport>& edges) {
  std::vector<double> all;
  for (const auto& e : edges) all.insert(all.end(), e.point_distances.begin(), e.point_distances.end());
  if (all.empty()) return 0.0;
  std::sort(all.begin(), all.end());
  double sum = 0.0;
  for (double d : all) sum += d;
  return sum / static_cast<double>(all.size());
}

FitReport compute_fit(const PlateModel& plate, const RigidTransform& placement, const SpatialIndex& orbit,
                      const SpatialIndex& bone, const FitOptions& options) {
  FitReport r;
  r.plate_id = plate.plate_id;
  const Points placed = apply_transform(plate.mesh->vertices(), placement);
  r.plate_wide = plate_wide_distances(placed, orbit);
  r.edges = edge_distances(plate, placement, orbit, options.samples_per_curve);
  r.overall_edge_mean = overall_edge_mean(r.edges);
  r.collision = detect_collisions(placed, bone, options.penetration_tol);
  return r;
}

LiveSummary live_summary(const PlateModel& plate, const RigidTransform& placement, const SpatialIndex& orbit,
                         const SpatialIndex& bone, const FitOptions& options) {
  LiveSummary s;
  s.plate_id = plate.plate_id;
  s.collision = detect_collisions(apply_transform(plate.mesh->vertices(), placement), bone, options.penetration_tol);
  const auto edges = edge_distances(plate, placement, orbit, options.samples_per_curve);
  for (std::size_t i = 0; i < edges.size(); ++i) s.curve_means[i] = edges[i].mean;
  return s;
}

}  // namespace orbitfit
