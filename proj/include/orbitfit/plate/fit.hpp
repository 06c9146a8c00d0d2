#pragma once

#include "orbitfit/mesh/spatial_index.hpp"
#include "orbitfit/plate/plate_model.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace orbitfit {

struct CollisionReport {
  std::size_t collision_count = 0;
  std::size_t total_points = 0;
  /// Percent in hundredths, rounded half up: 988 of 10000 -> 988 (9.88 %).
  std::int64_t percent_hundredths = 0;
  std::vector<std::uint32_t> collision_points;
  std::string sampling_basis = "vertices";

  double percent() const { return static_cast<double>(percent_hundredths) / 100.0; }
  /// Two-decimal text, e.g. "9.88".
  std::string percent_text() const;
  /// "There are 988 collision points. This is approximately 9.88 % of points in the plate."
  std::string message() const;

  bool operator==(const CollisionReport&) const = default;
};

CollisionReport make_collision_report(std::vector<std::uint32_t> ids, std::size_t total);

/// Vertices whose signed distance to the bone is below -penetration_tol.
CollisionReport detect_collisions(const Points& placed_vertices, const SpatialIndex& bone,
                                  double penetration_tol = 0.0);

/// Signed distance of every placed plate vertex to the orbit; negative is
/// beneath the orbit surface.
std::vector<double> plate_wide_distances(const Points& placed_vertices, const SpatialIndex& orbit);

struct EdgeReport {
  std::string curve_name;
  Points sample_points;          ///< resampled curve points, patient frame
  std::vector<double> point_distances;
  Points projected_points;       ///< closest orbit points
  double mean = 0.0;
};

std::vector<EdgeReport> edge_distances(const PlateModel& plate, const RigidTransform& placement,
                                       const SpatialIndex& orbit, std::size_t samples_per_curve = 10);

/// Mean of all edge samples, summed in sorted order so the value does not
/// depend on curve order.
double overall_edge_mean(const std::vector<EdgeReport>& edges);

struct FitOptions {
  std::size_t samples_per_curve = 10;
  double penetration_tol = 0.0;
};

struct FitReport {
  std::string plate_id;
  std::vector<double> plate_wide;
  std::vector<EdgeReport> edges;
  double overall_edge_mean = 0.0;
  CollisionReport collision;
};

/// Cheap metrics for the interactive loop.
struct LiveSummary {
  std::string plate_id;
  CollisionReport collision;
  std::array<double, 5> curve_means{};
};

FitReport compute_fit(const PlateModel& plate, const RigidTransform& placement, const SpatialIndex& orbit,
                      const SpatialIndex& bone, const FitOptions& options = {});

LiveSummary live_summary(const PlateModel& plate, const RigidTransform& placement, const SpatialIndex& orbit,
                         const SpatialIndex& bone, const FitOptions& options = {});

}  // namespace orbitfit
