#pragma once

#include "orbitfit/mesh/types.hpp"
#include "orbitfit/plate/plate_model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace orbitfit {

enum class PlacementAction { Init, StopAlign, PivotRotate, Nudge, Reset, SetTransform };

std::string_view to_string(PlacementAction action);
PlacementAction parse_placement_action(std::string_view text);

struct HistoryEntry {
  std::uint64_t seq = 0;  ///< position in the history; wall-clock time lives in the event log
  PlacementAction action = PlacementAction::Init;
  RigidTransform transform;
  std::optional<Vec3> pivot;
  std::optional<Vec3> anchor;

  bool operator==(const HistoryEntry&) const = default;
};

/// Plate-to-patient pose with its pivot. `anchor` is the plate-frame point
/// that the transform carries onto the pivot; rotations are rebuilt from it
/// so repeated pivot rotations cannot drift the stop.
struct Placement {
  std::string plate_id;
  RigidTransform transform;
  std::optional<Vec3> pivot;
  std::optional<Vec3> anchor;
  std::vector<HistoryEntry> history;

  static Placement initialize(std::string plate_id, const RigidTransform& transform);

  bool operator==(const Placement&) const = default;
};

/// Landmark registration of the plate onto the orbit landmarks.
RigidTransform initial_landmark_placement(const PlateModel& plate, const LandmarkSet& orbit_landmarks);

Placement posterior_stop_align(Placement placement, const Vec3& plate_stop, const Vec3& orbit_stop);

/// Rotation by angle (radians) about axis through the pivot. MissingPivot when
/// no stop alignment has happened.
Placement pivot_rotate(Placement placement, const Vec3& axis, double angle);

/// Translation by delta. With move_pivot the pivot travels with the plate;
/// otherwise it stays at the orbital stop.
Placement nudge_translate(Placement placement, const Vec3& delta, bool move_pivot = false);

/// Restores the pose recorded by the latest posterior_stop_align.
Placement reset_to_posterior_stop(Placement placement);

/// Replaces the pose outright (interactive updates). The pivot is kept and
/// the anchor recomputed so later rotations still turn about it.
Placement set_transform(Placement placement, const RigidTransform& transform);

}  // namespace orbitfit
