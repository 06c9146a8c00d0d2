#include "orbitfit/plate/placement.hpp"

#include "orbitfit/error.hpp"
#include "orbitfit/registration/rigid_align.hpp"

#include <cmath>

namespace orbitfit {

std::string_view to_string(PlacementAction action) {
  switch (action) {
    case PlacementAction::Init: return "init_placement";
    case PlacementAction::StopAlign: return "stop_align";
    case PlacementAction::PivotRotate: return "pivot_rotate";
    case PlacementAction::Nudge: return "nudge";
    case PlacementAction::Reset: return "reset";
    case PlacementAction::SetTransform: return "set_transform";
  }
  return "init_placement";
}

PlacementAction parse_placement_action(std::string_view text) {
  for (auto a : {PlacementAction::Init, PlacementAction::StopAlign, PlacementAction::PivotRotate,
                 PlacementAction::Nudge, PlacementAction::Reset, PlacementAction::SetTransform}) {
    if (to_string(a) == text) return a;
  }
  fail(ErrorKind::Parse, "unknown placement action '" + std::string(text) + "'");
}

namespace {

void record(Placement& p, PlacementAction action) {
  p.history.push_back({static_cast<std::uint64_t>(p.history.size()), action, p.transform, p.pivot, p.anchor});
}

}  // namespace

Placement Placement::initialize(std::string plate_id, const RigidTransform& transform) {
  Placement p;
  p.plate_id = std::move(plate_id);
  p.transform = transform;
  record(p, PlacementAction::Init);
  return p;
}

RigidTransform initial_landmark_placement(const PlateModel& plate, const LandmarkSet& orbit_landmarks) {
  return landmark_rigid_align(plate.registration_landmarks, orbit_landmarks);
}

Placement posterior_stop_align(Placement placement, const Vec3& plate_stop, const Vec3& orbit_stop) {
  const Vec3 offset = orbit_stop - placement.transform.apply(plate_stop);
  placement.transform = RigidTransform(placement.transform.rotation(), placement.transform.translation() + offset);
  placement.pivot = orbit_stop;
  placement.anchor = plate_stop;
  record(placement, PlacementAction::StopAlign);
  return placement;
}

Placement pivot_rotate(Placement placement, const Vec3& axis, double angle) {
  if (!placement.pivot || !placement.anchor) {
    fail(ErrorKind::MissingPivot, "plate '" + placement.plate_id + "' has no pivot; run posterior stop alignment first");
  }
  if (!std::isfinite(angle) || !axis.allFinite() || axis.norm() < 1e-12) {
    fail(ErrorKind::InvalidInput, "pivot rotation needs a finite non-zero axis and angle");
  }
  if (angle != 0.0) {
    Mat3 r = Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix() * placement.transform.rotation();
    if (rotation_defect(r) > 1e-12) r = nearest_rotation(r);
    // Translation rebuilt from the anchor so the anchor lands on the pivot with a single rounding.
    placement.transform = RigidTransform(r, *placement.pivot - r * *placement.anchor);
  }
  record(placement, PlacementAction::PivotRotate);
  return placement;
}

Placement nudge_translate(Placement placement, const Vec3& delta, bool move_pivot) {
  if (!delta.allFinite()) fail(ErrorKind::InvalidInput, "nudge delta must be finite");
  placement.transform =
      RigidTransform(placement.transform.rotation(), placement.transform.translation() + delta);
  if (placement.pivot) {
    if (move_pivot) {
      *placement.pivot += delta;
    } else {
      placement.anchor = placement.transform.inverse().apply(*placement.pivot);
    }
  }
  record(placement, PlacementAction::Nudge);
  return placement;
}

Placement reset_to_posterior_stop(Placement placement) {
  for (auto it = placement.history.rbegin(); it != placement.history.rend(); ++it) {
    if (it->action == PlacementAction::StopAlign) {
      placement.transform = it->transform;
      placement.pivot = it->pivot;
      placement.anchor = it->anchor;
      record(placement, PlacementAction::Reset);
      return placement;
    }
  }
  fail(ErrorKind::MissingHistory,
       "plate '" + placement.plate_id + "' has no posterior stop alignment to reset to");
}

Placement set_transform(Placement placement, const RigidTransform& transform) {
  placement.transform = transform;
  if (placement.pivot) placement.anchor = transform.inverse().apply(*placement.pivot);
  record(placement, PlacementAction::SetTransform);
  return placement;
}

}  // namespace orbitfit
