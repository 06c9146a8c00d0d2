#pragma once

#include "orbitfit/mesh/landmarks.hpp"
#include "orbitfit/mesh/spatial_index.hpp"
#include "orbitfit/plate/placement.hpp"
#include "orbitfit/plate/plate_model.hpp"
#include "orbitfit/session/wire.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace orbitfit {

// A case is a directory:
//   case.json         manifest (below), never rewritten by the tools
//   placements.json   {"schema_version": 1, "placements": [Placement...]} sorted by plate id
//   curves.json       {"schema_version": 1, "plates": [{"plate_id", "curves": [...], "history": [...]}]}
//   events.ndjson     one SessionEvent per line
//
// case.json:
//   {"schema_version": 1, "case_id": "sample", "bone_mesh": "bone.stl",
//    "reconstructed_orbit": "orbit.ply", "orbit_landmarks": "orbit_landmarks.mrk.json",
//    "orbit_stop_label": "stop", "plates": ["plates/a.plate.json", ...]}
// Paths are relative to the case directory.
inline constexpr int kCaseSchemaVersion = 1;

struct SessionEvent {
  std::uint64_t seq = 0;
  std::string timestamp;  ///< UTC, ISO 8601
  std::string actor;
  std::string action;
  std::string plate_id;
  wire::Json payload = wire::Json::object();

  bool operator==(const SessionEvent&) const = default;
};

wire::Json to_json(const SessionEvent& e);
SessionEvent event_from_json(const wire::Json& j);
std::string format_events(const std::vector<SessionEvent>& events);
std::vector<SessionEvent> parse_events(std::string_view ndjson);

/// Everything loaded from case.json and the files it names. Immutable once built.
struct CaseGeometry {
  std::filesystem::path root;
  std::string case_id;
  std::string bone_ref;
  std::string orbit_ref;
  std::string landmarks_ref;
  std::vector<std::string> plate_refs;
  std::string orbit_stop_label = "stop";

  std::shared_ptr<const SpatialIndex> bone;
  std::shared_ptr<const SpatialIndex> orbit;
  LandmarkSet orbit_landmarks;
  std::optional<Vec3> orbit_stop;
  std::vector<PlateModel> plates;  ///< as stored in the plate manifests
  std::vector<std::string> warnings;

  /// case.json plus every mesh, landmark, plate manifest and curve file, in a fixed order.
  std::vector<std::filesystem::path> input_files() const;
};

/// The mutable part: curve edits, placements and the log that produced them.
struct CaseState {
  std::vector<PlateModel> plates;
  std::map<std::string, Placement> placements;
  std::vector<SessionEvent> events;

  /// NotFound for unknown ids.
  const PlateModel& plate(std::string_view plate_id) const;
  PlateModel& plate(std::string_view plate_id);
};

struct Case {
  std::shared_ptr<const CaseGeometry> geometry;
  CaseState state;
};

/// Loads case.json and its files; placements, curve edits and events start empty.
Case create_case(const std::filesystem::path& manifest);

/// create_case plus the saved state files, when present. Accepts the
/// directory or the case.json path.
Case load_case(const std::filesystem::path& path);

/// Writes the state files into dir. A different dir receives a copy of
/// case.json and every referenced file first, keeping relative paths.
void save_case(const Case& c, const std::filesystem::path& dir);

/// The state create_case would produce for this geometry.
CaseState initial_state(const CaseGeometry& geometry);

std::string format_placements(const std::map<std::string, Placement>& placements);
std::map<std::string, Placement> parse_placements(std::string_view text);

}  // namespace orbitfit
