#pragma once

#include "orbitfit/mesh/landmarks.hpp"
#include "orbitfit/mesh/polyline.hpp"
#include "orbitfit/mesh/triangle_mesh.hpp"

#include <array>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace orbitfit {

inline constexpr std::array<std::string_view, 5> kCanonicalCurves = {
    "anterior_floor", "anterior_medial_wall", "lateral_floor", "superior_medial_wall", "floor_wall_junction"};

/// Index into kCanonicalCurves, or -1.
int canonical_curve_index(std::string_view name);

/// Curve points must lie this close to the plate surface.
inline constexpr double kCurveSurfaceTolerance = 1.0;

struct CurveRevision {
  std::string name;
  Polyline previous;
};

/// Plate geometry in its own (vendor file) frame. Curves are kept in
/// canonical order; replaced curves are remembered in curve_history.
struct PlateModel {
  std::string plate_id;
  std::string vendor;
  std::string size_class;
  std::shared_ptr<const TriangleMesh> mesh;
  std::string stop_label = "stop";
  Vec3 stop_point = Vec3::Zero();
  LandmarkSet registration_landmarks;
  std::vector<Polyline> edge_curves;
  std::vector<CurveRevision> curve_history;

  const Polyline& curve(std::string_view name) const;
};

/// Checks the five canonical curves, the stop label and curve-to-surface
/// distances. Throws InvalidPlate naming the offending item.
void validate_plate(const PlateModel& plate);

/// Builds and validates a plate. Curves may be given in any order.
PlateModel make_plate_model(std::string plate_id, std::string vendor, std::string size_class,
                            TriangleMesh mesh, const LandmarkSet& landmarks, std::string stop_label,
                            std::vector<Polyline> curves);

/// Replaces one curve (plate frame). Unknown names are InvalidInput; points
/// farther than kCurveSurfaceTolerance from the plate are InvalidInput.
PlateModel update_edge_curve(const PlateModel& plate, std::string_view curve_name, const Polyline& curve);

// Plate manifest (JSON):
//   {"schema_version": 1, "plate_id": "...", "vendor": "...", "size_class": "...",
//    "mesh": "plate.stl", "stop_point_label": "stop", "landmarks": "plate_landmarks.mrk.json",
//    "curves": {"anterior_floor": "curves/anterior_floor.mrk.json", ...}}
// Paths are relative to the manifest's directory.
inline constexpr int kPlateManifestVersion = 1;

PlateModel load_plate_manifest(const std::filesystem::path& path);

struct PlateFiles {
  std::filesystem::path manifest;
  std::vector<std::filesystem::path> inputs;  ///< every file the manifest references
};
/// Files referenced by a manifest, without loading geometry.
PlateFiles plate_manifest_files(const std::filesystem::path& path);

/// Writes mesh (binary STL), landmarks, curves and manifest into dir.
std::filesystem::path save_plate(const PlateModel& plate, const std::filesystem::path& dir);

}  // namespace orbitfit
