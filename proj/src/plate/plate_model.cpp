#include "orbitfit/plate/plate_model.hpp"

#include "orbitfit/error.hpp"
#include "orbitfit/mesh/mesh_io.hpp"
#include "orbitfit/mesh/spatial_index.hpp"
#include "orbitfit/util/io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>

namespace orbitfit {

namespace fs = std::filesystem;
using nlohmann::json;

int canonical_curve_index(std::string_view name) {
  for (std::size_t i = 0; i < kCanonicalCurves.size(); ++i) {
    if (kCanonicalCurves[i] == name) return static_cast<int>(i);
  }
  return -1;
}

const Polyline& PlateModel::curve(std::string_view name) const {
  for (const auto& c : edge_curves) {
    if (c.name() == name) return c;
  }
  fail(ErrorKind::InvalidPlate, "plate '" + plate_id + "' has no curve '" + std::string(name) + "'");
}

namespace {

void check_curves_on_surface(const std::string& plate_id, const SpatialIndex& index, const Polyline& curve,
                             ErrorKind kind) {
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double d = index.closest_point(curve.points()[i]).distance;
    if (d > kCurveSurfaceTolerance) {
      fail(kind, "plate '" + plate_id + "': curve '" + curve.name() + "' point " + std::to_string(i) + " is " +
                     util::fixed(d, 3) + " mm from the plate surface (limit " +
                     util::fixed(kCurveSurfaceTolerance, 1) + " mm)");
    }
  }
}

}  // namespace

void validate_plate(const PlateModel& plate) {
  const std::string who = "plate '" + plate.plate_id + "'";
  if (plate.plate_id.empty()) fail(ErrorKind::InvalidPlate, "plate_id is empty");
  if (!plate.mesh || plate.mesh->empty()) fail(ErrorKind::InvalidPlate, who + " has an empty mesh");
  if (plate.edge_curves.size() != kCanonicalCurves.size()) {
    for (auto name : kCanonicalCurves) {
      const auto n = std::count_if(plate.edge_curves.begin(), plate.edge_curves.end(),
                                   [&](const Polyline& c) { return c.name() == name; });
      if (n == 0) fail(ErrorKind::InvalidPlate, who + " is missing curve '" + std::string(name) + "'");
    }
  }
  for (std::size_t i = 0; i < plate.edge_curves.size(); ++i) {
    const auto& name = plate.edge_curves[i].name();
    const int idx = canonical_curve_index(name);
    if (idx < 0) fail(ErrorKind::InvalidPlate, who + " has unknown curve '" + name + "'");
    if (idx != static_cast<int>(i)) {
      fail(ErrorKind::InvalidPlate, who + " curve '" + name + "' is duplicated or out of canonical order");
    }
  }
  if (!plate.registration_landmarks.contains(plate.stop_label)) {
    fail(ErrorKind::InvalidPlate, who + " landmarks lack the stop point label '" + plate.stop_label + "'");
  }
  const SpatialIndex index(plate.mesh);
  for (const auto& c : plate.edge_curves) check_curves_on_surface(plate.plate_id, index, c, ErrorKind::InvalidPlate);
}

PlateModel make_plate_model(std::string plate_id, std::string vendor, std::string size_class, TriangleMesh mesh,
                            const LandmarkSet& landmarks, std::string stop_label, std::vector<Polyline> curves) {
  PlateModel p;
  p.plate_id = std::move(plate_id);
  p.vendor = std::move(vendor);
  p.size_class = std::move(size_class);
  p.mesh = std::make_shared<const TriangleMesh>(std::move(mesh));
  p.stop_label = std::move(stop_label);
  p.registration_landmarks = landmarks;
  for (auto name : kCanonicalCurves) {
    std::vector<const Polyline*> hits;
    for (const auto& c : curves) {
      if (c.name() == name) hits.push_back(&c);
    }
    if (hits.empty()) {
      fail(ErrorKind::InvalidPlate, "plate '" + p.plate_id + "' is missing curve '" + std::string(name) + "'");
    }
    if (hits.size() > 1) {
      fail(ErrorKind::InvalidPlate, "plate '" + p.plate_id + "' defines curve '" + std::string(name) + "' twice");
    }
    p.edge_curves.push_back(*hits.front());
  }
  for (const auto& c : curves) {
    if (canonical_curve_index(c.name()) < 0) {
      fail(ErrorKind::InvalidPlate, "plate '" + p.plate_id + "' has unknown curve '" + c.name() + "'");
    }
  }
  if (const auto stop = p.registration_landmarks.find(p.stop_label)) p.stop_point = *stop;
  validate_plate(p);
  return p;
}

PlateModel update_edge_curve(const PlateModel& plate, std::string_view curve_name, const Polyline& curve) {
  const int idx = canonical_curve_index(curve_name);
  if (idx < 0) fail(ErrorKind::InvalidInput, "unknown curve name '" + std::string(curve_name) + "'");
  const Polyline renamed(std::string(curve_name), curve.points());
  check_curves_on_surface(plate.plate_id, SpatialIndex(plate.mesh), renamed, ErrorKind::InvalidInput);
  PlateModel out = plate;
  out.curve_history.push_back({std::string(curve_name), plate.edge_curves[static_cast<std::size_t>(idx)]});
  out.edge_curves[static_cast<std::size_t>(idx)] = renamed;
  return out;
}

namespace {

json read_manifest(const fs::path& path) {
  json j;
  try {
    j = json::parse(util::read_text(path));
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Parse, path.string() + ": " + e.what());
  }
  if (!j.is_object()) fail(ErrorKind::Parse, path.string() + ": plate manifest must be a JSON object");
  const int version = j.value("schema_version", 0);
  if (version > kPlateManifestVersion) {
    fail(ErrorKind::Migration, path.string() + ": plate manifest schema_version " + std::to_string(version) +
                                   " is newer than supported version " + std::to_string(kPlateManifestVersion));
  }
  if (version < 1) fail(ErrorKind::Parse, path.string() + ": missing or invalid schema_version");
  for (const char* key : {"plate_id", "mesh", "landmarks", "curves"}) {
    if (!j.contains(key)) fail(ErrorKind::InvalidPlate, path.string() + ": missing field '" + key + "'");
  }
  if (!j["curves"].is_object()) fail(ErrorKind::InvalidPlate, path.string() + ": 'curves' must be an object");
  return j;
}

std::string text_field(const json& j, const char* key, const fs::path& path, const std::string& fallback = "") {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_string()) fail(ErrorKind::InvalidPlate, path.string() + ": field '" + key + "' must be text");
  return j[key].get<std::string>();
}

}  // namespace

PlateFiles plate_manifest_files(const fs::path& path) {
  const json j = read_manifest(path);
  const fs::path dir = path.parent_path();
  PlateFiles out{path, {}};
  out.inputs.push_back(dir / text_field(j, "mesh", path));
  out.inputs.push_back(dir / text_field(j, "landmarks", path));
  for (auto name : kCanonicalCurves) {
    const auto it = j["curves"].find(std::string(name));
    if (it != j["curves"].end() && it->is_string()) out.inputs.push_back(dir / it->get<std::string>());
  }
  return out;
}

PlateModel load_plate_manifest(const fs::path& path) {
  const json j = read_manifest(path);
  const fs::path dir = path.parent_path();
  const std::string plate_id = text_field(j, "plate_id", path);
  TriangleMesh mesh = load_mesh(dir / text_field(j, "mesh", path));
  const LandmarkSet landmarks = load_landmarks(dir / text_field(j, "landmarks", path));

  std::vector<Polyline> curves;
  for (auto it = j["curves"].begin(); it != j["curves"].end(); ++it) {
    if (!it.value().is_string()) {
      fail(ErrorKind::InvalidPlate, path.string() + ": curve '" + it.key() + "' must name a file");
    }
    Points pts;
    for (const auto& lm : load_point_list(dir / it.value().get<std::string>())) pts.push_back(lm.position);
    try {
      curves.emplace_back(it.key(), std::move(pts));
    } catch (const Error& e) {
      fail(ErrorKind::InvalidPlate, "plate '" + plate_id + "' curve '" + it.key() + "': " + e.what());
    }
  }
  return make_plate_model(plate_id, text_field(j, "vendor", path), text_field(j, "size_class", path),
                          std::move(mesh), landmarks, text_field(j, "stop_point_label", path, "stop"),
                          std::move(curves));
}

fs::path save_plate(const PlateModel& plate, const fs::path& dir) {
  const std::string mesh_name = plate.plate_id + ".stl";
  const std::string lm_name = plate.plate_id + "_landmarks.mrk.json";
  save_stl_binary(*plate.mesh, dir / mesh_name);
  save_markups_json(plate.registration_landmarks.entries(), dir / lm_name);
  json j;
  j["schema_version"] = kPlateManifestVersion;
  j["plate_id"] = plate.plate_id;
  j["vendor"] = plate.vendor;
  j["size_class"] = plate.size_class;
  j["mesh"] = mesh_name;
  j["stop_point_label"] = plate.stop_label;
  j["landmarks"] = lm_name;
  json curves = json::object();
  for (const auto& c : plate.edge_curves) {
    const std::string file = "curves/" + plate.plate_id + "_" + c.name() + ".mrk.json";
    std::vector<Landmark> pts;
    for (std::size_t i = 0; i < c.size(); ++i) pts.push_back({c.name() + "-" + std::to_string(i + 1), c.points()[i]});
    save_markups_json(pts, dir / file, "Curve");
    curves[c.name()] = file;
  }
  j["curves"] = curves;
  const fs::path manifest = dir / (plate.plate_id + ".plate.json");
  util::write_text(manifest, j.dump(2) + "\n");
  return manifest;
}

}  // namespace orbitfit
