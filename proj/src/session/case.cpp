#include "orbitfit/session/case.hpp"

#include "orbitfit/error.hpp"
#include "orbitfit/mesh/mesh_io.hpp"
#include "orbitfit/util/io.hpp"

#include <algorithm>
#include <set>

namespace orbitfit {

namespace fs = std::filesystem;
using wire::Json;

namespace {

constexpr const char* kManifestName = "case.json";
constexpr const char* kPlacementsName = "placements.json";
constexpr const char* kCurvesName = "curves.json";
constexpr const char* kEventsName = "events.ndjson";

void check_version(const Json& j, const std::string& what) {
  const auto it = j.find("schema_version");
  if (it == j.end() || !it->is_number_integer()) fail(ErrorKind::Migration, what + " has no integer schema_version");
  const int v = it->get<int>();
  if (v > kCaseSchemaVersion) {
    fail(ErrorKind::Migration, what + " uses schema version " + std::to_string(v) + ", newer than supported version " +
                                   std::to_string(kCaseSchemaVersion));
  }
  if (v < 1) {
    fail(ErrorKind::Migration, what + " uses schema version " + std::to_string(v) + "; no migration to version " +
                                   std::to_string(kCaseSchemaVersion) + " exists");
  }
}

fs::path manifest_path(const fs::path& path) {
  return fs::is_directory(path) ? path / kManifestName : path;
}

}  // namespace

Json to_json(const SessionEvent& e) {
  return Json{{"seq", e.seq},
              {"timestamp", e.timestamp},
              {"actor", e.actor},
              {"action", e.action},
              {"plate_id", e.plate_id},
              {"payload", e.payload}};
}

SessionEvent event_from_json(const Json& j) {
  SessionEvent e;
  const Json& seq = wire::field(j, "seq");
  if (!seq.is_number_unsigned()) fail(ErrorKind::InvalidInput, "event seq must be a non-negative integer");
  e.seq = seq.get<std::uint64_t>();
  e.timestamp = wire::text(wire::field(j, "timestamp"), "timestamp");
  e.actor = wire::text(wire::field(j, "actor"), "actor");
  e.action = wire::text(wire::field(j, "action"), "action");
  e.plate_id = wire::text(wire::field(j, "plate_id"), "plate_id");
  e.payload = wire::field(j, "payload");
  return e;
}

std::string format_events(const std::vector<SessionEvent>& events) {
  std::string out;
  for (const auto& e : events) out += to_json(e).dump() + "\n";
  return out;
}

std::vector<SessionEvent> parse_events(std::string_view ndjson) {
  std::vector<SessionEvent> out;
  std::size_t line_no = 0;
  while (!ndjson.empty()) {
    const auto nl = ndjson.find('\n');
    const std::string_view line = ndjson.substr(0, nl);
    ndjson = nl == std::string_view::npos ? std::string_view{} : ndjson.substr(nl + 1);
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      out.push_back(event_from_json(wire::parse(line, "event")));
    } catch (const Error& e) {
      fail(e.kind(), "event log line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<fs::path> CaseGeometry::input_files() const {
  std::vector<fs::path> out = {root / kManifestName, root / bone_ref, root / orbit_ref, root / landmarks_ref};
  for (const auto& ref : plate_refs) {
    const auto files = plate_manifest_files(root / ref);
    out.push_back(files.manifest);
    out.insert(out.end(), files.inputs.begin(), files.inputs.end());
  }
  return out;
}

const PlateModel& CaseState::plate(std::string_view plate_id) const {
  for (const auto& p : plates) {
    if (p.plate_id == plate_id) return p;
  }
  fail(ErrorKind::NotFound, "no plate '" + std::string(plate_id) + "' in this case");
}

PlateModel& CaseState::plate(std::string_view plate_id) {
  return const_cast<PlateModel&>(std::as_const(*this).plate(plate_id));
}

CaseState initial_state(const CaseGeometry& geometry) {
  CaseState s;
  s.plates = geometry.plates;
  return s;
}

Case create_case(const fs::path& path) {
  const fs::path manifest = manifest_path(path);
  const Json j = wire::parse(util::read_text(manifest), manifest.string());
  check_version(j, manifest.string());

  auto g = std::make_shared<CaseGeometry>();
  g->root = manifest.parent_path();
  g->case_id = wire::text(wire::field(j, "case_id"), "case_id");
  g->bone_ref = wire::text(wire::field(j, "bone_mesh"), "bone_mesh");
  g->orbit_ref = wire::text(wire::field(j, "reconstructed_orbit"), "reconstructed_orbit");
  g->landmarks_ref = wire::text(wire::field(j, "orbit_landmarks"), "orbit_landmarks");
  if (j.contains("orbit_stop_label")) g->orbit_stop_label = wire::text(j["orbit_stop_label"], "orbit_stop_label");

  auto bone = load_mesh_with_report(g->root / g->bone_ref);
  for (auto& w : bone.warnings) g->warnings.push_back("bone mesh: " + w);
  if (!bone.mesh.is_watertight()) {
    g->warnings.push_back("bone mesh is not watertight; collision classification uses the signed-distance sign");
  }
  g->bone = std::make_shared<const SpatialIndex>(std::move(bone.mesh));
  auto orbit = load_mesh_with_report(g->root / g->orbit_ref);
  for (auto& w : orbit.warnings) g->warnings.push_back("reconstructed orbit: " + w);
  g->orbit = std::make_shared<const SpatialIndex>(std::move(orbit.mesh));

  g->orbit_landmarks = load_landmarks(g->root / g->landmarks_ref);
  g->orbit_stop = g->orbit_landmarks.find(g->orbit_stop_label);
  if (!g->orbit_stop) {
    g->warnings.push_back("orbit landmarks have no '" + g->orbit_stop_label +
                          "' point; posterior stop alignment is unavailable");
  }

  const Json& plates = wire::field(j, "plates");
  if (!plates.is_array()) fail(ErrorKind::InvalidInput, "case plates must be a list of manifest paths");
  std::set<std::string> ids;
  for (const auto& ref : plates) {
    const std::string r = wire::text(ref, "plate manifest path");
    PlateModel plate = load_plate_manifest(g->root / r);
    if (!ids.insert(plate.plate_id).second) {
      fail(ErrorKind::InvalidInput, "duplicate plate_id '" + plate.plate_id + "' in " + manifest.string());
    }
    g->plate_refs.push_back(r);
    g->plates.push_back(std::move(plate));
  }

  Case c;
  c.state = initial_state(*g);
  c.geometry = std::move(g);
  return c;
}

std::string format_placements(const std::map<std::string, Placement>& placements) {
  Json list = Json::array();
  for (const auto& [id, p] : placements) list.push_back(wire::to_json(p));
  return Json{{"schema_version", kCaseSchemaVersion}, {"placements", list}}.dump(1) + "\n";
}

std::map<std::string, Placement> parse_placements(std::string_view text) {
  const Json j = wire::parse(text, kPlacementsName);
  check_version(j, kPlacementsName);
  std::map<std::string, Placement> out;
  for (const auto& p : wire::field(j, "placements")) {
    Placement placement = wire::placement_from_json(p);
    const std::string id = placement.plate_id;
    if (!out.emplace(id, std::move(placement)).second) fail(ErrorKind::InvalidInput, "duplicate placement for '" + id + "'");
  }
  return out;
}

namespace {

std::string format_curves(const std::vector<PlateModel>& plates) {
  Json list = Json::array();
  for (const auto& p : plates) {
    if (p.curve_history.empty()) continue;
    Json curves = Json::array(), history = Json::array();
    for (const auto& c : p.edge_curves) curves.push_back(wire::to_json(c));
    for (const auto& h : p.curve_history) history.push_back(wire::to_json(h.previous));
    list.push_back(Json{{"plate_id", p.plate_id}, {"curves", curves}, {"history", history}});
  }
  return Json{{"schema_version", kCaseSchemaVersion}, {"plates", list}}.dump(1) + "\n";
}

void apply_curves(std::string_view text, CaseState& state) {
  const Json j = wire::parse(text, kCurvesName);
  check_version(j, kCurvesName);
  for (const auto& entry : wire::field(j, "plates")) {
    PlateModel& plate = state.plate(wire::text(wire::field(entry, "plate_id"), "plate_id"));
    std::vector<Polyline> curves;
    for (const auto& c : wire::field(entry, "curves")) {
      const std::string name = wire::text(wire::field(c, "name"), "curve name");
      curves.push_back(wire::polyline_from_json(wire::field(c, "points"), name));
    }
    if (curves.size() != kCanonicalCurves.size()) {
      fail(ErrorKind::InvalidPlate, std::string(kCurvesName) + ": plate '" + plate.plate_id + "' needs five curves");
    }
    std::vector<CurveRevision> history;
    for (const auto& c : wire::field(entry, "history")) {
      const std::string name = wire::text(wire::field(c, "name"), "curve name");
      history.push_back({name, wire::polyline_from_json(wire::field(c, "points"), name)});
    }
    PlateModel edited = plate;
    edited.edge_curves.clear();
    for (auto name : kCanonicalCurves) {
      const auto it = std::find_if(curves.begin(), curves.end(), [&](const Polyline& c) { return c.name() == name; });
      if (it == curves.end()) {
        fail(ErrorKind::InvalidPlate, std::string(kCurvesName) + ": plate '" + plate.plate_id + "' is missing curve '" +
                                          std::string(name) + "'");
      }
      edited.edge_curves.push_back(*it);
    }
    edited.curve_history = std::move(history);
    validate_plate(edited);
    plate = std::move(edited);
  }
}

}  // namespace

Case load_case(const fs::path& path) {
  Case c = create_case(path);
  const fs::path root = c.geometry->root;
  if (fs::exists(root / kCurvesName)) apply_curves(util::read_text(root / kCurvesName), c.state);
  if (fs::exists(root / kPlacementsName)) {
    c.state.placements = parse_placements(util::read_text(root / kPlacementsName));
    for (const auto& [id, p] : c.state.placements) c.state.plate(id);
  }
  if (fs::exists(root / kEventsName)) {
    c.state.events = parse_events(util::read_text(root / kEventsName));
    for (std::size_t i = 0; i < c.state.events.size(); ++i) {
      if (c.state.events[i].seq != i) {
        fail(ErrorKind::InvalidInput, "event log is not contiguous at line " + std::to_string(i + 1));
      }
    }
  }
  return c;
}

void save_case(const Case& c, const fs::path& dir) {
  const CaseGeometry& g = *c.geometry;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::Io, dir.string() + ": " + ec.message());
  if (!fs::equivalent(dir, g.root, ec)) {
    for (const auto& file : g.input_files()) {
      const fs::path rel = file.lexically_normal().lexically_relative(g.root.lexically_normal());
      if (rel.empty() || *rel.begin() == "..") {
        fail(ErrorKind::InvalidInput, "cannot copy case: " + file.string() + " lies outside " + g.root.string());
      }
      fs::create_directories((dir / rel).parent_path(), ec);
      fs::copy_file(file, dir / rel, fs::copy_options::overwrite_existing, ec);
      if (ec) fail(ErrorKind::Io, "copying " + file.string() + ": " + ec.message());
    }
  }
  util::write_text(dir / kPlacementsName, format_placements(c.state.placements));
  util::write_text(dir / kCurvesName, format_curves(c.state.plates));
  util::write_text(dir / kEventsName, format_events(c.state.events));
}

}  // namespace orbitfit
