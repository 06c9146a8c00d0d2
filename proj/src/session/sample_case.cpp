#include "orbitfit/session/sample_case.hpp"

#include "orbitfit/error.hpp"
#include "orbitfit/mesh/mesh_io.hpp"
#include "orbitfit/synthetic.hpp"
#include "orbitfit/util/io.hpp"

namespace orbitfit {

namespace fs = std::filesystem;
using wire::Json;

fs::path write_sample_case(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir / "plates", ec);
  if (ec) fail(ErrorKind::Io, dir.string() + ": " + ec.message());

  save_stl_binary(synthetic::height_solid(synthetic::bone_height, 0.0, -22, 22, -6, 42, 45, 49), dir / "bone.stl");
  save_ply(synthetic::height_patch(synthetic::orbit_height, -18, 18, -4, 40, 37, 45), dir / "orbit.ply");

  // Orbit landmarks sit where a 24 x 30 mm reference plate's landmarks land in the ideal pose.
  auto on_orbit = [](double x, double y) { return Vec3(x, y, synthetic::orbit_height(x, y)); };
  save_markups_json({{"stop", synthetic::orbit_stop()},
                     {"medial_anterior", on_orbit(-10.0, 30.0)},
                     {"lateral_anterior", on_orbit(10.0, 30.0)},
                     {"lateral_posterior", on_orbit(9.0, 6.0)}},
                    dir / "orbit_landmarks.mrk.json");

  Json plates = Json::array();
  const auto shapes = synthetic::sample_plate_shapes();
  for (std::size_t k = 0; k < shapes.size(); ++k) {
    const auto plate = synthetic::plate_model(shapes[k], synthetic::vendor_frame(k));
    const fs::path manifest = save_plate(plate, dir / "plates" / plate.plate_id);
    plates.push_back(manifest.lexically_relative(dir).generic_string());
  }

  const Json manifest{{"schema_version", kCaseSchemaVersion},
                      {"case_id", "synthetic_orbit_001"},
                      {"bone_mesh", "bone.stl"},
                      {"reconstructed_orbit", "orbit.ply"},
                      {"orbit_landmarks", "orbit_landmarks.mrk.json"},
                      {"orbit_stop_label", "stop"},
                      {"plates", plates}};
  util::write_text(dir / "case.json", manifest.dump(2) + "\n");
  return dir / "case.json";
}

void register_plates(Session& session, const std::vector<std::string>& plate_ids, const std::string& actor) {
  std::vector<std::string> ids = plate_ids;
  if (ids.empty()) {
    const auto state = session.state();
    for (const auto& p : state->plates) ids.push_back(p.plate_id);
  }
  for (const auto& id : ids) {
    session.mutate({"init_placement", id, Json::object()}, actor);
    session.mutate({"stop_align", id, Json::object()}, actor);
  }
}

}  // namespace orbitfit
