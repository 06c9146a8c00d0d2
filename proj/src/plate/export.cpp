#include "orbitfit/plate/export.hpp"

#include "orbitfit/error.hpp"
#include "orbitfit/util/io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>

namespace orbitfit {

namespace fs = std::filesystem;

std::string plate_wide_csv(const FitReport& report) {
  std::string out = "vertex_id,signed_mm\n";
  for (std::size_t i = 0; i < report.plate_wide.size(); ++i) {
    out += std::to_string(i) + "," + util::fixed(report.plate_wide[i]) + "\n";
  }
  return out;
}

std::string edge_distances_csv(const FitReport& report) {
  std::string out = "curve,sample_index,distance_mm,x,y,z\n";
  for (const auto& e : report.edges) {
    for (std::size_t i = 0; i < e.point_distances.size(); ++i) {
      const Vec3& p = e.projected_points[i];
      out += e.curve_name + "," + std::to_string(i) + "," + util::fixed(e.point_distances[i]) + "," +
             util::fixed(p.x()) + "," + util::fixed(p.y()) + "," + util::fixed(p.z()) + "\n";
    }
  }
  return out;
}

fs::path export_fit_outputs(const ExportRequest& request, const fs::path& out_dir) {
  if (!request.ranking) fail(ErrorKind::InvalidInput, "export needs a ranking");
  const fs::path dir = out_dir / "fit_output" / "fit_metrics";
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::Io, dir.string() + ": " + ec.message());

  std::vector<std::string> written;
  for (const auto& plate : request.plates) {
    if (!plate.report || !plate.placed_mesh) fail(ErrorKind::InvalidInput, "export plate entry is incomplete");
    const auto& r = *plate.report;
    const std::string stem = r.plate_id + "_";
    util::write_text(dir / (stem + "plate_wide_distances.csv"), plate_wide_csv(r));
    util::write_text(dir / (stem + "edge_distances.csv"), edge_distances_csv(r));
    generate_heatmap(*plate.placed_mesh, r.plate_wide, dir / (stem + "heatmap.ply"), dir / (stem + "histogram.csv"),
                     request.range);
    for (const char* suffix : {"plate_wide_distances.csv", "edge_distances.csv", "heatmap.ply", "histogram.csv"}) {
      written.push_back(stem + suffix);
    }
  }
  util::write_text(dir / "ranking.json", ranking_json(*request.ranking, request.case_id));
  written.push_back("ranking.json");

  // Manifest: basenames only and no clock readings, so identical inputs give identical bytes.
  nlohmann::ordered_json m;
  m["schema_version"] = 1;
  m["case_id"] = request.case_id;
  m["heatmap_range"] = {util::fixed(request.range.lo), util::fixed(request.range.hi)};
  auto inputs = nlohmann::ordered_json::array();
  for (const auto& p : request.inputs) {
    inputs.push_back({{"file", p.filename().string()}, {"sha256", util::sha256_file(p)}});
  }
  m["inputs"] = inputs;
  std::sort(written.begin(), written.end());
  auto outputs = nlohmann::ordered_json::array();
  for (const auto& name : written) {
    outputs.push_back({{"file", name}, {"sha256", util::sha256_file(dir / name)}});
  }
  m["outputs"] = outputs;
  util::write_text(dir / "manifest.json", m.dump(2) + "\n");
  return dir;
}

}  // namespace orbitfit
