#pragma once

#include "orbitfit/plate/fit.hpp"
#include "orbitfit/plate/heatmap.hpp"
#include "orbitfit/plate/ranking.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace orbitfit {

struct ExportPlate {
  const FitReport* report = nullptr;
  const TriangleMesh* placed_mesh = nullptr;  ///< plate under its placement, for the heatmap
};

struct ExportRequest {
  std::string case_id;
  std::vector<ExportPlate> plates;
  const PlateRanking* ranking = nullptr;
  /// Input files hashed into the manifest (basename + SHA-256).
  std::vector<std::filesystem::path> inputs;
  HeatmapRange range;
};

// Tree written under out_dir/fit_output/fit_metrics/:
//   <plate>_plate_wide_distances.csv   vertex_id,signed_mm
//   <plate>_edge_distances.csv         curve,sample_index,distance_mm,x,y,z
//   <plate>_heatmap.ply                x y z distance red green blue
//   <plate>_histogram.csv              bin_lo,bin_hi,count
//   ranking.json
//   manifest.json                      inputs and outputs with SHA-256, no timestamps
// Returns the metrics directory.
std::filesystem::path export_fit_outputs(const ExportRequest& request, const std::filesystem::path& out_dir);

std::string plate_wide_csv(const FitReport& report);
std::string edge_distances_csv(const FitReport& report);

}  // namespace orbitfit
