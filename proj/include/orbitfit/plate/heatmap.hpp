#pragma once

#include "orbitfit/mesh/mesh_io.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace orbitfit {

struct HeatmapRange {
  double lo = -5.0;
  double hi = 5.0;
};

/// Linear red -> green -> blue over [lo, hi], clamped outside.
Rgb heat_color(double distance, const HeatmapRange& range = {});

inline constexpr double kHistogramBinWidth = 0.25;

struct Histogram {
  double lo = -5.0;
  double hi = 5.0;
  double bin_width = kHistogramBinWidth;
  std::vector<std::size_t> counts;  ///< bins over [lo, hi]; a value equal to hi lands in the last bin
  std::size_t underflow = 0;
  std::size_t overflow = 0;

  std::size_t total() const;
  /// "bin_lo,bin_hi,count" rows; underflow and overflow use -inf / inf bounds.
  std::string to_csv() const;
};

Histogram distance_histogram(std::span<const double> distances, const HeatmapRange& range = {},
                             double bin_width = kHistogramBinWidth);

struct HeatmapFiles {
  std::filesystem::path mesh;
  std::filesystem::path histogram;
};

/// Writes the colored PLY and the histogram CSV. lo >= hi is InvalidInput.
HeatmapFiles generate_heatmap(const TriangleMesh& mesh, std::span<const double> distances,
                              const std::filesystem::path& mesh_path, const std::filesystem::path& histogram_path,
                              const HeatmapRange& range = {});

}  // namespace orbitfit
