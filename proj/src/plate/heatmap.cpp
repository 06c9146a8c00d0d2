#include "orbitfit/plate/heatmap.hpp"

#include "orbitfit/error.hpp"
#include "orbitfit/util/io.hpp"

#include <algorithm>
#include <cmath>

namespace orbitfit {

namespace {

void check_range(const HeatmapRange& range) {
  if (!std::isfinite(range.lo) || !std::isfinite(range.hi) || !(range.lo < range.hi)) {
    fail(ErrorKind::InvalidInput, "heatmap range needs lo < hi, got (" + util::exact(range.lo) + ", " +
                                      util::exact(range.hi) + ")");
  }
}

std::uint8_t channel(double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0))); }

}  // namespace

Rgb heat_color(double distance, const HeatmapRange& range) {
  check_range(range);
  const double t = std::clamp((distance - range.lo) / (range.hi - range.lo), 0.0, 1.0);
  if (t < 0.5) return {channel(255.0 * (1.0 - 2.0 * t)), channel(255.0 * 2.0 * t), 0};
  return {0, channel(255.0 * (2.0 - 2.0 * t)), channel(255.0 * (2.0 * t - 1.0))};
}

std::size_t Histogram::total() const {
  std::size_t n = underflow + overflow;
  for (auto c : counts) n += c;
  return n;
}

std::string Histogram::to_csv() const {
  std::string out = "bin_lo,bin_hi,count\n";
  out += "-inf," + util::fixed(lo) + "," + std::to_string(underflow) + "\n";
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double a = lo + bin_width * static_cast<double>(i);
    const double b = std::min(hi, lo + bin_width * static_cast<double>(i + 1));
    out += util::fixed(a) + "," + util::fixed(b) + "," + std::to_string(counts[i]) + "\n";
  }
  out += util::fixed(hi) + ",inf," + std::to_string(overflow) + "\n";
  return out;
}

Histogram distance_histogram(std::span<const double> distances, const HeatmapRange& range, double bin_width) {
  check_range(range);
  if (!(bin_width > 0.0)) fail(ErrorKind::InvalidInput, "histogram bin width must be > 0");
  Histogram h;
  h.lo = range.lo;
  h.hi = range.hi;
  h.bin_width = bin_width;
  // A tiny slack keeps (hi - lo) / width from rounding up to an extra empty bin.
  const auto bins = static_cast<std::size_t>(std::ceil((range.hi - range.lo) / bin_width - 1e-9));
  h.counts.assign(std::max<std::size_t>(bins, 1), 0);
  for (double d : distances) {
    if (std::isnan(d)) fail(ErrorKind::InvalidInput, "histogram input contains NaN");
    if (d < range.lo) {
      ++h.underflow;
    } else if (d > range.hi) {
      ++h.overflow;
    } else {
      auto i = static_cast<std::size_t>(std::floor((d - range.lo) / bin_width));
      h.counts[std::min(i, h.counts.size() - 1)] += 1;
    }
  }
  return h;
}

HeatmapFiles generate_heatmap(const TriangleMesh& mesh, std::span<const double> distances,
                              const std::filesystem::path& mesh_path, const std::filesystem::path& histogram_path,
                              const HeatmapRange& range) {
  check_range(range);
  if (distances.size() != mesh.vertex_count()) {
    fail(ErrorKind::InvalidInput, "heatmap has " + std::to_string(distances.size()) + " distances for " +
                                      std::to_string(mesh.vertex_count()) + " vertices");
  }
  std::vector<Rgb> colors;
  colors.reserve(distances.size());
  for (double d : distances) colors.push_back(heat_color(d, range));
  save_mesh_with_scalars(mesh, distances, mesh_path, colors);
  util::write_text(histogram_path, distance_histogram(distances, range).to_csv());
  return {mesh_path, histogram_path};
}

}  // namespace orbitfit
