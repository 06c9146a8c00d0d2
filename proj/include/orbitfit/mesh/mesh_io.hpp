#pragma once

#include "orbitfit/mesh/triangle_mesh.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace orbitfit {

enum class MeshFormat { StlAscii, StlBinary, Ply, Auto };

struct MeshLoadOptions {
  /// 0 means exact bitwise deduplication of STL facet corners.
  double weld_tolerance = 0.0;
};

struct MeshLoadResult {
  TriangleMesh mesh;
  std::vector<std::string> warnings;
  /// Per-vertex "distance" property when the PLY carries one.
  std::optional<std::vector<double>> scalars;
};

/// Auto picks PLY by extension, otherwise sniffs STL ("solid" header plus a
/// size that does not match the binary facet count means ASCII).
MeshLoadResult load_mesh_with_report(const std::filesystem::path& path,
                                     MeshFormat format = MeshFormat::Auto,
                                     const MeshLoadOptions& options = {});

inline TriangleMesh load_mesh(const std::filesystem::path& path,
                              MeshFormat format = MeshFormat::Auto,
                              const MeshLoadOptions& options = {}) {
  return load_mesh_with_report(path, format, options).mesh;
}

TriangleMesh parse_stl_binary(std::span<const std::uint8_t> bytes, const MeshLoadOptions& options,
                              std::vector<std::string>& warnings);
TriangleMesh parse_stl_ascii(std::string_view text, const MeshLoadOptions& options,
                             std::vector<std::string>& warnings);
MeshLoadResult parse_ply(std::string_view text);

void save_stl_binary(const TriangleMesh& mesh, const std::filesystem::path& path);
void save_stl_ascii(const TriangleMesh& mesh, const std::filesystem::path& path);
/// ASCII PLY; doubles written at 17 significant digits so geometry round-trips exactly.
void save_ply(const TriangleMesh& mesh, const std::filesystem::path& path);

using Rgb = std::array<std::uint8_t, 3>;

/// ASCII PLY with a float "distance" property per vertex (and optional colors).
void save_mesh_with_scalars(const TriangleMesh& mesh, std::span<const double> scalars,
                            const std::filesystem::path& path,
                            std::span<const Rgb> colors = {});

/// Text serialization used by save_mesh_with_scalars, exposed for byte-level checks.
std::string format_ply_with_scalars(const TriangleMesh& mesh, std::span<const double> scalars,
                                    std::span<const Rgb> colors = {});

}  // namespace orbitfit
