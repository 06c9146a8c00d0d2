#pragma once

#include "orbitfit/registration/cpd.hpp"
#include "orbitfit/registration/reconstruction.hpp"

#include <filesystem>
#include <string>
#include <variant>

namespace orbitfit {

using AnyTransform = std::variant<RigidTransform, AffineTransform>;

struct NamedTransform {
  std::string name;
  AnyTransform transform;
};

/// Plain-text record: name, kind (rigid|affine), 4x4 row-major matrix at 17 digits.
std::string format_transform(const NamedTransform& record);
NamedTransform parse_transform(std::string_view text);
void save_transform(const NamedTransform& record, const std::filesystem::path& path);
NamedTransform load_transform(const std::filesystem::path& path);

/// Plain-text sidecar: beta, normalization, then one "y_x y_y y_z w_x w_y w_z" row per source point.
std::string format_deformation(const DeformationField& field);
DeformationField parse_deformation(std::string_view text);
void save_deformation(const DeformationField& field, const std::filesystem::path& path);
DeformationField load_deformation(const std::filesystem::path& path);

/// Writes <dir>/reconstructed_orbit.ply, <dir>/transform.txt and, for cpd,
/// <dir>/deformation.txt, plus a summary.txt with the residuals.
void save_reconstruction(const ReconstructionResult& result, const std::filesystem::path& dir);

}  // namespace orbitfit
