#include "orbitfit/registration/reconstruction.hpp"

#include "orbitfit/error.hpp"
#include "orbitfit/mesh/spatial_index.hpp"

#include <algorithm>

namespace orbitfit {

std::string_view to_string(ReconstructionMethod method) {
  switch (method) {
    case ReconstructionMethod::Rigid: return "rigid";
    case ReconstructionMethod::Affine: return "affine";
    case ReconstructionMethod::Cpd: return "cpd";
  }
  return "rigid";
}

ReconstructionMethod parse_reconstruction_method(std::string_view text) {
  if (text == "rigid") return ReconstructionMethod::Rigid;
  if (text == "affine") return ReconstructionMethod::Affine;
  if (text == "cpd") return ReconstructionMethod::Cpd;
  fail(ErrorKind::InvalidInput, "unknown reconstruction method '" + std::string(text) + "'");
}

namespace {

Points select(const Points& pts, const std::vector<bool>& mask) {
  Points out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (mask[i]) out.push_back(pts[i]);
  }
  return out;
}

Points select(const Points& pts, const std::vector<std::uint32_t>& idx) {
  Points out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(pts[i]);
  return out;
}

// A mirrored vertex is usable when it comes from intact bone and its closest
// triangle on the skull survives in the roi surface; otherwise the mirror of
// the fracture would still be matched.
std::vector<bool> mirrored_mask(const TriangleMesh& skull, const Points& mirrored, const std::vector<bool>& mask) {
  if (std::all_of(mask.begin(), mask.end(), [](bool b) { return b; })) return mask;
  const SpatialIndex full(skull);
  std::vector<bool> out(mask.size(), false);
  const auto hits = full.closest_points(mirrored);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    const auto& tri = skull.triangles()[hits[i].triangle_id];
    out[i] = mask[tri[0]] && mask[tri[1]] && mask[tri[2]];
  }
  return out;
}

}  // namespace

ReconstructionResult reconstruct_orbit(const TriangleMesh& skull, const MirrorPlane& plane,
                                       const std::optional<std::vector<bool>>& roi,
                                       ReconstructionMethod method, const ReconstructionOptions& options) {
  if (skull.empty()) fail(ErrorKind::InvalidInput, "skull mesh is empty");
  const std::vector<bool> mask = roi.value_or(std::vector<bool>(skull.vertex_count(), true));
  if (mask.size() != skull.vertex_count()) {
    fail(ErrorKind::InvalidInput, "roi mask has " + std::to_string(mask.size()) + " entries for " +
                                      std::to_string(skull.vertex_count()) + " vertices");
  }
  IcpParams icp = options.icp;
  icp.seed = options.seed;

  const TriangleMesh target_surface = skull.submesh(mask);
  if (target_surface.empty()) fail(ErrorKind::InvalidInput, "roi leaves no target triangles");
  const SpatialIndex target(target_surface);

  const TriangleMesh mirrored = mirror_mesh(skull, plane);
  const std::vector<bool> source_mask = mirrored_mask(skull, mirrored.vertices(), mask);
  const Points mirrored_roi = select(mirrored.vertices(), source_mask);
  if (mirrored_roi.size() < 3) fail(ErrorKind::InvalidInput, "roi selects fewer than 3 vertices");

  ReconstructionResult result;
  result.method = method;

  const auto rigid = icp_rigid(mirrored_roi, target, RigidTransform::identity(), icp);
  result.rigid_residual_rms = trimmed_rms(apply_transform(mirrored_roi, rigid.transform), target, icp);

  switch (method) {
    case ReconstructionMethod::Rigid: {
      result.transform = rigid.transform;
      result.reconstructed_orbit = apply_transform(mirrored, rigid.transform);
      result.residual_rms = result.rigid_residual_rms;
      break;
    }
    case ReconstructionMethod::Affine: {
      const auto affine = icp_affine(mirrored_roi, target, rigid.transform, icp);
      result.transform = affine.transform;
      result.reconstructed_orbit = apply_transform(mirrored, affine.transform);
      result.residual_rms = trimmed_rms(apply_transform(mirrored_roi, affine.transform), target, icp);
      break;
    }
    case ReconstructionMethod::Cpd: {
      const Points moved_roi = apply_transform(mirrored_roi, rigid.transform);
      const Points target_roi = select(skull.vertices(), mask);
      const Points src = select(moved_roi, farthest_point_sample(moved_roi, options.cpd_sample_count, options.seed));
      const Points dst = select(target_roi, farthest_point_sample(target_roi, options.cpd_target_sample_count, options.seed));
      auto cpd = cpd_nonrigid(src, dst, options.cpd);
      const Points deformed = cpd.field.apply(apply_transform(mirrored.vertices(), rigid.transform));
      result.transform = rigid.transform;
      result.reconstructed_orbit = TriangleMesh(deformed, mirrored.triangles());
      result.residual_rms = trimmed_rms(select(deformed, source_mask), target, icp);
      result.deformation = std::move(cpd.field);
      break;
    }
  }
  return result;
}

}  // namespace orbitfit
