#pragma once

#include "orbitfit/mesh/triangle_mesh.hpp"
#include "orbitfit/registration/cpd.hpp"
#include "orbitfit/registration/icp.hpp"

#include <optional>
#include <string_view>
#include <variant>
#include <vector>

namespace orbitfit {

enum class ReconstructionMethod { Rigid, Affine, Cpd };

std::string_view to_string(ReconstructionMethod method);
ReconstructionMethod parse_reconstruction_method(std::string_view text);

struct ReconstructionOptions {
  IcpParams icp;
  CpdParams cpd;
  /// Mirrored-side points handed to CPD (farthest-point subsample). Sets the
  /// size of the dense kernel system, so cost grows with its cube.
  std::size_t cpd_sample_count = 3000;
  /// Target-side points. The E-step is streamed, so this only costs time.
  std::size_t cpd_target_sample_count = 3000;
  std::uint64_t seed = 42;
};

struct ReconstructionResult {
  ReconstructionMethod method = ReconstructionMethod::Rigid;
  /// Rigid for rigid/cpd, affine for affine.
  std::variant<RigidTransform, AffineTransform> transform;
  std::optional<DeformationField> deformation;  ///< present iff method == Cpd
  TriangleMesh reconstructed_orbit;
  /// Trimmed RMS (ICP trim and distance rules) over ROI vertices, mm.
  double residual_rms = 0.0;
  /// Residual of the rigid stage alone, for comparison.
  double rigid_residual_rms = 0.0;
};

/// Mirrors `skull` across `plane` and registers the mirror back onto the
/// original. `roi` marks intact-bone vertices: only ROI vertices of the mirror
/// drive the fit, and only triangles fully inside the ROI serve as target.
ReconstructionResult reconstruct_orbit(const TriangleMesh& skull, const MirrorPlane& plane,
                                       const std::optional<std::vector<bool>>& roi,
                                       ReconstructionMethod method,
                                       const ReconstructionOptions& options = {});

}  // namespace orbitfit
