#pragma once

#include "orbitfit/mesh/spatial_index.hpp"
#include "orbitfit/mesh/triangle_mesh.hpp"

#include <cstdint>
#include <vector>

namespace orbitfit {

struct IcpParams {
  int max_iterations = 100;
  double convergence_tol = 1e-4;  ///< mm change in trimmed RMS
  double trim_fraction = 0.1;     ///< worst fraction of pairs discarded per iteration
  double max_correspondence_distance = 10.0;
  std::size_t sample_count = 5000;
  std::uint64_t seed = 42;

  void validate() const;
};

template <typename Transform>
struct IcpResult {
  Transform transform;
  double residual_rms = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Trimmed RMS at the start of each iteration.
  std::vector<double> rms_history;
};

/// Deterministic subset of [0, n) of size min(n, count), ascending.
std::vector<std::uint32_t> sample_indices(std::size_t n, std::size_t count, std::uint64_t seed);

/// Trimmed RMS of closest-point distances from `points` to the indexed surface,
/// using the same max-distance and trim rules as one ICP iteration.
/// Throws RegistrationFailed if nothing survives.
double trimmed_rms(const Points& points, const SpatialIndex& target, const IcpParams& params);

IcpResult<RigidTransform> icp_rigid(const Points& source, const SpatialIndex& target,
                                    const RigidTransform& init, const IcpParams& params);
IcpResult<RigidTransform> icp_rigid(const TriangleMesh& source, const SpatialIndex& target,
                                    const RigidTransform& init, const IcpParams& params);

IcpResult<AffineTransform> icp_affine(const Points& source, const SpatialIndex& target,
                                      const RigidTransform& init, const IcpParams& params);
IcpResult<AffineTransform> icp_affine(const TriangleMesh& source, const SpatialIndex& target,
                                      const RigidTransform& init, const IcpParams& params);

}  // namespace orbitfit
