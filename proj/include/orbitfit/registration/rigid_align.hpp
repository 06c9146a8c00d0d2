#pragma once

#include "orbitfit/mesh/landmarks.hpp"
#include "orbitfit/mesh/types.hpp"

namespace orbitfit {

/// Least-squares rigid motion (no scale) taking source[i] onto target[i].
/// Reflections are excluded by flipping the weakest singular direction.
/// Throws InsufficientLandmarks for < 3 pairs and DegenerateConfiguration for
/// collinear (or coincident) point sets.
RigidTransform fit_rigid(const Points& source, const Points& target);

/// Rigid alignment of label-matched landmarks (source -> target).
RigidTransform landmark_rigid_align(const LandmarkSet& source, const LandmarkSet& target);

/// Unconstrained least-squares affine map source[i] -> target[i].
/// Throws DegenerateConfiguration when the source points are coplanar.
AffineTransform fit_affine(const Points& source, const Points& target);

}  // namespace orbitfit
