#pragma once

#include "orbitfit/mesh/types.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace orbitfit {

struct CpdParams {
  double beta = 2.0;    ///< Gaussian kernel width, normalized units
  double lambda = 3.0;  ///< motion-coherence regularization weight
  double outlier_weight = 0.1;
  int max_iterations = 150;
  double sigma2_tol = 1e-8;

  void validate() const;
};

/// Maps between millimetres and the zero-mean, unit-scale frame CPD runs in.
struct Normalization {
  Vec3 source_mean = Vec3::Zero();
  double source_scale = 1.0;
  Vec3 target_mean = Vec3::Zero();
  double target_scale = 1.0;
};

/// Learned displacement v(y) = sum_i G(y, y_i) W_i over the normalized source
/// points. Evaluating at the original source points reproduces the registered set.
class DeformationField {
 public:
  DeformationField() = default;
  DeformationField(Eigen::MatrixX3d source_points, Eigen::MatrixX3d weights, double beta,
                   Normalization normalization);

  const Eigen::MatrixX3d& source_points() const { return source_; }
  const Eigen::MatrixX3d& weights() const { return weights_; }
  double beta() const { return beta_; }
  const Normalization& normalization() const { return norm_; }

  /// Maps a source-frame point (mm) to its registered position (mm).
  Vec3 apply(const Vec3& p) const;
  Points apply(const Points& pts) const;

 private:
  Eigen::MatrixX3d source_;
  Eigen::MatrixX3d weights_;
  double beta_ = 2.0;
  Normalization norm_;
};

struct CpdResult {
  DeformationField field;
  Points registered;              ///< source points after deformation, mm
  std::vector<double> sigma2_history;
  int iterations = 0;
};

/// Coherent Point Drift nonrigid registration of `source` onto `target`.
/// Throws InvalidInput for < 10 points and NumericFailure on non-finite EM state.
CpdResult cpd_nonrigid(const Points& source, const Points& target, const CpdParams& params);

/// Greedy farthest-point subsample of size min(count, n); the seed picks the start.
std::vector<std::uint32_t> farthest_point_sample(const Points& pts, std::size_t count, std::uint64_t seed);

}  // namespace orbitfit
