#include "orbitfit/registration/icp.hpp"

#include "orbitfit/error.hpp"
#include "orbitfit/registration/rigid_align.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>

namespace orbitfit {

void IcpParams::validate() const {
  if (max_iterations < 1) fail(ErrorKind::InvalidInput, "icp max_iterations must be >= 1");
  if (!(convergence_tol > 0.0)) fail(ErrorKind::InvalidInput, "icp convergence_tol must be > 0");
  if (!(trim_fraction >= 0.0 && trim_fraction < 1.0)) {
    fail(ErrorKind::InvalidInput, "icp trim_fraction must be in [0, 1)");
  }
  if (!(max_correspondence_distance > 0.0)) {
    fail(ErrorKind::InvalidInput, "icp max_correspondence_distance must be > 0");
  }
  if (sample_count < 3) fail(ErrorKind::InvalidInput, "icp sample_count must be >= 3");
}

std::vector<std::uint32_t> sample_indices(std::size_t n, std::size_t count, std::uint64_t seed) {
  std::vector<std::uint32_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0u);
  if (count >= n) return idx;
  // Partial Fisher-Yates with an explicit bounded draw so the subset does not
  // depend on the standard library's distribution implementation.
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t range = n - i;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t r;
    do {
      r = rng();
    } while (r >= limit);
    std::swap(idx[i], idx[i + r % range]);
  }
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

namespace {

struct Correspondences {
  Points source;  // current-pose source points that survived
  Points target;  // their closest surface points
  double rms = 0.0;
};

Correspondences gather(const Points& moved, const SpatialIndex& target, const IcpParams& params) {
  const auto hits = target.closest_points(moved);
  std::vector<std::uint32_t> keep;
  keep.reserve(hits.size());
  for (std::uint32_t i = 0; i < hits.size(); ++i) {
    if (hits[i].distance <= params.max_correspondence_distance) keep.push_back(i);
  }
  if (keep.empty()) {
    fail(ErrorKind::RegistrationFailed, "no correspondences within " +
                                            std::to_string(params.max_correspondence_distance) + " mm");
  }
  std::stable_sort(keep.begin(), keep.end(), [&](std::uint32_t a, std::uint32_t b) {
    return hits[a].distance < hits[b].distance;
  });
  const auto drop = static_cast<std::size_t>(std::floor(params.trim_fraction * static_cast<double>(keep.size())));
  keep.resize(keep.size() - drop);
  if (keep.empty()) fail(ErrorKind::RegistrationFailed, "trimming removed every correspondence");
  // Restore input order so the solve does not depend on distance ties.
  std::sort(keep.begin(), keep.end());

  Correspondences c;
  double sum = 0.0;
  for (auto i : keep) {
    c.source.push_back(moved[i]);
    c.target.push_back(hits[i].point);
    sum += hits[i].distance * hits[i].distance;
  }
  c.rms = std::sqrt(sum / static_cast<double>(keep.size()));
  return c;
}

Points pick(const Points& all, const std::vector<std::uint32_t>& idx) {
  Points out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(all[i]);
  return out;
}

Vec3 centroid(const Points& pts) {
  Vec3 c = Vec3::Zero();
  for (const auto& p : pts) c += p;
  return c / static_cast<double>(pts.size());
}

double spread(const Points& pts, const Vec3& c) {
  double s = 0.0;
  for (const auto& p : pts) s += (p - c).squaredNorm();
  return std::max(std::sqrt(s / static_cast<double>(pts.size())), 1e-9);
}

// Pose coordinates for the accelerator, all in mm: the linear part is scaled
// by the sample spread and the translation is taken at the sample centroid.
struct RigidCoords {
  Vec3 c;
  double scale;
  Eigen::VectorXd to_vec(const RigidTransform& t) const {
    Eigen::VectorXd v(6);
    const Eigen::AngleAxisd aa(t.rotation());
    v.head<3>() = scale * aa.angle() * aa.axis();
    v.tail<3>() = t.apply(c);
    return v;
  }
  std::optional<RigidTransform> from_vec(const Eigen::VectorXd& v) const {
    const Vec3 w = v.head<3>() / scale;
    const double angle = w.norm();
    const Mat3 r = angle > 0.0 ? Eigen::AngleAxisd(angle, w / angle).toRotationMatrix() : Mat3::Identity();
    return RigidTransform::from_matrix([&] {
      Mat4 m = Mat4::Identity();
      m.topLeftCorner<3, 3>() = r;
      m.topRightCorner<3, 1>() = Vec3(v.tail<3>()) - r * c;
      return m;
    }());
  }
};

struct AffineCoords {
  Vec3 c;
  double scale;
  Eigen::VectorXd to_vec(const AffineTransform& t) const {
    Eigen::VectorXd v(12);
    Mat3 d = scale * (t.linear() - Mat3::Identity());
    v.head<9>() = Eigen::Map<const Eigen::Matrix<double, 9, 1>>(d.data());
    v.tail<3>() = t.apply(c);
    return v;
  }
  std::optional<AffineTransform> from_vec(const Eigen::VectorXd& v) const {
    const Mat3 a = Mat3::Identity() + Eigen::Map<const Mat3>(v.data()) / scale;
    if (!(a.determinant() > 1e-12) || !a.allFinite()) return std::nullopt;
    return AffineTransform(a, Vec3(v.tail<3>()) - a * c);
  }
};

// Anderson-accelerated fixed-point iteration over the plain ICP update. An
// extrapolated pose is kept only if its trimmed RMS does not exceed the
// current one; otherwise the plain update is used and the memory restarts.
template <typename Transform, typename Coords, typename Solve>
IcpResult<Transform> run_icp(const Points& source, const SpatialIndex& target, Transform init,
                             const IcpParams& params, Solve&& solve) {
  params.validate();
  if (source.empty()) fail(ErrorKind::InvalidInput, "icp source is empty");
  const Points samples = pick(source, sample_indices(source.size(), params.sample_count, params.seed));
  const Vec3 c = centroid(samples);
  const Coords coords{c, spread(samples, c)};
  constexpr int kMemory = 5;

  IcpResult<Transform> result{init, 0.0, 0, false, {}};
  auto corr = gather(apply_transform(samples, result.transform), target, params);
  result.rms_history.push_back(corr.rms);
  result.residual_rms = corr.rms;

  std::vector<Eigen::VectorXd> g_hist, f_hist;
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < params.max_iterations; ++it) {
    result.iterations = it;
    if (corr.rms == 0.0 || std::abs(prev - corr.rms) < params.convergence_tol) {
      result.converged = true;
      return result;
    }
    if (corr.source.size() < 3) {
      fail(ErrorKind::RegistrationFailed, "fewer than 3 correspondences survived in iteration " +
                                              std::to_string(it));
    }
    const Transform plain = solve(corr.source, corr.target) * result.transform;
    const Eigen::VectorXd g = coords.to_vec(plain);
    g_hist.push_back(g);
    f_hist.push_back(g - coords.to_vec(result.transform));
    if (static_cast<int>(g_hist.size()) > kMemory + 1) {
      g_hist.erase(g_hist.begin());
      f_hist.erase(f_hist.begin());
    }

    std::optional<Transform> candidate;
    if (g_hist.size() >= 2) {
      const auto m = static_cast<Eigen::Index>(g_hist.size() - 1);
      Eigen::MatrixXd df(g.size(), m), dg(g.size(), m);
      for (Eigen::Index j = 0; j < m; ++j) {
        df.col(j) = f_hist[j + 1] - f_hist[j];
        dg.col(j) = g_hist[j + 1] - g_hist[j];
      }
      const Eigen::VectorXd gamma = df.completeOrthogonalDecomposition().solve(f_hist.back());
      if (gamma.allFinite()) {
        try {
          candidate = coords.from_vec(g - dg * gamma);
        } catch (const Error&) {
          candidate.reset();
        }
      }
    }

    prev = corr.rms;
    bool accepted = false;
    if (candidate) {
      try {
        auto trial = gather(apply_transform(samples, *candidate), target, params);
        if (trial.rms <= corr.rms) {
          result.transform = *candidate;
          corr = std::move(trial);
          accepted = true;
        }
      } catch (const Error&) {
      }
    }
    if (!accepted) {
      result.transform = plain;
      corr = gather(apply_transform(samples, result.transform), target, params);
      if (candidate) {
        g_hist.erase(g_hist.begin(), g_hist.end() - 1);
        f_hist.erase(f_hist.begin(), f_hist.end() - 1);
      }
    }
    result.rms_history.push_back(corr.rms);
    result.residual_rms = corr.rms;
  }
  result.iterations = params.max_iterations;
  result.converged = std::abs(prev - corr.rms) < params.convergence_tol;
  return result;
}

}  // namespace

double trimmed_rms(const Points& points, const SpatialIndex& target, const IcpParams& params) {
  return gather(points, target, params).rms;
}

IcpResult<RigidTransform> icp_rigid(const Points& source, const SpatialIndex& target,
                                    const RigidTransform& init, const IcpParams& params) {
  return run_icp<RigidTransform, RigidCoords>(source, target, init, params,
                 [](const Points& s, const Points& t) { return fit_rigid(s, t); });
}

IcpResult<RigidTransform> icp_rigid(const TriangleMesh& source, const SpatialIndex& target,
                                    const RigidTransform& init, const IcpParams& params) {
  return icp_rigid(source.vertices(), target, init, params);
}

IcpResult<AffineTransform> icp_affine(const Points& source, const SpatialIndex& target,
                                      const RigidTransform& init, const IcpParams& params) {
  if (source.size() >= 4) {
    // A planar source leaves the 3x4 solve singular whatever the target is.
    Vec3 mean = Vec3::Zero();
    for (const auto& p : source) mean += p;
    mean /= static_cast<double>(source.size());
    Mat3 cov = Mat3::Zero();
    for (const auto& p : source) cov += (p - mean) * (p - mean).transpose();
    const Vec3 ev = Eigen::SelfAdjointEigenSolver<Mat3>(cov).eigenvalues();
    if (ev[0] <= 1e-10 * ev[2]) fail(ErrorKind::DegenerateConfiguration, "affine ICP source points are coplanar");
  }
  auto result = run_icp<AffineTransform, AffineCoords>(source, target, AffineTransform(init), params,
                        [](const Points& s, const Points& t) { return fit_affine(s, t); });
  if (result.transform.linear().determinant() <= 0.0) {
    fail(ErrorKind::ReflectionCollapse, "affine ICP collapsed to a non-positive determinant");
  }
  return result;
}

IcpResult<AffineTransform> icp_affine(const TriangleMesh& source, const SpatialIndex& target,
                                      const RigidTransform& init, const IcpParams& params) {
  return icp_affine(source.vertices(), target, init, params);
}

}  // namespace orbitfit
