#include "orbitfit/registration/cpd.hpp"

#include "orbitfit/error.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace orbitfit {

void CpdParams::validate() const {
  if (!(beta > 0.0)) fail(ErrorKind::InvalidInput, "cpd beta must be > 0");
  if (!(lambda > 0.0)) fail(ErrorKind::InvalidInput, "cpd lambda must be > 0");
  if (!(outlier_weight >= 0.0 && outlier_weight < 1.0)) {
    fail(ErrorKind::InvalidInput, "cpd outlier weight must be in [0, 1)");
  }
  if (max_iterations < 1) fail(ErrorKind::InvalidInput, "cpd max_iterations must be >= 1");
  if (!(sigma2_tol > 0.0)) fail(ErrorKind::InvalidInput, "cpd sigma2_tol must be > 0");
}

namespace {

using Matrix = Eigen::MatrixXd;
using Rows = Eigen::MatrixX3d;

Rows to_rows(const Points& pts) {
  Rows m(static_cast<Eigen::Index>(pts.size()), 3);
  for (std::size_t i = 0; i < pts.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = pts[i].transpose();
  return m;
}

void normalize(Rows& m, Vec3& mean, double& scale) {
  mean = m.colwise().mean().transpose();
  m.rowwise() -= mean.transpose();
  scale = std::sqrt(m.squaredNorm() / static_cast<double>(m.rows()));
  if (!(scale > 0.0)) fail(ErrorKind::InvalidInput, "cpd point set has zero spread");
  m /= scale;
}

Matrix gaussian_kernel(const Rows& a, const Rows& b, double beta) {
  Matrix g(a.rows(), b.rows());
  const double k = -1.0 / (2.0 * beta * beta);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      g(i, j) = std::exp(k * (a.row(i) - b.row(j)).squaredNorm());
    }
  }
  return g;
}

void check_finite(const Matrix& m, int iteration, const char* what) {
  if (!m.allFinite()) {
    fail(ErrorKind::NumericFailure, std::string("cpd: non-finite ") + what + " at iteration " +
                                        std::to_string(iteration));
  }
}

}  // namespace

DeformationField::DeformationField(Eigen::MatrixX3d source_points, Eigen::MatrixX3d weights,
                                   double beta, Normalization normalization)
    : source_(std::move(source_points)), weights_(std::move(weights)), beta_(beta), norm_(normalization) {
  if (source_.rows() != weights_.rows()) {
    fail(ErrorKind::InvalidInput, "deformation field: source and weight row counts differ");
  }
}

Vec3 DeformationField::apply(const Vec3& p) const {
  const Vec3 y = (p - norm_.source_mean) / norm_.source_scale;
  const double k = -1.0 / (2.0 * beta_ * beta_);
  Vec3 moved = y;
  for (Eigen::Index i = 0; i < source_.rows(); ++i) {
    const double g = std::exp(k * (y - source_.row(i).transpose()).squaredNorm());
    moved += g * weights_.row(i).transpose();
  }
  return moved * norm_.target_scale + norm_.target_mean;
}

Points DeformationField::apply(const Points& pts) const {
  Points out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back(apply(p));
  return out;
}

CpdResult cpd_nonrigid(const Points& source, const Points& target, const CpdParams& params) {
  params.validate();
  if (source.size() < 10 || target.size() < 10) {
    fail(ErrorKind::InvalidInput, "cpd needs at least 10 points in each set");
  }
  Normalization norm;
  Rows x = to_rows(target);
  Rows y = to_rows(source);
  normalize(x, norm.target_mean, norm.target_scale);
  normalize(y, norm.source_mean, norm.source_scale);

  const Eigen::Index n = x.rows();
  const Eigen::Index m = y.rows();
  constexpr double dim = 3.0;

  const Matrix g = gaussian_kernel(y, y, params.beta);
  Rows w = Rows::Zero(m, 3);
  Rows t = y;

  // Initial sigma^2: mean squared distance over all pairs.
  double sigma2 = (static_cast<double>(m) * x.squaredNorm() + static_cast<double>(n) * y.squaredNorm() -
                   2.0 * x.colwise().sum().dot(y.colwise().sum())) /
                  (dim * static_cast<double>(n * m));

  CpdResult result;
  result.sigma2_history.push_back(sigma2);
  const double w_out = params.outlier_weight;
  Eigen::VectorXd col(m);
  int it = 0;
  for (; it < params.max_iterations; ++it) {
    // E-step, streamed over target points so the M x N posterior is never stored.
    const double c = std::pow(2.0 * std::numbers::pi * sigma2, dim / 2.0) * w_out / (1.0 - w_out) *
                     static_cast<double>(m) / static_cast<double>(n);
    Eigen::VectorXd p1 = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd pt1(n);
    Rows px = Rows::Zero(m, 3);
    for (Eigen::Index j = 0; j < n; ++j) {
      double denom = c;
      for (Eigen::Index i = 0; i < m; ++i) {
        col[i] = std::exp(-(x.row(j) - t.row(i)).squaredNorm() / (2.0 * sigma2));
        denom += col[i];
      }
      if (denom > 0.0) col /= denom;
      if (!col.allFinite()) {
        fail(ErrorKind::NumericFailure, "cpd: non-finite posterior at iteration " + std::to_string(it));
      }
      p1 += col;
      pt1[j] = col.sum();
      px += col * x.row(j);
    }
    const double np = p1.sum();
    if (!(np > 0.0)) {
      fail(ErrorKind::NumericFailure, "cpd: all target points classified as outliers at iteration " +
                                          std::to_string(it));
    }

    // M-step: (diag(P1) G + lambda sigma^2 I) W = PX - diag(P1) Y
    Matrix a = p1.asDiagonal() * g;
    a.diagonal().array() += params.lambda * sigma2;
    const Rows rhs = px - p1.asDiagonal() * y;
    w = a.partialPivLu().solve(rhs);
    check_finite(w, it, "kernel weights");
    t = y + g * w;

    const double previous = sigma2;
    sigma2 = ((pt1.array() * x.rowwise().squaredNorm().array()).sum() -
              2.0 * (px.cwiseProduct(t)).sum() + (p1.array() * t.rowwise().squaredNorm().array()).sum()) /
             (np * dim);
    if (!std::isfinite(sigma2)) {
      fail(ErrorKind::NumericFailure, "cpd: non-finite sigma^2 at iteration " + std::to_string(it));
    }
    if (sigma2 <= 0.0) sigma2 = params.sigma2_tol / 10.0;
    result.sigma2_history.push_back(sigma2);
    if (std::abs(previous - sigma2) < params.sigma2_tol) {
      ++it;
      break;
    }
  }
  result.iterations = it;

  result.field = DeformationField(y, w, params.beta, norm);
  result.registered.reserve(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    result.registered.push_back(t.row(i).transpose() * norm.target_scale + norm.target_mean);
  }
  return result;
}

std::vector<std::uint32_t> farthest_point_sample(const Points& pts, std::size_t count, std::uint64_t seed) {
  const std::size_t n = pts.size();
  std::vector<std::uint32_t> out;
  if (n == 0 || count == 0) return out;
  if (count >= n) {
    out.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) out[i] = i;
    return out;
  }
  std::mt19937_64 rng(seed);
  auto current = static_cast<std::uint32_t>(rng() % n);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    out.push_back(current);
    std::uint32_t next = 0;
    double far = -1.0;
    for (std::uint32_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], (pts[i] - pts[current]).squaredNorm());
      if (nearest[i] > far) {
        far = nearest[i];
        next = i;
      }
    }
    current = next;
  }
  return out;
}

}  // namespace orbitfit
