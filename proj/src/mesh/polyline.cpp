#include "orbitfit/mesh/polyline.hpp"

#include "orbitfit/error.hpp"

#include <algorithm>

namespace orbitfit {

Polyline::Polyline(std::string name, Points points) : name_(std::move(name)), points_(std::move(points)) {
  if (points_.size() < 2) {
    fail(ErrorKind::InvalidInput, "polyline '" + name_ + "' needs at least 2 points");
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!points_[i].allFinite()) {
      fail(ErrorKind::InvalidInput, "polyline '" + name_ + "' has a non-finite point");
    }
    if (i > 0 && (points_[i] - points_[i - 1]).norm() <= 1e-9) {
      fail(ErrorKind::InvalidInput, "polyline '" + name_ + "' has coincident consecutive points at index " +
                                        std::to_string(i));
    }
  }
}

std::vector<double> Polyline::arc_lengths() const {
  std::vector<double> s(points_.size(), 0.0);
  for (std::size_t i = 1; i < points_.size(); ++i) s[i] = s[i - 1] + (points_[i] - points_[i - 1]).norm();
  return s;
}

double Polyline::length() const { return arc_lengths().back(); }

Polyline resample_polyline(const Polyline& curve, std::size_t n) {
  if (n < 2) fail(ErrorKind::InvalidInput, "resample count must be >= 2");
  const auto& pts = curve.points();
  const auto s = curve.arc_lengths();
  const double total = s.back();

  Points out;
  out.reserve(n);
  out.push_back(pts.front());
  std::size_t seg = 0;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double target = total * static_cast<double>(k) / static_cast<double>(n - 1);
    while (seg + 2 < pts.size() && s[seg + 1] < target) ++seg;
    const double span = s[seg + 1] - s[seg];
    const double u = std::clamp((target - s[seg]) / span, 0.0, 1.0);
    out.push_back(pts[seg] + u * (pts[seg + 1] - pts[seg]));
  }
  out.push_back(pts.back());
  return {curve.name(), std::move(out)};
}

Polyline apply_transform(const Polyline& curve, const RigidTransform& transform) {
  Points out;
  out.reserve(curve.size());
  for (const auto& p : curve.points()) out.push_back(transform.apply(p));
  return {curve.name(), std::move(out)};
}

}  // namespace orbitfit
