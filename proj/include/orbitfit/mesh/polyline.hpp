#pragma once

#include "orbitfit/mesh/types.hpp"

#include <string>

namespace orbitfit {

/// Open curve of >= 2 points with no coincident neighbours (> 1e-9 mm apart).
class Polyline {
 public:
  Polyline(std::string name, Points points);

  const std::string& name() const { return name_; }
  const Points& points() const { return points_; }
  std::size_t size() const { return points_.size(); }

  double length() const;
  /// Cumulative arc length at each point; front() == 0, back() == length().
  std::vector<double> arc_lengths() const;

  bool operator==(const Polyline& other) const {
    return name_ == other.name_ && points_ == other.points_;
  }

 private:
  std::string name_;
  Points points_;
};

/// n points at equal arc-length spacing; endpoints preserved exactly.
Polyline resample_polyline(const Polyline& curve, std::size_t n);

Polyline apply_transform(const Polyline& curve, const RigidTransform& transform);

}  // namespace orbitfit
