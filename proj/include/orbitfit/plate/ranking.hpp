#pragma once

#include "orbitfit/plate/fit.hpp"

#include <array>
#include <string>
#include <utility>
#include <vector>

namespace orbitfit {

struct RankEntry {
  std::string plate_id;
  double mean = 0.0;
  int rank = 0;

  bool operator==(const RankEntry&) const = default;
};

/// Ascending means. Equal means share the lower rank (1, 1, 3) and keep input order.
struct PlateRanking {
  std::vector<RankEntry> overall;
  std::vector<std::pair<std::string, std::vector<RankEntry>>> per_edge;  ///< canonical curve order
  std::vector<std::pair<std::string, std::array<double, 5>>> edge_means;  ///< input order

  bool operator==(const PlateRanking&) const = default;
};

PlateRanking rank_plates(const std::vector<FitReport>& reports);

/// Stable text form: fixed key order, "%.6f" numbers.
std::string ranking_json(const PlateRanking& ranking, const std::string& case_id);

}  // namespace orbitfit
