#pragma once

#include "orbitfit/mesh/types.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace orbitfit {

struct Landmark {
  std::string label;
  Vec3 position;
};

/// Ordered labeled points. Correspondence between two sets is by label.
class LandmarkSet {
 public:
  LandmarkSet() = default;
  /// Throws InvalidInput on duplicate labels.
  explicit LandmarkSet(std::vector<Landmark> entries);

  const std::vector<Landmark>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  std::optional<Vec3> find(std::string_view label) const;
  bool contains(std::string_view label) const { return find(label).has_value(); }

 private:
  std::vector<Landmark> entries_;
};

enum class LandmarkFormat { MarkupsJson, Fcsv, Auto };

/// Labeled point list in file order; labels need not be unique.
std::vector<Landmark> load_point_list(const std::filesystem::path& path,
                                      LandmarkFormat format = LandmarkFormat::Auto);
std::vector<Landmark> parse_markups_json(std::string_view text);
std::vector<Landmark> parse_fcsv(std::string_view text);

LandmarkSet load_landmarks(const std::filesystem::path& path,
                           LandmarkFormat format = LandmarkFormat::Auto);

std::string format_markups_json(const std::vector<Landmark>& points, std::string_view type = "Fiducial");
void save_markups_json(const std::vector<Landmark>& points, const std::filesystem::path& path,
                       std::string_view type = "Fiducial");

/// Pairs of positions for the labels present in both sets, in `source` order.
struct MatchedLandmarks {
  std::vector<std::string> labels;
  Points source;
  Points target;
};
MatchedLandmarks match_landmarks(const LandmarkSet& source, const LandmarkSet& target);

}  // namespace orbitfit
