#include "orbitfit/mesh/landmarks.hpp"

#include "orbitfit/error.hpp"
#include "orbitfit/util/io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <set>

namespace orbitfit {

using nlohmann::json;

LandmarkSet::LandmarkSet(std::vector<Landmark> entries) : entries_(std::move(entries)) {
  std::set<std::string_view> seen;
  for (const auto& e : entries_) {
    if (!seen.insert(e.label).second) {
      fail(ErrorKind::InvalidInput, "duplicate landmark label '" + e.label + "'");
    }
    if (!e.position.allFinite()) {
      fail(ErrorKind::InvalidInput, "landmark '" + e.label + "' has non-finite position");
    }
  }
}

std::optional<Vec3> LandmarkSet::find(std::string_view label) const {
  for (const auto& e : entries_) {
    if (e.label == label) return e.position;
  }
  return std::nullopt;
}

std::vector<Landmark> parse_markups_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Parse, std::string("markups json: ") + e.what());
  }
  if (!doc.contains("markups") || !doc["markups"].is_array() || doc["markups"].empty()) {
    fail(ErrorKind::Parse, "markups json: missing 'markups' array");
  }
  std::vector<Landmark> out;
  for (const auto& markup : doc["markups"]) {
    if (!markup.contains("controlPoints")) continue;
    std::size_t index = 0;
    for (const auto& cp : markup["controlPoints"]) {
      Landmark lm;
      lm.label = cp.value("label", std::string{});
      if (!cp.contains("position") || !cp["position"].is_array() || cp["position"].size() != 3) {
        fail(ErrorKind::Parse, "markups json: control point " + std::to_string(index) + " ('" +
                                   lm.label + "') has no 3-component position");
      }
      for (int k = 0; k < 3; ++k) {
        if (!cp["position"][k].is_number()) {
          fail(ErrorKind::Parse, "markups json: non-numeric position for '" + lm.label + "'");
        }
        lm.position[k] = cp["position"][k].get<double>();
      }
      out.push_back(std::move(lm));
      ++index;
    }
  }
  return out;
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

}  // namespace

std::vector<Landmark> parse_fcsv(std::string_view text) {
  std::vector<Landmark> out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    const auto end = text.find('\n', pos);
    std::string_view line = text.substr(pos, end == std::string_view::npos ? text.size() - pos : end - pos);
    pos = end == std::string_view::npos ? text.size() : end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split_commas(line);
    if (fields.size() < 4) {
      fail(ErrorKind::Parse, "fcsv line " + std::to_string(line_no) + ": missing position columns");
    }
    Landmark lm;
    for (int k = 0; k < 3; ++k) {
      const auto f = fields[1 + k];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), lm.position[k]);
      if (f.empty() || ec != std::errc() || ptr != f.data() + f.size()) {
        fail(ErrorKind::Parse, "fcsv line " + std::to_string(line_no) + ": bad coordinate '" +
                                   std::string(f) + "'");
      }
    }
    // Slicer layout: id,x,y,z,ow,ox,oy,oz,vis,sel,lock,label,...
    lm.label = std::string(fields.size() > 11 ? fields[11] : fields.back());
    out.push_back(std::move(lm));
  }
  return out;
}

std::vector<Landmark> load_point_list(const std::filesystem::path& path, LandmarkFormat format) {
  if (format == LandmarkFormat::Auto) {
    format = path.extension() == ".fcsv" ? LandmarkFormat::Fcsv : LandmarkFormat::MarkupsJson;
  }
  const auto text = util::read_text(path);
  try {
    return format == LandmarkFormat::Fcsv ? parse_fcsv(text) : parse_markups_json(text);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

LandmarkSet load_landmarks(const std::filesystem::path& path, LandmarkFormat format) {
  try {
    return LandmarkSet(load_point_list(path, format));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidInput) throw Error(e.kind(), path.string() + ": " + e.what());
    throw;
  }
}

std::string format_markups_json(const std::vector<Landmark>& points, std::string_view type) {
  json cps = json::array();
  for (const auto& p : points) {
    cps.push_back({{"label", p.label}, {"position", {p.position.x(), p.position.y(), p.position.z()}}});
  }
  json doc = {{"@schema",
               "https://raw.githubusercontent.com/slicer/slicer/master/Modules/Loadable/Markups/"
               "Resources/Schema/markups-schema-v1.0.3.json#"},
              {"markups", json::array({{{"type", type}, {"coordinateSystem", "RAS"}, {"controlPoints", cps}}})}};
  return doc.dump(2) + "\n";
}

void save_markups_json(const std::vector<Landmark>& points, const std::filesystem::path& path,
                       std::string_view type) {
  util::write_text(path, format_markups_json(points, type));
}

MatchedLandmarks match_landmarks(const LandmarkSet& source, const LandmarkSet& target) {
  MatchedLandmarks m;
  for (const auto& s : source.entries()) {
    if (auto t = target.find(s.label)) {
      m.labels.push_back(s.label);
      m.source.push_back(s.position);
      m.target.push_back(*t);
    }
  }
  return m;
}

}  // namespace orbitfit
