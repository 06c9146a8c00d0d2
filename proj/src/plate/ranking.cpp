#include "orbitfit/plate/ranking.hpp"

#include "orbitfit/error.hpp"
#include "orbitfit/util/io.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace orbitfit {

namespace {

std::vector<RankEntry> rank(std::vector<RankEntry> entries) {
  std::stable_sort(entries.begin(), entries.end(),
                   [](const RankEntry& a, const RankEntry& b) { return a.mean < b.mean; });
  for (std::size_t i = 0; i < entries.size(); ++i) {
    entries[i].rank = (i > 0 && entries[i].mean == entries[i - 1].mean) ? entries[i - 1].rank
                                                                         : static_cast<int>(i + 1);
  }
  return entries;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') {
      out += '\\';
      out += c;
    } else if (static_cast<unsigned char>(c) < 0x20) {
      char buf[8];
      std::snprintf(buf, sizeof buf, "\\u%04x", c);
      out += buf;
    } else {
      out += c;
    }
  }
  return out + "\"";
}

}  // namespace

PlateRanking rank_plates(const std::vector<FitReport>& reports) {
  if (reports.empty()) fail(ErrorKind::InvalidInput, "rank_plates needs at least one fit report");
  std::set<std::string> seen;
  for (const auto& r : reports) {
    if (!seen.insert(r.plate_id).second) fail(ErrorKind::InvalidInput, "duplicate plate '" + r.plate_id + "' in ranking");
    if (r.edges.size() != kCanonicalCurves.size()) {
      fail(ErrorKind::InvalidInput, "fit report for '" + r.plate_id + "' does not have five edge reports");
    }
  }
  PlateRanking out;
  std::vector<RankEntry> overall;
  for (const auto& r : reports) {
    overall.push_back({r.plate_id, r.overall_edge_mean, 0});
    std::array<double, 5> means{};
    for (std::size_t k = 0; k < 5; ++k) means[k] = r.edges[k].mean;
    out.edge_means.emplace_back(r.plate_id, means);
  }
  out.overall = rank(std::move(overall));
  for (std::size_t k = 0; k < kCanonicalCurves.size(); ++k) {
    std::vector<RankEntry> e;
    for (const auto& r : reports) e.push_back({r.plate_id, r.edges[k].mean, 0});
    out.per_edge.emplace_back(std::string(kCanonicalCurves[k]), rank(std::move(e)));
  }
  return out;
}

std::string ranking_json(const PlateRanking& ranking, const std::string& case_id) {
  auto means_of = [&](const std::string& id) -> const std::array<double, 5>& {
    for (const auto& [pid, m] : ranking.edge_means) {
      if (pid == id) return m;
    }
    fail(ErrorKind::InvalidInput, "no edge means for plate '" + id + "'");
  };
  std::string s = "{\n";
  s += "  \"schema_version\": 1,\n";
  s += "  \"case_id\": " + quote(case_id) + ",\n";
  s += "  \"basis\": \"overall_edge_mean\",\n";
  s += "  \"tie_rule\": \"equal means share the lower rank; input order preserved\",\n";
  s += "  \"ranking\": [";
  for (std::size_t i = 0; i < ranking.overall.size(); ++i) {
    const auto& e = ranking.overall[i];
    s += i ? ",\n" : "\n";
    s += "    {\"rank\": " + std::to_string(e.rank) + ", \"plate_id\": " + quote(e.plate_id) +
         ", \"overall_edge_mean\": " + util::fixed(e.mean) + ", \"edge_means\": {";
    const auto& m = means_of(e.plate_id);
    for (std::size_t k = 0; k < 5; ++k) {
      s += (k ? ", " : "") + quote(std::string(kCanonicalCurves[k])) + ": " + util::fixed(m[k]);
    }
    s += "}}";
  }
  s += "\n  ],\n";
  s += "  \"per_edge\": {";
  for (std::size_t k = 0; k < ranking.per_edge.size(); ++k) {
    const auto& [name, entries] = ranking.per_edge[k];
    s += k ? ",\n" : "\n";
    s += "    " + quote(name) + ": [";
    for (std::size_t i = 0; i < entries.size(); ++i) {
      s += (i ? ", " : "") + std::string("{\"rank\": ") + std::to_string(entries[i].rank) +
           ", \"plate_id\": " + quote(entries[i].plate_id) + ", \"mean\": " + util::fixed(entries[i].mean) + "}";
    }
    s += "]";
  }
  s += "\n  }\n}\n";
  return s;
}

}  // namespace orbitfit
