#include "orbitfit/session/api.hpp"

#include "orbitfit/error.hpp"
#include "orbitfit/util/io.hpp"

#include <algorithm>

namespace orbitfit {

namespace fs = std::filesystem;
using wire::Json;

int http_status(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return 400;
    case ErrorKind::NotFound: return 404;
    case ErrorKind::Conflict: return 409;
    case ErrorKind::Io: return 500;
    default: return 422;
  }
}

namespace {

struct MethodNotAllowed {};

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < path.size()) {
    while (i < path.size() && path[i] == '/') ++i;
    const std::size_t j = path.find('/', i);
    if (i < path.size()) out.push_back(path.substr(i, j == std::string::npos ? std::string::npos : j - i));
    if (j == std::string::npos) break;
    i = j;
  }
  return out;
}

ApiResponse ok(const Json& j) { return {200, j.dump()}; }

ApiResponse error_response(int status, std::string_view kind, const std::string& message) {
  return {status, Json{{"error", kind}, {"message", message}}.dump()};
}

Json body_json(const std::string& body) {
  if (body.find_first_not_of(" \t\r\n") == std::string::npos) return Json::object();
  Json j = wire::parse(body, "request body");
  if (!j.is_object()) fail(ErrorKind::Parse, "request body must be a JSON object");
  return j;
}

std::string actor_of(const Json& body) { return body.contains("actor") ? wire::text(body["actor"], "actor") : "api"; }

std::optional<std::uint64_t> base_seq_of(const Json& body) {
  const auto it = body.find("base_seq");
  if (it == body.end() || it->is_null()) return std::nullopt;
  if (!it->is_number_unsigned()) fail(ErrorKind::InvalidInput, "base_seq must be a non-negative integer");
  return it->get<std::uint64_t>();
}

/// Strips the envelope fields so the logged payload holds only command parameters.
Json payload_of(Json body) {
  body.erase("actor");
  body.erase("base_seq");
  return body;
}

Json landmarks_json(const LandmarkSet& set) {
  Json out = Json::array();
  for (const auto& lm : set.entries()) out.push_back(Json{{"label", lm.label}, {"position", wire::to_json(lm.position)}});
  return out;
}

Json case_summary(const Session& session) {
  const auto& g = session.geometry();
  const auto s = session.state();
  Json meshes = Json::array({Json{{"id", "bone"}, {"role", "bone"}, {"href", "/meshes/bone"}},
                             Json{{"id", "orbit"}, {"role", "reconstructed_orbit"}, {"href", "/meshes/orbit"}}});
  Json plates = Json::array();
  for (const auto& p : s->plates) {
    meshes.push_back(Json{{"id", p.plate_id}, {"role", "plate"}, {"href", "/meshes/" + p.plate_id}});
    Json curves = Json::array();
    for (const auto& c : p.edge_curves) curves.push_back(wire::to_json(c));
    plates.push_back(Json{{"plate_id", p.plate_id},
                          {"vendor", p.vendor},
                          {"size_class", p.size_class},
                          {"vertex_count", p.mesh->vertex_count()},
                          {"stop_label", p.stop_label},
                          {"stop_point", wire::to_json(p.stop_point)},
                          {"landmarks", landmarks_json(p.registration_landmarks)},
                          {"curves", curves},
                          {"curve_revisions", p.curve_history.size()},
                          {"placed", s->placements.count(p.plate_id) > 0}});
  }
  return Json{{"schema_version", kCaseSchemaVersion},
              {"case_id", g.case_id},
              {"orbit_stop_label", g.orbit_stop_label},
              {"orbit_stop", g.orbit_stop ? wire::to_json(*g.orbit_stop) : Json(nullptr)},
              {"orbit_landmarks", landmarks_json(g.orbit_landmarks)},
              {"meshes", meshes},
              {"plates", plates},
              {"event_count", s->events.size()},
              {"warnings", g.warnings}};
}

Json placements_json(const CaseState& s) {
  Json list = Json::array();
  for (const auto& [id, p] : s.placements) list.push_back(wire::to_json(p));
  return Json{{"event_count", s.events.size()}, {"placements", list}};
}

ApiResponse placement_mutation(Session& session, const std::string& action, const std::string& plate_id,
                               const std::string& body) {
  const Json j = body_json(body);
  const auto m = session.mutate({action, plate_id, payload_of(j)}, actor_of(j), base_seq_of(j));
  return ok(Json{{"event_seq", m.event.seq},
                 {"placement", wire::to_json(m.state->placements.at(plate_id))},
                 {"summary", wire::to_json(session.live_summary(*m.state, plate_id))}});
}

ApiResponse route(Session& session, const ApiOptions& options, const std::string& method,
                  const std::vector<std::string>& seg, const std::string& body,
                  const std::map<std::string, std::string>& query) {
  auto expect = [&](const char* m) {
    if (method != m) throw MethodNotAllowed{};
  };
  const std::size_t n = seg.size();
  const std::string head = n ? seg[0] : "";

  if (n == 1 && head == "health") {
    expect("GET");
    return ok(Json{{"status", "ok"}});
  }
  if (n == 1 && head == "case") {
    expect("GET");
    return ok(case_summary(session));
  }
  if (n == 2 && head == "meshes") {
    expect("GET");
    const auto& g = session.geometry();
    if (seg[1] == "bone") return ok(wire::to_json(g.bone->mesh()));
    if (seg[1] == "orbit") return ok(wire::to_json(g.orbit->mesh()));
    const auto s = session.state();
    Json j = wire::to_json(*s->plate(seg[1]).mesh);
    j["frame"] = "plate";
    return ok(j);
  }
  if (head == "placements") {
    if (n == 1) {
      expect("GET");
      return ok(placements_json(*session.state()));
    }
    const std::string& id = seg[1];
    if (n == 2) {
      if (method == "GET") {
        const auto s = session.state();
        s->plate(id);
        const auto it = s->placements.find(id);
        if (it == s->placements.end()) fail(ErrorKind::NotFound, "plate '" + id + "' has no placement");
        return ok(wire::to_json(it->second));
      }
      expect("PUT");
      const Json j = body_json(body);
      const auto m = session.mutate({"set_transform", id, payload_of(j)}, actor_of(j), base_seq_of(j));
      Json summary = wire::to_json(session.live_summary(*m.state, id));
      summary["event_seq"] = m.event.seq;
      return ok(summary);
    }
    if (n == 3) {
      static const std::map<std::string, std::string> kActions = {{"init", "init_placement"},
                                                                   {"stop-align", "stop_align"},
                                                                   {"pivot-rotate", "pivot_rotate"},
                                                                   {"nudge", "nudge"},
                                                                   {"reset", "reset"}};
      const auto it = kActions.find(seg[2]);
      if (it != kActions.end()) {
        expect("POST");
        return placement_mutation(session, it->second, id, body);
      }
    }
  }
  if (n == 4 && head == "plates" && seg[2] == "curves") {
    expect("PUT");
    const Json j = body_json(body);
    Json payload = payload_of(j);
    payload["curve"] = seg[3];
    const auto m = session.mutate({"update_curve", seg[1], payload}, actor_of(j), base_seq_of(j));
    const auto& s = m.state;
    Json out{{"event_seq", m.event.seq}, {"curve", wire::to_json(s->plate(seg[1]).curve(seg[3]))}};
    if (s->placements.count(seg[1])) {
      const auto edges = edge_distances(s->plate(seg[1]), s->placements.at(seg[1]).transform, *session.geometry().orbit,
                                        session.options().fit.samples_per_curve);
      out["edge"] = wire::to_json(edges[static_cast<std::size_t>(canonical_curve_index(seg[3]))]);
    }
    return ok(out);
  }
  if (head == "fit") {
    if (n == 2) {
      expect("GET");
      return ok(wire::to_json(session.fit(seg[1])));
    }
    if (n == 1) {
      expect("POST");
      const Json j = body_json(body);
      std::vector<FitReport> reports;
      if (j.contains("plate_ids")) {
        for (const auto& id : j["plate_ids"]) reports.push_back(session.fit(wire::text(id, "plate id")));
      } else {
        reports = session.fit_all();
      }
      Json list = Json::array();
      for (const auto& r : reports) {
        list.push_back(Json{{"plate_id", r.plate_id},
                            {"overall_edge_mean", r.overall_edge_mean},
                            {"collision_percent", r.collision.percent_text()}});
      }
      return ok(Json{{"fits", list}});
    }
  }
  if (n == 1 && head == "ranking") {
    expect("GET");
    return {200, ranking_json(session.ranking(), session.geometry().case_id)};
  }
  if (n == 1 && head == "events") {
    expect("GET");
    std::uint64_t since = 0;
    if (const auto it = query.find("since"); it != query.end()) {
      try {
        since = std::stoull(it->second);
      } catch (const std::exception&) {
        fail(ErrorKind::InvalidInput, "since must be a non-negative integer");
      }
    }
    const auto s = session.state();
    Json list = Json::array();
    for (std::size_t i = since; i < s->events.size(); ++i) list.push_back(to_json(s->events[i]));
    return ok(Json{{"event_count", s->events.size()}, {"events", list}});
  }
  if (n == 1 && head == "export") {
    expect("POST");
    const fs::path dir = session.export_outputs(options.export_dir);
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir)) names.push_back(entry.path().filename().string());
    std::sort(names.begin(), names.end());
    Json files = Json::array();
    for (const auto& name : names) files.push_back(Json{{"file", name}, {"sha256", util::sha256_file(dir / name)}});
    return ok(Json{{"directory", dir.string()}, {"files", files}});
  }
  if (n == 1 && head == "replay") {
    expect("POST");
    const Json j = body_json(body);
    std::vector<SessionEvent> events;
    for (const auto& e : wire::field(j, "events")) events.push_back(event_from_json(e));
    session.replay(events);
    return ok(placements_json(*session.state()));
  }
  if (n == 1 && head == "save") {
    expect("POST");
    session.save(options.save_dir);
    return ok(Json{{"directory", options.save_dir.string()}});
  }
  fail(ErrorKind::NotFound, "no route for " + method + " /" + [&] {
    std::string p;
    for (std::size_t i = 0; i < seg.size(); ++i) p += (i ? "/" : "") + seg[i];
    return p;
  }());
}

}  // namespace

ApiResponse handle_api(Session& session, const ApiOptions& options, const std::string& method,
                       const std::string& path, const std::string& body,
                       const std::map<std::string, std::string>& query) {
  try {
    return route(session, options, method, split_path(path), body, query);
  } catch (const MethodNotAllowed&) {
    return error_response(405, "method-not-allowed", method + " is not supported on " + path);
  } catch (const Error& e) {
    return error_response(http_status(e.kind()), to_string(e.kind()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return error_response(422, to_string(ErrorKind::InvalidInput), e.what());
  }
}

}  // namespace orbitfit
