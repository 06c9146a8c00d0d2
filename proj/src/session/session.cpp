#include "orbitfit/session/session.hpp"

#include "orbitfit/error.hpp"
#include "orbitfit/util/io.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <sstream>

namespace orbitfit {

namespace fs = std::filesystem;
using wire::Json;

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
  return buf;
}

namespace {

Placement& existing(CaseState& state, const std::string& plate_id, const std::string& action) {
  const auto it = state.placements.find(plate_id);
  if (it == state.placements.end()) {
    fail(ErrorKind::InvalidInput, action + ": plate '" + plate_id + "' has no placement; run init_placement first");
  }
  return it->second;
}

bool flag(const Json& payload, const char* key) {
  const auto it = payload.find(key);
  if (it == payload.end()) return false;
  if (!it->is_boolean()) fail(ErrorKind::InvalidInput, std::string(key) + " must be true or false");
  return it->get<bool>();
}

}  // namespace

void apply_command(const CaseGeometry& geometry, CaseState& state, const Command& command,
                   const SessionOptions& options) {
  const std::string& id = command.plate_id;
  const PlateModel& plate = state.plate(id);
  const Json& payload = command.payload;
  if (!payload.is_object()) fail(ErrorKind::InvalidInput, command.action + ": payload must be a JSON object");
  const std::string& a = command.action;

  if (a == "init_placement") {
    const RigidTransform t = payload.contains("matrix")
                                 ? wire::rigid_from_matrix(wire::matrix_from_json(payload, "matrix"))
                                 : initial_landmark_placement(plate, geometry.orbit_landmarks);
    state.placements.insert_or_assign(id, Placement::initialize(id, t));
  } else if (a == "stop_align") {
    if (!geometry.orbit_stop) {
      fail(ErrorKind::InvalidInput, "case has no orbit stop landmark '" + geometry.orbit_stop_label + "'");
    }
    Placement& p = existing(state, id, a);
    p = posterior_stop_align(std::move(p), plate.stop_point, *geometry.orbit_stop);
  } else if (a == "pivot_rotate") {
    Placement& p = existing(state, id, a);
    p = pivot_rotate(std::move(p), wire::vec3_from_json(wire::field(payload, "axis"), "axis"),
                     wire::number(wire::field(payload, "angle"), "angle"));
  } else if (a == "nudge") {
    Placement& p = existing(state, id, a);
    p = nudge_translate(std::move(p), wire::vec3_from_json(wire::field(payload, "delta"), "delta"),
                        flag(payload, "move_pivot"));
  } else if (a == "reset") {
    Placement& p = existing(state, id, a);
    p = reset_to_posterior_stop(std::move(p));
  } else if (a == "set_transform") {
    const RigidTransform t = wire::rigid_from_matrix(wire::matrix_from_json(payload, "matrix"));
    const auto it = state.placements.find(id);
    if (it == state.placements.end()) {
      state.placements.emplace(id, Placement::initialize(id, t));
      return;
    }
    Placement& p = it->second;
    if (options.verify_pivot && p.pivot && p.anchor) {
      const double drift = (t.apply(*p.anchor) - *p.pivot).norm();
      if (drift > options.pivot_tolerance) {
        std::ostringstream os;
        os << "transform moves the pivot point " << drift << " mm (limit " << options.pivot_tolerance << ")";
        fail(ErrorKind::RejectedTransform, os.str());
      }
    }
    p = set_transform(std::move(p), t);
  } else if (a == "update_curve") {
    const std::string name = wire::text(wire::field(payload, "curve"), "curve");
    PlateModel& editable = state.plate(id);
    editable = update_edge_curve(editable, name, wire::polyline_from_json(wire::field(payload, "points"), name));
  } else {
    fail(ErrorKind::InvalidInput, "unknown action '" + a + "'");
  }
}

CaseState replay_events(const CaseGeometry& geometry, const std::vector<SessionEvent>& events,
                        const SessionOptions& options) {
  CaseState state = initial_state(geometry);
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    if (e.seq != i) fail(ErrorKind::InvalidInput, "event " + std::to_string(i) + " has seq " + std::to_string(e.seq));
    try {
      apply_command(geometry, state, {e.action, e.plate_id, e.payload}, options);
    } catch (const Error& err) {
      fail(err.kind(), "replaying event " + std::to_string(i) + " (" + e.action + "): " + err.what());
    }
  }
  state.events = events;
  return state;
}

Session::Session(Case c, SessionOptions options)
    : geometry_(std::move(c.geometry)),
      options_(std::move(options)),
      state_(std::make_shared<const CaseState>(std::move(c.state))) {
  if (!options_.clock) options_.clock = utc_timestamp;
}

std::shared_ptr<const CaseState> Session::state() const {
  std::lock_guard lock(state_mutex_);
  return state_;
}

void Session::publish(std::shared_ptr<const CaseState> next) {
  std::lock_guard lock(state_mutex_);
  state_ = std::move(next);
}

Case Session::snapshot() const { return {geometry_, *state()}; }

Session::Mutation Session::mutate(const Command& command, const std::string& actor, std::optional<std::uint64_t> base_seq) {
  std::lock_guard lock(mutation_mutex_);
  const auto current = state();
  if (base_seq && *base_seq != current->events.size()) {
    fail(ErrorKind::Conflict, "state has moved on: client saw " + std::to_string(*base_seq) + " events, log has " +
                                  std::to_string(current->events.size()) + "; refetch and retry");
  }
  auto next = std::make_shared<CaseState>(*current);
  apply_command(*geometry_, *next, command, options_);
  SessionEvent e;
  e.seq = next->events.size();
  e.timestamp = options_.clock();
  e.actor = actor;
  e.action = command.action;
  e.plate_id = command.plate_id;
  e.payload = command.payload;
  next->events.push_back(e);
  std::shared_ptr<const CaseState> committed = std::move(next);
  publish(committed);
  return {std::move(e), std::move(committed)};
}

const Placement& Session::placed(const CaseState& state, const std::string& plate_id) const {
  state.plate(plate_id);
  const auto it = state.placements.find(plate_id);
  if (it == state.placements.end()) {
    fail(ErrorKind::InvalidInput, "plate '" + plate_id + "' has no placement; register it first");
  }
  return it->second;
}

LiveSummary Session::live_summary(const std::string& plate_id) const { return live_summary(*state(), plate_id); }

LiveSummary Session::live_summary(const CaseState& s, const std::string& plate_id) const {
  return orbitfit::live_summary(s.plate(plate_id), placed(s, plate_id).transform, *geometry_->orbit, *geometry_->bone,
                                options_.fit);
}

FitReport Session::fit(const std::string& plate_id) {
  const auto s = state();
  const PlateModel& plate = s->plate(plate_id);
  const RigidTransform t = placed(*s, plate_id).transform;
  {
    std::lock_guard lock(cache_mutex_);
    const auto it = fits_.find(plate_id);
    if (it != fits_.end() && it->second.transform == t && it->second.curves == plate.edge_curves) {
      return it->second.report;
    }
  }
  FitReport report = compute_fit(plate, t, *geometry_->orbit, *geometry_->bone, options_.fit);
  std::lock_guard lock(cache_mutex_);
  fits_.insert_or_assign(plate_id, CachedFit{t, plate.edge_curves, report});
  return report;
}

std::vector<FitReport> Session::fit_all() {
  const auto s = state();
  std::vector<FitReport> out;
  for (const auto& p : s->plates) {
    if (s->placements.count(p.plate_id)) out.push_back(fit(p.plate_id));
  }
  return out;
}

std::vector<FitReport> Session::current_fits(const CaseState& state) const {
  std::lock_guard lock(cache_mutex_);
  std::vector<FitReport> out;
  for (const auto& p : state.plates) {
    const auto placement = state.placements.find(p.plate_id);
    const auto cached = fits_.find(p.plate_id);
    if (placement == state.placements.end() || cached == fits_.end()) continue;
    if (cached->second.transform == placement->second.transform && cached->second.curves == p.edge_curves) {
      out.push_back(cached->second.report);
    }
  }
  return out;
}

PlateRanking Session::ranking() const {
  const auto fits = current_fits(*state());
  if (fits.empty()) {
    fail(ErrorKind::Conflict, "no fits computed for the current placements; compute fits first "
                              "(GET /fit/{plate_id} or POST /fit)");
  }
  return rank_plates(fits);
}

fs::path Session::export_outputs(const fs::path& out_dir) {
  const auto s = state();
  const auto reports = fit_all();
  if (reports.empty()) fail(ErrorKind::InvalidInput, "no placed plates to export; register plates first");
  const PlateRanking ranking = rank_plates(reports);
  std::vector<TriangleMesh> placed_meshes;
  placed_meshes.reserve(reports.size());
  for (const auto& r : reports) {
    placed_meshes.push_back(apply_transform(*s->plate(r.plate_id).mesh, s->placements.at(r.plate_id).transform));
  }
  ExportRequest request;
  request.case_id = geometry_->case_id;
  for (std::size_t i = 0; i < reports.size(); ++i) request.plates.push_back({&reports[i], &placed_meshes[i]});
  request.ranking = &ranking;
  request.inputs = geometry_->input_files();
  return export_fit_outputs(request, out_dir);
}

void Session::replay(const std::vector<SessionEvent>& events) {
  std::lock_guard lock(mutation_mutex_);
  auto next = std::make_shared<const CaseState>(replay_events(*geometry_, events, options_));
  publish(std::move(next));
}

void Session::save(const fs::path& dir) const { save_case(snapshot(), dir); }

}  // namespace orbitfit
