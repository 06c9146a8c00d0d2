#pragma once

#include "orbitfit/plate/export.hpp"
#include "orbitfit/plate/fit.hpp"
#include "orbitfit/plate/ranking.hpp"
#include "orbitfit/session/case.hpp"

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>

namespace orbitfit {

// Commands (action, payload):
//   init_placement  {} for landmark registration, or {"matrix": 4x4} for an explicit pose
//   stop_align      {}
//   pivot_rotate    {"axis": [x, y, z], "angle": radians}
//   nudge           {"delta": [x, y, z], "move_pivot": false}
//   reset           {}
//   set_transform   {"matrix": 4x4}
//   update_curve    {"curve": name, "points": [[x, y, z], ...]}
struct Command {
  std::string action;
  std::string plate_id;
  wire::Json payload = wire::Json::object();
};

struct SessionOptions {
  FitOptions fit;
  /// Test mode: set_transform must keep the pivot point within pivot_tolerance.
  bool verify_pivot = false;
  double pivot_tolerance = 1e-6;
  /// Timestamp source for new events; defaults to the UTC wall clock.
  std::function<std::string()> clock;
};

std::string utc_timestamp();

/// Applies one command to `state`. Does not touch the event log.
void apply_command(const CaseGeometry& geometry, CaseState& state, const Command& command,
                   const SessionOptions& options = {});

/// Re-executes a log from the initial state. The log is kept as given.
CaseState replay_events(const CaseGeometry& geometry, const std::vector<SessionEvent>& events,
                        const SessionOptions& options = {});

/// One case, many readers. Mutations run one at a time and publish a new
/// immutable state; readers always see the last committed state.
class Session {
 public:
  explicit Session(Case c, SessionOptions options = {});

  const CaseGeometry& geometry() const { return *geometry_; }
  std::shared_ptr<const CaseState> state() const;
  Case snapshot() const;
  const SessionOptions& options() const { return options_; }

  struct Mutation {
    SessionEvent event;
    std::shared_ptr<const CaseState> state;  ///< the state this mutation committed
  };

  /// Applies and logs a command. With base_seq, Conflict unless the log
  /// still has exactly that many events.
  Mutation mutate(const Command& command, const std::string& actor,
                  std::optional<std::uint64_t> base_seq = std::nullopt);

  /// Collision report and curve means for the committed pose.
  LiveSummary live_summary(const std::string& plate_id) const;
  LiveSummary live_summary(const CaseState& state, const std::string& plate_id) const;

  /// Full report for the committed pose; cached until the plate changes.
  FitReport fit(const std::string& plate_id);
  /// Fits every placed plate in case order.
  std::vector<FitReport> fit_all();
  /// Ranks the plates whose cached fit matches the committed state.
  /// Conflict when there are none.
  PlateRanking ranking() const;

  /// fit_all + rank + export under out_dir. Returns the metrics directory.
  std::filesystem::path export_outputs(const std::filesystem::path& out_dir);

  /// Replaces the state with a replay of `events` from the initial state.
  void replay(const std::vector<SessionEvent>& events);

  void save(const std::filesystem::path& dir) const;

 private:
  struct CachedFit {
    RigidTransform transform;
    std::vector<Polyline> curves;
    FitReport report;
  };

  const Placement& placed(const CaseState& state, const std::string& plate_id) const;
  std::vector<FitReport> current_fits(const CaseState& state) const;
  void publish(std::shared_ptr<const CaseState> next);

  std::shared_ptr<const CaseGeometry> geometry_;
  SessionOptions options_;

  std::mutex mutation_mutex_;
  mutable std::mutex state_mutex_;
  std::shared_ptr<const CaseState> state_;

  mutable std::mutex cache_mutex_;
  std::map<std::string, CachedFit> fits_;
};

}  // namespace orbitfit
