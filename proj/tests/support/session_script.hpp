#pragma once

#include "orbitfit/session/session.hpp"
#include "orbitfit/session/wire.hpp"

#include <cstdlib>
#include <random>
#include <string>
#include <vector>

namespace orbitfit::testing {

/// Placement and curve commands that are valid in sequence: each plate is
/// registered and stop-aligned first, then random edits follow.
inline std::vector<Command> scripted_session(const Session& session, std::size_t count, std::uint64_t seed) {
  using wire::Json;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const auto state = session.state();
  std::vector<std::string> ids;
  for (const auto& p : state->plates) ids.push_back(p.plate_id);
  ids.resize(std::min<std::size_t>(ids.size(), 2));

  std::vector<Command> out;
  for (const auto& id : ids) {
    out.push_back({"init_placement", id, Json::object()});
    out.push_back({"stop_align", id, Json::object()});
  }
  std::size_t k = 0;
  while (out.size() < count) {
    const std::string& id = ids[k++ % ids.size()];
    const Vec3 v(unit(rng), unit(rng), unit(rng));
    switch (rng() % 6) {
      case 0:
      case 1:
        out.push_back({"pivot_rotate", id, Json{{"axis", wire::to_json(v)}, {"angle", 0.05 * unit(rng)}}});
        break;
      case 2:
        out.push_back({"nudge", id, Json{{"delta", wire::to_json(0.2 * v)}, {"move_pivot", rng() % 4 == 0}}});
        break;
      case 3:
        out.push_back({"reset", id, Json::object()});
        break;
      case 4: {
        // An arbitrary near-identity pose, as a client might send.
        const Mat3 r = Eigen::AngleAxisd(0.03 * unit(rng), v.normalized()).toRotationMatrix();
        Json rows = Json::array();
        for (int i = 0; i < 4; ++i) rows.push_back(Json::array());
        for (int i = 0; i < 3; ++i) {
          for (int j = 0; j < 3; ++j) rows[i].push_back(r(i, j));
          rows[i].push_back(0.1 * unit(rng));
        }
        rows[3] = Json::array({0.0, 0.0, 0.0, 1.0});
        out.push_back({"set_transform", id, Json{{"matrix", rows}}});
        break;
      }
      default: {
        const auto& curve = state->plate(id).curve("lateral_floor").points();
        Json pts = Json::array();
        const std::size_t keep = 2 + rng() % (curve.size() - 1);
        for (std::size_t i = 0; i < keep; ++i) pts.push_back(wire::to_json(curve[i]));
        out.push_back({"update_curve", id, Json{{"curve", "lateral_floor"}, {"points", pts}}});
        break;
      }
    }
  }
  return out;
}

/// Runs a command line through the shell; returns the exit status.
inline int run_command(const std::string& command) {
  const int status = std::system((command + " >/dev/null 2>&1").c_str());
  if (status == -1 || !WIFEXITED(status)) return -1;
  return WEXITSTATUS(status);
}

}  // namespace orbitfit::testing
