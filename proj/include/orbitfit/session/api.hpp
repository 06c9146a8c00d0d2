#pragma once

#include "orbitfit/error.hpp"
#include "orbitfit/session/session.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

namespace orbitfit {

// HTTP/JSON API. Every response body is JSON; errors are
//   {"error": "<kind>", "message": "..."}
// with 400 for malformed JSON, 404 unknown plate/route, 405 wrong method,
// 409 stale base_seq or no fits yet, 422 other contract violations, 500 I/O.
//
//   GET  /case                          case summary (plates, curves, landmarks, warnings)
//   GET  /meshes/{bone|orbit|plate_id}  {"vertices": [...], "triangles": [...], "normals": [...]}
//   GET  /placements                    {"event_count", "placements": [Placement]}
//   PUT  /placements/{id}               {"matrix": 4x4} -> live summary + "event_seq"
//   POST /placements/{id}/init          {} or {"matrix"} -> {"event_seq", "placement", "summary"}
//   POST /placements/{id}/stop-align    {}
//   POST /placements/{id}/pivot-rotate  {"axis": [x, y, z], "angle": radians}
//   POST /placements/{id}/nudge         {"delta": [x, y, z], "move_pivot": false}
//   POST /placements/{id}/reset         {}
//   PUT  /plates/{id}/curves/{name}     {"points": [[x, y, z], ...]} -> {"event_seq", "curve", "edge"?}
//   GET  /fit/{id}                      FitReport
//   POST /fit                           {"plate_ids"?: [...]} -> {"fits": [...]}
//   GET  /ranking                       ranking document (same bytes as ranking.json)
//   GET  /events?since=N                {"event_count", "events": [SessionEvent]}
//   POST /export                        {"directory", "files": [{"file", "sha256"}]}
//   POST /replay                        {"events": [...]} -> {"event_count", "placements"}
//   POST /save                          {"directory"}
// Mutating bodies may carry "actor" (default "api") and "base_seq"; a
// base_seq different from the current event count is rejected with 409.

struct ApiOptions {
  std::filesystem::path export_dir;  ///< POST /export writes here
  std::filesystem::path save_dir;    ///< POST /save writes here
};

struct ApiResponse {
  int status = 200;
  std::string body;
};

ApiResponse handle_api(Session& session, const ApiOptions& options, const std::string& method,
                       const std::string& path, const std::string& body,
                       const std::map<std::string, std::string>& query = {});

int http_status(ErrorKind kind);

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  ///< 0 picks a free port
  std::optional<std::filesystem::path> static_dir;
  ApiOptions api;
};

/// cpp-httplib front end over handle_api, plus optional static assets at "/".
class HttpServer {
 public:
  HttpServer(Session& session, ServerOptions options);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds the socket and returns the port.
  int bind();
  /// Serves until stop(); bind() must have succeeded.
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace orbitfit
