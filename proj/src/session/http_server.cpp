#include "orbitfit/error.hpp"
#include "orbitfit/session/api.hpp"

#include "httplib.h"

#include <atomic>

namespace orbitfit {

struct HttpServer::Impl {
  Session& session;
  ServerOptions options;
  httplib::Server server;
  bool bound = false;
  std::atomic<bool> started{false};

  Impl(Session& s, ServerOptions o) : session(s), options(std::move(o)) {}

  void handle(const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> query;
    for (const auto& [k, v] : req.params) query.emplace(k, v);
    const ApiResponse r = handle_api(session, options.api, req.method, req.path, req.body, query);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  }
};

HttpServer::HttpServer(Session& session, ServerOptions options)
    : impl_(std::make_unique<Impl>(session, std::move(options))) {
  auto& srv = impl_->server;
  if (impl_->options.static_dir && !srv.set_mount_point("/", impl_->options.static_dir->string())) {
    fail(ErrorKind::Io, "static asset directory " + impl_->options.static_dir->string() + " does not exist");
  }
  auto handler = [this](const httplib::Request& req, httplib::Response& res) { impl_->handle(req, res); };
  srv.Get(".*", handler);
  srv.Put(".*", handler);
  srv.Post(".*", handler);
  srv.Delete(".*", handler);
  srv.Patch(".*", handler);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
  auto& o = impl_->options;
  if (o.port == 0) {
    o.port = impl_->server.bind_to_any_port(o.host);
    impl_->bound = o.port > 0;
  } else {
    impl_->bound = impl_->server.bind_to_port(o.host, o.port);
  }
  if (!impl_->bound) fail(ErrorKind::Io, "cannot bind " + o.host + ":" + std::to_string(o.port));
  return o.port;
}

void HttpServer::run() {
  if (!impl_->bound) fail(ErrorKind::Io, "server is not bound");
  impl_->started = true;
  impl_->server.listen_after_bind();
}

void HttpServer::stop() {
  if (!impl_ || !impl_->started) return;
  impl_->server.wait_until_ready();
  impl_->server.stop();
}

}  // namespace orbitfit
