// orbitfit command-line tool. Exit codes: 0 success, 1 I/O failure, 2 contract
// violation or bad usage.

#include "orbitfit/error.hpp"
#include "orbitfit/mesh/landmarks.hpp"
#include "orbitfit/mesh/mesh_io.hpp"
#include "orbitfit/registration/transform_io.hpp"
#include "orbitfit/session/api.hpp"
#include "orbitfit/session/config.hpp"
#include "orbitfit/session/sample_case.hpp"
#include "orbitfit/util/io.hpp"

#include "CLI11.hpp"

#include <csignal>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace orbitfit;
using wire::Json;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out;
};

RunConfig run_config(const Globals& g) {
  RunConfig c = g.config.empty() ? RunConfig{} : load_run_config(g.config);
  if (g.seed) apply_seed(c, *g.seed);
  return c;
}

Vec3 vec3_arg(const std::vector<double>& v, const char* name) {
  if (v.size() != 3) fail(ErrorKind::InvalidInput, std::string(name) + " needs three comma-separated numbers");
  return {v[0], v[1], v[2]};
}

std::vector<bool> read_roi(const fs::path& path, std::size_t vertex_count) {
  std::istringstream in(util::read_text(path));
  std::vector<bool> mask(vertex_count, false);
  std::string token;
  while (in >> token) {
    std::size_t used = 0;
    unsigned long long id = 0;
    try {
      id = std::stoull(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size()) fail(ErrorKind::Parse, path.string() + ": '" + token + "' is not a vertex index");
    if (id >= vertex_count) {
      fail(ErrorKind::InvalidInput, path.string() + ": vertex " + token + " out of range (" +
                                        std::to_string(vertex_count) + " vertices)");
    }
    mask[id] = true;
  }
  return mask;
}

void print_fit_line(const FitReport& r) {
  std::cout << r.plate_id << ": overall_edge_mean " << util::fixed(r.overall_edge_mean) << " mm; "
            << r.collision.message() << '\n';
}

HttpServer* g_server = nullptr;
extern "C" void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"orbitfit: orbit reconstruction, plate placement and fit analysis"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "seed for every sampler");
  app.add_option("--config", g.config, "JSON run configuration (icp, cpd, fit sections)");
  app.add_option("--out", g.out, "output directory");

  std::string case_dir, actor = "cli";
  std::vector<std::string> plate_ids;
  auto case_arg = [&](CLI::App* sub) {
    sub->add_option("case", case_dir, "case directory or case.json")->required();
  };
  auto plate_arg = [&](CLI::App* sub, bool required) {
    auto* o = sub->add_option("--plate", plate_ids, "plate id");
    if (required) o->required();
  };
  auto actor_arg = [&](CLI::App* sub) { sub->add_option("--actor", actor, "name recorded in the event log"); };

  // reconstruct
  std::string bone_path, method = "rigid", roi_path;
  std::vector<double> plane = {0, 0, 0, 1, 0, 0};
  auto* reconstruct = app.add_subcommand("reconstruct", "mirror a skull and register it onto itself");
  reconstruct->add_option("--bone", bone_path, "skull mesh (stl or ply)")->required();
  reconstruct->add_option("--method", method, "rigid, affine or cpd")->check(CLI::IsMember({"rigid", "affine", "cpd"}));
  reconstruct->add_option("--plane", plane, "mirror plane px,py,pz,nx,ny,nz")->delimiter(',')->expected(6);
  reconstruct->add_option("--roi", roi_path, "whitespace-separated vertex ids of intact bone");

  auto* reg = app.add_subcommand("register", "landmark placement plus posterior stop alignment");
  case_arg(reg);
  plate_arg(reg, false);
  actor_arg(reg);

  auto* fit = app.add_subcommand("fit", "compute fit reports and export fit_output/fit_metrics");
  case_arg(fit);

  auto* rank = app.add_subcommand("rank", "rank placed plates and write ranking.json");
  case_arg(rank);

  std::string host = "127.0.0.1", static_dir;
  int port = 8080;
  bool verify_pivot = false;
  auto* serve = app.add_subcommand("serve", "run the HTTP API");
  case_arg(serve);
  serve->add_option("--host", host);
  serve->add_option("--port", port)->check(CLI::Range(0, 65535));
  serve->add_option("--static", static_dir, "directory of viewer assets served at /");
  serve->add_flag("--verify-pivot", verify_pivot, "reject transforms that move the pivot point (test mode)");

  std::string events_path;
  auto* replay = app.add_subcommand("replay", "re-execute an event log from the initial case state");
  case_arg(replay);
  replay->add_option("--events", events_path, "event log (default: the case's events.ndjson)");

  auto* stop = app.add_subcommand("stop-align", "posterior stop alignment");
  case_arg(stop);
  plate_arg(stop, true);
  actor_arg(stop);

  std::vector<double> axis_v, delta_v;
  double angle = 0.0, angle_deg = 0.0;
  auto* rotate = app.add_subcommand("rotate", "rotate about the pivot");
  case_arg(rotate);
  plate_arg(rotate, true);
  actor_arg(rotate);
  rotate->add_option("--axis", axis_v, "x,y,z")->delimiter(',')->expected(3)->required();
  auto* angle_opt = rotate->add_option("--angle", angle, "radians");
  auto* angle_deg_opt = rotate->add_option("--angle-deg", angle_deg, "degrees");
  angle_opt->excludes(angle_deg_opt);

  bool move_pivot = false;
  auto* nudge = app.add_subcommand("nudge", "translate the plate");
  case_arg(nudge);
  plate_arg(nudge, true);
  actor_arg(nudge);
  nudge->add_option("--delta", delta_v, "x,y,z mm")->delimiter(',')->expected(3)->required();
  nudge->add_flag("--move-pivot", move_pivot);

  auto* reset = app.add_subcommand("reset", "return to the posterior stop alignment");
  case_arg(reset);
  plate_arg(reset, true);
  actor_arg(reset);

  std::string matrix_path;
  auto* set_t = app.add_subcommand("set-transform", "replace a plate pose");
  case_arg(set_t);
  plate_arg(set_t, true);
  actor_arg(set_t);
  set_t->add_option("--matrix", matrix_path, "JSON {\"matrix\": 4x4} or transform text file")->required();

  std::string curve_name, curve_path;
  auto* curve = app.add_subcommand("curve", "replace an edge curve (plate frame)");
  case_arg(curve);
  plate_arg(curve, true);
  actor_arg(curve);
  curve->add_option("--name", curve_name)->required();
  curve->add_option("--points", curve_path, "markups JSON or fcsv point list")->required();

  std::string sample_dir;
  bool no_register = false;
  auto* sample = app.add_subcommand("make-sample", "write the synthetic demo case");
  sample->add_option("dir", sample_dir)->required();
  sample->add_flag("--no-register", no_register, "leave plates unplaced");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    const RunConfig config = run_config(g);
    SessionOptions session_options;
    session_options.fit = config.fit;
    auto open_session = [&] { return Session(load_case(case_dir), session_options); };
    auto save_target = [&]() -> fs::path {
      if (!g.out.empty()) return g.out;
      return fs::is_directory(case_dir) ? fs::path(case_dir) : fs::path(case_dir).parent_path();
    };
    auto single_mutation = [&](const Command& cmd) {
      Session s = open_session();
      s.mutate(cmd, actor);
      s.save(save_target());
      const auto st = s.state();
      if (st->placements.count(cmd.plate_id)) {
        const auto summary = s.live_summary(cmd.plate_id);
        std::cout << cmd.plate_id << ": " << summary.collision.message() << '\n';
      }
    };
    auto only_plate = [&]() -> const std::string& {
      if (plate_ids.size() != 1) fail(ErrorKind::InvalidInput, "exactly one --plate is required");
      return plate_ids.front();
    };

    if (*reconstruct) {
      if (g.out.empty()) fail(ErrorKind::InvalidInput, "reconstruct needs --out");
      const TriangleMesh skull = load_mesh(bone_path);
      std::optional<std::vector<bool>> roi;
      if (!roi_path.empty()) roi = read_roi(roi_path, skull.vertex_count());
      const MirrorPlane mirror({plane[0], plane[1], plane[2]}, {plane[3], plane[4], plane[5]});
      const auto result = reconstruct_orbit(skull, mirror, roi, parse_reconstruction_method(method),
                                            config.reconstruction);
      std::error_code ec;
      fs::create_directories(g.out, ec);
      if (ec) fail(ErrorKind::Io, g.out + ": " + ec.message());
      save_reconstruction(result, g.out);
      std::cout << "method " << method << " residual_rms " << util::fixed(result.residual_rms) << " mm (rigid "
                << util::fixed(result.rigid_residual_rms) << " mm)\n";
    } else if (*reg) {
      Session s = open_session();
      register_plates(s, plate_ids, actor);
      s.save(save_target());
      const auto state = s.state();
      for (const auto& [id, p] : state->placements) {
        std::cout << id << ": " << s.live_summary(id).collision.message() << '\n';
      }
    } else if (*fit) {
      if (g.out.empty()) fail(ErrorKind::InvalidInput, "fit needs --out");
      Session s = open_session();
      const fs::path dir = s.export_outputs(g.out);
      for (const auto& r : s.fit_all()) print_fit_line(r);
      std::cout << "wrote " << dir.string() << '\n';
    } else if (*rank) {
      Session s = open_session();
      s.fit_all();
      const std::string text = ranking_json(s.ranking(), s.geometry().case_id);
      if (!g.out.empty()) {
        std::error_code ec;
        fs::create_directories(g.out, ec);
        util::write_text(fs::path(g.out) / "ranking.json", text);
      }
      for (const auto& e : s.ranking().overall) {
        std::cout << e.rank << ' ' << e.plate_id << ' ' << util::fixed(e.mean) << '\n';
      }
    } else if (*serve) {
      Session s = open_session();
      ServerOptions options;
      options.host = host;
      options.port = port;
      if (!static_dir.empty()) options.static_dir = static_dir;
      options.api.export_dir = g.out.empty() ? s.geometry().root / "exports" : fs::path(g.out);
      options.api.save_dir = s.geometry().root;
      SessionOptions verified = session_options;
      verified.verify_pivot = verify_pivot;
      Session live(s.snapshot(), verified);
      HttpServer server(live, options);
      const int bound = server.bind();
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      for (const auto& w : live.geometry().warnings) std::cerr << "warning: " << w << '\n';
      std::cout << "serving case " << live.geometry().case_id << " on http://" << host << ':' << bound << std::endl;
      server.run();
      g_server = nullptr;
    } else if (*replay) {
      const Case loaded = load_case(case_dir);
      const auto events = events_path.empty() ? loaded.state.events : parse_events(util::read_text(events_path));
      Session s(Case{loaded.geometry, initial_state(*loaded.geometry)}, session_options);
      s.replay(events);
      const fs::path target = save_target();
      s.save(target);
      std::cout << "replayed " << events.size() << " events; placements.json sha256 "
                << util::sha256_file(target / "placements.json") << '\n';
    } else if (*stop) {
      single_mutation({"stop_align", only_plate(), Json::object()});
    } else if (*rotate) {
      if (angle_deg_opt->count()) angle = angle_deg * std::numbers::pi / 180.0;
      const Vec3 axis = vec3_arg(axis_v, "--axis");
      single_mutation({"pivot_rotate", only_plate(), Json{{"axis", wire::to_json(axis)}, {"angle", angle}}});
    } else if (*nudge) {
      const Vec3 delta = vec3_arg(delta_v, "--delta");
      single_mutation({"nudge", only_plate(), Json{{"delta", wire::to_json(delta)}, {"move_pivot", move_pivot}}});
    } else if (*reset) {
      single_mutation({"reset", only_plate(), Json::object()});
    } else if (*set_t) {
      const std::string text = util::read_text(matrix_path);
      Mat4 m;
      if (text.find_first_not_of(" \t\r\n") != std::string::npos && text[text.find_first_not_of(" \t\r\n")] == '{') {
        m = wire::matrix_from_json(wire::parse(text, matrix_path), "matrix");
      } else {
        const auto record = parse_transform(text);
        const auto* rigid = std::get_if<RigidTransform>(&record.transform);
        if (!rigid) fail(ErrorKind::RejectedTransform, matrix_path + " holds an affine transform");
        m = rigid->matrix();
      }
      Json rows = Json::array();
      for (int r = 0; r < 4; ++r) rows.push_back(Json::array({m(r, 0), m(r, 1), m(r, 2), m(r, 3)}));
      single_mutation({"set_transform", only_plate(), Json{{"matrix", rows}}});
    } else if (*curve) {
      Json points = Json::array();
      for (const auto& p : load_point_list(curve_path)) points.push_back(wire::to_json(p.position));
      single_mutation({"update_curve", only_plate(), Json{{"curve", curve_name}, {"points", points}}});
    } else if (*sample) {
      const fs::path manifest = write_sample_case(sample_dir);
      if (!no_register) {
        Session s(load_case(manifest), session_options);
        register_plates(s, {}, "make-sample");
        s.save(sample_dir);
      }
      std::cout << "wrote " << manifest.string() << '\n';
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return e.is_io() ? 1 : 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error (io-error): " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
