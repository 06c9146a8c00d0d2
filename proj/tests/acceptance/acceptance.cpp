// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failures, so ctest fails when any criterion does.

#include "orbitfit/error.hpp"
#include "orbitfit/mesh/spatial_index.hpp"
#include "orbitfit/plate/fit.hpp"
#include "orbitfit/plate/heatmap.hpp"
#include "orbitfit/plate/placement.hpp"
#include "orbitfit/plate/ranking.hpp"
#include "orbitfit/registration/icp.hpp"
#include "orbitfit/registration/reconstruction.hpp"
#include "orbitfit/registration/rigid_align.hpp"
#include "orbitfit/session/api.hpp"
#include "orbitfit/session/sample_case.hpp"
#include "orbitfit/synthetic.hpp"
#include "orbitfit/util/io.hpp"
#include "support/oracles.hpp"
#include "support/session_script.hpp"
#include "support/temp_dir.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>

using namespace orbitfit;
using orbitfit::testing::TempDir;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(const std::string& name, const std::function<Outcome()>& body) {
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
  std::fflush(stdout);
}

const std::string kCli = ORBITFIT_CLI_PATH;
const fs::path kSampleCase = ORBITFIT_SAMPLE_CASE;

std::string quoted(const fs::path& p) { return "'" + p.string() + "'"; }

/// Relative path -> bytes of every file under dir.
std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  if (!fs::exists(dir)) return out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).generic_string()] = util::read_text(e.path());
  }
  return out;
}

// ---------------------------------------------------------------------------

Outcome registration_recovery() {
  // Half of a symmetric skull-like surface: the x >= 0 side.
  const TriangleMesh full = synthetic::skull(40.0, 57, 70);
  std::vector<bool> keep(full.vertex_count());
  for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = full.vertices()[i].x() >= -1e-9;
  const TriangleMesh hemi = compact(full.submesh(keep));

  std::vector<Landmark> anatomical;
  for (std::size_t k = 0; k < 6; ++k) {
    anatomical.push_back({"L" + std::to_string(k), hemi.vertices()[(k * 331 + 17) % hemi.vertex_count()]});
  }

  IcpParams params;
  params.max_iterations = 200;
  params.convergence_tol = 1e-12;
  params.trim_fraction = 0.0;
  params.max_correspondence_distance = 10.0;
  params.sample_count = hemi.vertex_count();
  params.seed = 7;

  std::mt19937_64 rng(20261019);
  std::normal_distribution<double> noise(0.0, 0.1);
  double worst_rms = 0.0;
  double worst_time = 0.0;
  int ok = 0;
  for (int c = 0; c < 100; ++c) {
    const Mat3 r = oracle::random_rotation(rng, 30.0 * std::numbers::pi / 180.0);
    Vec3 t = oracle::random_point(rng, Vec3::Constant(-1), Vec3::Constant(1));
    t *= 20.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng) / std::max(t.norm(), 1e-12);
    const RigidTransform truth(r, t);
    const SpatialIndex target(apply_transform(hemi, truth));

    // Landmarks as picked on the moved surface, with 0.1 mm picking noise.
    std::vector<Landmark> picked;
    for (const auto& lm : anatomical) {
      picked.push_back({lm.label, truth.apply(lm.position) + Vec3(noise(rng), noise(rng), noise(rng))});
    }

    const auto t0 = Clock::now();
    const RigidTransform init = landmark_rigid_align(LandmarkSet(anatomical), LandmarkSet(picked));
    const auto fit = icp_rigid(hemi, target, init, params);
    const double elapsed = seconds_since(t0);

    double sq = 0.0;
    for (const auto& v : hemi.vertices()) sq += (fit.transform.apply(v) - truth.apply(v)).squaredNorm();
    const double rms = std::sqrt(sq / static_cast<double>(hemi.vertex_count()));
    worst_rms = std::max(worst_rms, rms);
    worst_time = std::max(worst_time, elapsed);
    if (rms < 1e-3 && elapsed < 5.0) ++ok;
  }
  return {ok == 100, std::to_string(ok) + "/100 cases, " + std::to_string(hemi.vertex_count()) +
                         " vertices, worst RMS " + fmt("%.3e", worst_rms) + " mm (< 1e-3), worst time " +
                         fmt("%.3f", worst_time) + " s (< 5)"};
}

Outcome cpd_refinement() {
  const MirrorPlane midline(Vec3::Zero(), Vec3::UnitX());
  const TriangleMesh skull = synthetic::skull(40.0, 31, 40, 2.0);
  // Intact ROI: everything except a crater on the warped side.
  const Vec3 crater = Vec3(30, -10, -5).normalized();
  std::vector<bool> roi(skull.vertex_count(), true);
  for (std::size_t i = 0; i < roi.size(); ++i) {
    const Vec3& v = skull.vertices()[i];
    if (v.x() > 0 && v.normalized().dot(crater) > std::cos(0.35)) roi[i] = false;
  }

  ReconstructionOptions o;
  o.icp.max_iterations = 100;
  o.icp.convergence_tol = 1e-8;
  o.icp.trim_fraction = 0.1;
  o.icp.max_correspondence_distance = 10.0;
  o.icp.sample_count = 5000;
  o.cpd_sample_count = 5000;
  o.cpd_target_sample_count = 5000;
  o.seed = 42;

  const auto rigid = reconstruct_orbit(skull, midline, roi, ReconstructionMethod::Rigid, o);
  const auto cpd = reconstruct_orbit(skull, midline, roi, ReconstructionMethod::Cpd, o);
  const auto again = reconstruct_orbit(skull, midline, roi, ReconstructionMethod::Cpd, o);

  const bool lower = cpd.residual_rms < rigid.residual_rms;
  const bool bitwise = cpd.deformation && again.deformation &&
                       cpd.deformation->weights() == again.deformation->weights() &&
                       cpd.reconstructed_orbit.vertices() == again.reconstructed_orbit.vertices() &&
                       cpd.residual_rms == again.residual_rms;
  return {lower && bitwise, "rigid " + fmt("%.6f", rigid.residual_rms) + " mm, cpd " + fmt("%.6f", cpd.residual_rms) +
                                " mm, repeat run " + (bitwise ? "bitwise identical" : "DIFFERS")};
}

Outcome distance_oracle() {
  const auto t0 = Clock::now();
  const TriangleMesh orbit =
      synthetic::height_patch(synthetic::orbit_height, -18, 18, -4, 40, 37, 45);
  const SpatialIndex index(orbit);
  std::mt19937_64 rng(5);
  Points queries;
  for (int i = 0; i < 1500; ++i) queries.push_back(oracle::random_point(rng, Vec3(-25, -10, -20), Vec3(25, 46, 25)));

  double worst = 0.0;
  const auto hits = index.closest_points(queries);
  const auto signed_d = plate_wide_distances(queries, index);
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const double brute = oracle::closest_brute_force(orbit, queries[i]).distance;
    const double brute_signed = oracle::signed_brute_force(orbit, queries[i]);
    worst = std::max({worst, std::abs(hits[i].distance - brute), std::abs(index.closest_point(queries[i]).distance - brute),
                      std::abs(signed_d[i] - brute_signed)});
  }
  const double elapsed = seconds_since(t0);
  return {orbit.triangle_count() <= 5000 && worst <= 1e-9 && elapsed < 60.0,
          std::to_string(queries.size()) + " queries, " + std::to_string(orbit.triangle_count()) +
              " triangles, max deviation " + fmt("%.3e", worst) + " mm (<= 1e-9), " + fmt("%.2f", elapsed) + " s (< 60)"};
}

Outcome collision_semantics() {
  const SpatialIndex bone(synthetic::height_solid([](double, double) { return 0.0; }, -10.0, -5, 105, -5, 105, 23, 23));
  // 100 x 100 plate vertices; vertex j * 100 + i sits at (i, j). The first 988 dip 0.5 mm into the bone.
  const TriangleMesh plate = synthetic::height_patch(
      [](double x, double y) { return std::lround(y) * 100 + std::lround(x) < 988 ? -0.5 : 0.5; }, 0, 99, 0, 99, 100,
      100);
  const auto c = detect_collisions(plate.vertices(), bone, 0.0);
  const bool format = c.collision_count == 988 && c.total_points == 10000 && c.percent_text() == "9.88";

  // Tilted plate pushed progressively deeper.
  std::size_t prev = 0;
  bool monotone = true;
  std::vector<std::size_t> counts;
  for (int k = 0; k < 20; ++k) {
    const double depth = 0.1 * k;
    Points pts;
    for (const auto& v : plate.vertices()) pts.emplace_back(v.x(), v.y(), 0.02 * v.x() + 0.01 * v.y() - depth);
    const auto ck = detect_collisions(pts, bone, 0.0);
    counts.push_back(ck.collision_count);
    if (ck.collision_count < prev) monotone = false;
    prev = ck.collision_count;
  }
  return {format && monotone, "988/10000 -> \"" + c.percent_text() + "\" (" + c.message() + "); counts over 20 depths " +
                                  std::to_string(counts.front()) + " .. " + std::to_string(counts.back()) +
                                  (monotone ? ", non-decreasing" : ", NOT monotone")};
}

Outcome edge_metric_contract() {
  synthetic::PlateShape flat;
  flat.plate_id = "flat";
  flat.vendor = "test";
  flat.size_class = "flat";
  flat.floor_bend = 0.0;
  flat.arch = 0.0;
  flat.wall_rise = 0.0;
  flat.anterior_lift = 0.0;
  const PlateModel plate = synthetic::plate_model(flat);
  const SpatialIndex orbit(synthetic::height_patch([](double, double) { return -2.0; }, -40, 40, -40, 60, 41, 51));
  const auto edges = edge_distances(plate, RigidTransform(), orbit, 10);

  std::vector<double> all;
  bool texts = edges.size() == 5;
  for (const auto& e : edges) {
    texts = texts && e.point_distances.size() == 10 && util::fixed(e.mean) == "2.000000";
    all.insert(all.end(), e.point_distances.begin(), e.point_distances.end());
  }
  const double mean50 = std::accumulate(all.begin(), all.end(), 0.0) / static_cast<double>(all.size());
  const double overall = overall_edge_mean(edges);
  const bool ok = texts && all.size() == 50 && std::abs(overall - mean50) <= 1e-12;
  return {ok, std::to_string(edges.size()) + " curves x 10 = " + std::to_string(all.size()) +
                  " distances, edge means " + (texts ? "all 2.000000" : "NOT all 2.000000") + ", |overall - mean50| = " +
                  fmt("%.1e", std::abs(overall - mean50)) + " (<= 1e-12)"};
}

Outcome pivot_invariance() {
  const Case c = load_case(kSampleCase);
  const Vec3 orbit_stop = *c.geometry->orbit_stop;
  double worst = 0.0;
  std::size_t calls = 0;
  std::mt19937_64 rng(1000);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  for (const auto& plate : c.state.plates) {
    Placement p = Placement::initialize(plate.plate_id, initial_landmark_placement(plate, c.geometry->orbit_landmarks));
    p = posterior_stop_align(p, plate.stop_point, orbit_stop);
    for (int k = 0; k < 1000; ++k) {
      const Vec3 axis = oracle::random_point(rng, Vec3::Constant(-1), Vec3::Constant(1));
      p = pivot_rotate(p, axis.norm() > 1e-6 ? axis : Vec3::UnitZ(), angle(rng));
      worst = std::max(worst, (p.transform.apply(plate.stop_point) - orbit_stop).norm());
      ++calls;
    }
  }
  return {worst <= 1e-12, std::to_string(calls) + " pivot_rotate calls, max stop drift " + fmt("%.3e", worst) +
                              " mm (<= 1e-12)"};
}

Outcome export_determinism() {
  TempDir dir("orbitfit_accept_export");
  std::vector<std::map<std::string, std::string>> runs;
  for (const char* run : {"run1", "run2"}) {
    const fs::path out = dir / run;
    if (testing::run_command(kCli + " fit " + quoted(kSampleCase) + " --out " + quoted(out)) != 0 ||
        testing::run_command(kCli + " rank " + quoted(kSampleCase) + " --out " + quoted(out / "rank")) != 0) {
      return {false, "CLI fit/rank failed"};
    }
    runs.push_back(tree(out));
  }
  const bool identical = !runs[0].empty() && runs[0] == runs[1];
  const auto& ranking_text = runs[0]["rank/ranking.json"];
  const bool same_ranking = ranking_text == runs[0]["fit_output/fit_metrics/ranking.json"];

  // Order: ascending overall mean, equal means share the lower rank, input order kept.
  const auto doc = nlohmann::json::parse(ranking_text);
  const Case c = load_case(kSampleCase);
  std::vector<std::string> case_order;
  for (const auto& p : c.state.plates) case_order.push_back(p.plate_id);
  bool ordered = doc["ranking"].size() == case_order.size();
  std::string order;
  for (std::size_t i = 0; i < doc["ranking"].size(); ++i) {
    const auto& e = doc["ranking"][i];
    order += (i ? " < " : "") + e["plate_id"].get<std::string>();
    if (i == 0) {
      ordered = ordered && e["rank"] == 1;
      continue;
    }
    const auto& prev = doc["ranking"][i - 1];
    const double m0 = prev["overall_edge_mean"], m1 = e["overall_edge_mean"];
    if (m1 < m0) ordered = false;
    if (m1 == m0) {
      const auto pos = [&](const std::string& id) { return std::find(case_order.begin(), case_order.end(), id); };
      ordered = ordered && e["rank"] == prev["rank"] && pos(prev["plate_id"]) < pos(e["plate_id"]);
    } else {
      ordered = ordered && e["rank"].get<int>() == static_cast<int>(i) + 1;
    }
  }
  return {identical && same_ranking && ordered,
          std::to_string(runs[0].size()) + " files " + (identical ? "byte-identical" : "DIFFER") +
              " across runs, ranking " + (ordered ? "ordered" : "MISORDERED") + " (" + order + ")"};
}

Outcome heatmap_anchors() {
  const bool anchors = heat_color(-5.0) == Rgb{255, 0, 0} && heat_color(0.0) == Rgb{0, 255, 0} &&
                       heat_color(5.0) == Rgb{0, 0, 255};
  Session session(load_case(kSampleCase));
  bool sums = true;
  std::string sizes;
  for (const auto& report : session.fit_all()) {
    const auto& plate = session.state()->plate(report.plate_id);
    const Histogram h = distance_histogram(report.plate_wide);
    const std::size_t binned = std::accumulate(h.counts.begin(), h.counts.end(), std::size_t{0});
    sums = sums && binned + h.underflow + h.overflow == plate.mesh->vertex_count() &&
           h.total() == plate.mesh->vertex_count();
    sizes += (sizes.empty() ? "" : ", ") + std::to_string(h.total());
  }
  return {anchors && sums, std::string("-5/0/+5 -> ") + (anchors ? "red/green/blue" : "WRONG COLORS") +
                               "; histogram totals " + sizes + (sums ? " equal vertex counts" : " DO NOT match")};
}

Outcome replay_determinism() {
  TempDir dir("orbitfit_accept_replay");
  const fs::path pristine = dir / "pristine";
  {
    Case c = load_case(kSampleCase);
    c.state = initial_state(*c.geometry);
    save_case(c, pristine);
  }

  // Record a 30-event session.
  Session live(load_case(pristine));
  for (const auto& cmd : testing::scripted_session(live, 30, 2026)) live.mutate(cmd, "recorder");
  const auto recorded = live.state();
  if (recorded->events.size() != 30) return {false, "session has " + std::to_string(recorded->events.size()) + " events"};
  live.save(dir / "recorded");
  live.export_outputs(dir / "live_export");

  // CLI replay of the saved log.
  if (testing::run_command(kCli + " replay " + quoted(dir / "recorded") + " --out " + quoted(dir / "cli_replayed")) != 0 ||
      testing::run_command(kCli + " fit " + quoted(dir / "cli_replayed") + " --out " + quoted(dir / "cli_export")) != 0) {
    return {false, "CLI replay/fit failed"};
  }
  const Case cli = load_case(dir / "cli_replayed");

  // API replay into a fresh session.
  Session api(load_case(pristine));
  wire::Json events = wire::Json::array();
  for (const auto& e : recorded->events) events.push_back(to_json(e));
  const ApiOptions options{dir / "api_export", dir / "api_saved"};
  const auto replayed = handle_api(api, options, "POST", "/replay", wire::Json{{"events", events}}.dump());
  const auto exported = handle_api(api, options, "POST", "/export", "{}");
  if (replayed.status != 200 || exported.status != 200) return {false, "API replay/export returned an error"};

  const bool cli_same = cli.state.placements == recorded->placements && cli.state.events == recorded->events;
  const bool api_same = api.state()->placements == recorded->placements;
  const auto live_tree = tree(dir / "live_export");
  const bool exports_same = !live_tree.empty() && live_tree == tree(dir / "cli_export") && live_tree == tree(dir / "api_export");
  return {cli_same && api_same && exports_same,
          "30 events; CLI placements " + std::string(cli_same ? "bitwise identical" : "DIFFER") + ", API placements " +
              (api_same ? "bitwise identical" : "DIFFER") + ", exports (" + std::to_string(live_tree.size()) + " files) " +
              (exports_same ? "identical" : "DIFFER")};
}

}  // namespace

int main() {
  report("registration recovery", registration_recovery);
  report("cpd refinement", cpd_refinement);
  report("distance oracle equivalence", distance_oracle);
  report("collision semantics", collision_semantics);
  report("edge metric contract", edge_metric_contract);
  report("pivot invariance", pivot_invariance);
  report("ranking and export determinism", export_determinism);
  report("heatmap anchors", heatmap_anchors);
  report("replay determinism", replay_determinism);
  return failures;
}
