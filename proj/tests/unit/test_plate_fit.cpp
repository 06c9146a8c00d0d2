#include "doctest.h"

#include "orbitfit/error.hpp"
#include "orbitfit/plate/export.hpp"
#include "orbitfit/plate/placement.hpp"
#include "orbitfit/synthetic.hpp"
#include "orbitfit/util/io.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace orbitfit;
using orbitfit::testing::TempDir;

namespace {

constexpr double kPi = std::numbers::pi;

/// Flat rectangular plate at height z over [x0, x1] x [0, 30], stop at (x0 + 12, 0, z) unless given.
PlateModel flat_plate(const std::string& id, double z, double x0 = -12.0, double x1 = 12.0,
                      Vec3 stop = Vec3(0, 0, 0)) {
  auto mesh = synthetic::height_patch([=](double, double) { return z; }, x0, x1, 0.0, 30.0, 25, 31);
  stop.z() = z;
  const LandmarkSet lms({{"stop", stop},
                         {"a", {x0 + 2, 28, z}},
                         {"b", {x1 - 2, 28, z}},
                         {"c", {x1 - 3, 4, z}}});
  auto line = [&](const std::string& name, double ax, double ay, double bx, double by) {
    return Polyline(name, {{ax, ay, z}, {0.5 * (ax + bx), 0.5 * (ay + by), z}, {bx, by, z}});
  };
  const double mid = 0.5 * (x0 + x1);
  return make_plate_model(id, "test", "flat", std::move(mesh), lms, "stop",
                          {line("anterior_floor", mid, 29, x1 - 1, 29),
                           line("anterior_medial_wall", x0 + 1, 29, mid - 1, 29),
                           line("lateral_floor", x1 - 1, 2, x1 - 1, 28),
                           line("superior_medial_wall", x0 + 1, 2, x0 + 1, 28),
                           line("floor_wall_junction", 0.5 * (x0 + mid), 2, 0.5 * (x0 + mid), 28)});
}

TriangleMesh flat_orbit(double half = 40.0, int n = 41) {
  return synthetic::height_patch([](double, double) { return 0.0; }, -half, half, -half, half, n, n);
}

/// n points spread over a plane; the first `inside` sit 1 mm below z = 0.
Points split_cloud(std::size_t n, std::size_t inside) {
  Points pts;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = -9.0 + 18.0 * static_cast<double>(i % 100) / 99.0;
    const double y = -9.0 + 18.0 * static_cast<double>(i / 100) / 99.0;
    pts.emplace_back(x, y, i < inside ? -1.0 : 1.0);
  }
  return pts;
}

Placement aligned(const PlateModel& plate, const Vec3& orbit_stop, const RigidTransform& init) {
  return posterior_stop_align(Placement::initialize(plate.plate_id, init), plate.stop_point, orbit_stop);
}

}  // namespace

TEST_SUITE("plate_model") {
  TEST_CASE("synthetic plates validate and carry five canonical curves") {
    for (const auto& shape : synthetic::sample_plate_shapes()) {
      const auto p = synthetic::plate_model(shape);
      REQUIRE(p.edge_curves.size() == 5);
      for (std::size_t i = 0; i < 5; ++i) CHECK(p.edge_curves[i].name() == kCanonicalCurves[i]);
      CHECK(p.stop_point == *p.registration_landmarks.find("stop"));
    }
  }

  TEST_CASE("missing curve is reported by name") {
    auto p = flat_plate("p", 0.0);
    std::vector<Polyline> four(p.edge_curves.begin(), p.edge_curves.end() - 1);
    try {
      make_plate_model("p", "v", "s", *p.mesh, p.registration_landmarks, "stop", four);
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::InvalidPlate);
      CHECK(std::string(e.what()).find("floor_wall_junction") != std::string::npos);
    }
  }

  TEST_CASE("curves off the surface, unknown names and missing stop are rejected") {
    auto p = flat_plate("p", 0.0);
    auto curves = p.edge_curves;
    curves[2] = Polyline("lateral_floor", {{11, 2, 1.5}, {11, 28, 1.5}});
    CHECK_THROWS_AS(make_plate_model("p", "v", "s", *p.mesh, p.registration_landmarks, "stop", curves), Error);
    curves = p.edge_curves;
    curves.push_back(Polyline("rim", {{0, 1, 0}, {1, 1, 0}}));
    CHECK_THROWS_AS(make_plate_model("p", "v", "s", *p.mesh, p.registration_landmarks, "stop", curves), Error);
    CHECK_THROWS_AS(make_plate_model("p", "v", "s", *p.mesh, p.registration_landmarks, "posterior", p.edge_curves),
                    Error);
  }

  TEST_CASE("manifest round trip and version gate") {
    TempDir dir;
    const auto plate = synthetic::plate_model(synthetic::sample_plate_shapes()[2], synthetic::vendor_frame(2));
    const auto manifest = save_plate(plate, dir.path());
    const auto back = load_plate_manifest(manifest);
    CHECK(back.plate_id == plate.plate_id);
    CHECK(back.vendor == "B");
    CHECK(back.mesh->triangle_count() == plate.mesh->triangle_count());
    for (std::size_t i = 0; i < 5; ++i) CHECK(back.edge_curves[i] == plate.edge_curves[i]);
    CHECK(plate_manifest_files(manifest).inputs.size() == 7);

    auto text = util::read_text(manifest);
    text.replace(text.find("\"schema_version\": 1"), 19, "\"schema_version\": 7");
    dir.write("future.plate.json", text);
    try {
      load_plate_manifest(dir / "future.plate.json");
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Migration);
    }
  }

  TEST_CASE("update_edge_curve keeps history and validates") {
    const auto p = flat_plate("p", 0.0);
    const Polyline shorter("lateral_floor", {{11, 2, 0}, {11, 14, 0}});
    const auto q = update_edge_curve(p, "lateral_floor", shorter);
    CHECK(q.curve("lateral_floor").points() == shorter.points());
    REQUIRE(q.curve_history.size() == 1);
    CHECK(q.curve_history[0].previous == p.curve("lateral_floor"));
    try {
      update_edge_curve(p, "lateral_rim", shorter);
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::InvalidInput);
    }
    CHECK_THROWS_AS(update_edge_curve(p, "lateral_floor", Polyline("x", {{11, 2, 3}, {11, 14, 3}})), Error);
  }
}

TEST_SUITE("placement") {
  TEST_CASE("initial landmark placement") {
    const auto plate = flat_plate("p", 0.0);
    CHECK(initial_landmark_placement(plate, plate.registration_landmarks).matrix().isApprox(Mat4::Identity(), 1e-12));

    const RigidTransform motion = RigidTransform::from_translation(Vec3(3, -4, 12)) *
                                  RigidTransform::from_axis_angle(Vec3(1, 1, 0), 0.7);
    std::vector<Landmark> moved;
    for (const auto& lm : plate.registration_landmarks.entries()) moved.push_back({lm.label, motion.apply(lm.position)});
    const auto t = initial_landmark_placement(plate, LandmarkSet(moved));
    CHECK((t.matrix() - motion.matrix()).cwiseAbs().maxCoeff() < 1e-9);

    try {
      initial_landmark_placement(plate, LandmarkSet({{"stop", {0, 0, 0}}, {"a", {1, 1, 1}}, {"zz", {3, 3, 3}}}));
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::InsufficientLandmarks);
    }
  }

  TEST_CASE("posterior stop alignment") {
    const Vec3 stop(0.5, -2, 7);
    auto p = posterior_stop_align(Placement::initialize("p", RigidTransform::identity()), stop, stop);
    CHECK(p.transform == RigidTransform::identity());
    CHECK(*p.pivot == stop);

    p = posterior_stop_align(Placement::initialize("p", RigidTransform::from_translation(Vec3(1, 1, 1))),
                             Vec3::Zero(), Vec3::Zero());
    CHECK(p.transform.translation() == Vec3::Zero());

    std::mt19937_64 rng(100);
    for (int i = 0; i < 100; ++i) {
      const RigidTransform init(oracle::random_rotation(rng, kPi),
                                oracle::random_point(rng, Vec3::Constant(-80), Vec3::Constant(80)));
      const Vec3 plate_stop = oracle::random_point(rng, Vec3::Constant(-30), Vec3::Constant(30));
      const Vec3 orbit_stop = oracle::random_point(rng, Vec3::Constant(-60), Vec3::Constant(60));
      const auto a = posterior_stop_align(Placement::initialize("p", init), plate_stop, orbit_stop);
      CHECK((a.transform.apply(plate_stop) - orbit_stop).norm() < 1e-12);
      CHECK(a.transform.rotation() == init.rotation());
    }
  }

  TEST_CASE("pivot rotation keeps the stop fixed") {
    const Vec3 plate_stop(1, 2, 3), orbit_stop(-4, 30, 12);
    std::mt19937_64 rng(7);
    auto p = aligned(flat_plate("p", 0.0), orbit_stop, RigidTransform(oracle::random_rotation(rng, 2.0), Vec3(5, 5, 5)));
    p = posterior_stop_align(p, plate_stop, orbit_stop);

    const auto before = p.transform;
    auto zero = pivot_rotate(p, Vec3::UnitZ(), 0.0);
    CHECK(zero.transform == before);

    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> ang(-kPi, kPi);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      p = pivot_rotate(p, Vec3(g(rng), g(rng), g(rng)), ang(rng));
      worst = std::max(worst, (p.transform.apply(plate_stop) - orbit_stop).norm());
    }
    CHECK(worst < 1e-12);
    CHECK(rotation_defect(p.transform.rotation()) < 1e-9);
  }

  TEST_CASE("two 45 degree turns equal one 90 degree turn") {
    auto p = aligned(flat_plate("p", 0.0), Vec3(3, 4, 5), RigidTransform::identity());
    const Vec3 axis = Vec3(0.2, -1, 0.4).normalized();
    const auto twice = pivot_rotate(pivot_rotate(p, axis, kPi / 4), axis, kPi / 4);
    const auto once = pivot_rotate(p, axis, kPi / 2);
    CHECK((twice.transform.matrix() - once.transform.matrix()).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("rotation needs a pivot") {
    try {
      pivot_rotate(Placement::initialize("p", RigidTransform::identity()), Vec3::UnitX(), 0.1);
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::MissingPivot);
    }
  }

  TEST_CASE("nudges") {
    auto p = aligned(flat_plate("p", 0.0), Vec3(1, 1, 1), RigidTransform::from_axis_angle(Vec3::UnitY(), 0.3));
    CHECK(nudge_translate(p, Vec3::Zero()).transform == p.transform);
    const auto back = nudge_translate(nudge_translate(p, Vec3(0, 0, 0.5)), Vec3(0, 0, -0.5));
    CHECK((back.transform.matrix() - p.transform.matrix()).cwiseAbs().maxCoeff() < 1e-12);

    // Pivot stays at the orbital stop: whatever plate point sits there keeps sitting there.
    auto moved = nudge_translate(p, Vec3(0.4, -0.2, 0.3));
    CHECK(*moved.pivot == *p.pivot);
    const Vec3 at_pivot = moved.transform.inverse().apply(*moved.pivot);
    moved = pivot_rotate(moved, Vec3(1, 2, 3), 0.8);
    CHECK((moved.transform.apply(at_pivot) - *p.pivot).norm() < 1e-12);

    const auto carried = nudge_translate(p, Vec3(0.4, -0.2, 0.3), true);
    CHECK((*carried.pivot - (*p.pivot + Vec3(0.4, -0.2, 0.3))).norm() < 1e-15);
  }

  TEST_CASE("reset restores the stop-aligned pose bitwise and is idempotent") {
    auto p = aligned(flat_plate("p", 0.0), Vec3(1, 1, 1), RigidTransform::from_axis_angle(Vec3::UnitY(), 0.3));
    const auto snapshot = p.transform;
    p = pivot_rotate(nudge_translate(p, Vec3(1, 0, 0)), Vec3::UnitZ(), 0.2);
    p = reset_to_posterior_stop(p);
    CHECK(p.transform == snapshot);
    const auto again = reset_to_posterior_stop(p);
    CHECK(again.transform == snapshot);
    CHECK(again.history.size() == p.history.size() + 1);
    CHECK(again.history.back().action == PlacementAction::Reset);

    try {
      reset_to_posterior_stop(Placement::initialize("p", RigidTransform::identity()));
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::MissingHistory);
    }
  }

  TEST_CASE("history sequence numbers are dense") {
    auto p = aligned(flat_plate("p", 0.0), Vec3::Zero(), RigidTransform::identity());
    p = set_transform(p, RigidTransform::from_translation(Vec3(0, 0, 1)));
    for (std::size_t i = 0; i < p.history.size(); ++i) CHECK(p.history[i].seq == i);
    CHECK(parse_placement_action(to_string(PlacementAction::SetTransform)) == PlacementAction::SetTransform);
  }
}

TEST_SUITE("detect_collisions") {
  const auto bone_sphere = synthetic::uv_sphere(Vec3::Zero(), 20.0, 40, 60);

  TEST_CASE("plate outside the bone") {
    const SpatialIndex bone(bone_sphere);
    const auto plate = synthetic::uv_sphere(Vec3(50, 0, 0), 3.0, 8, 12);
    const auto r = detect_collisions(plate.vertices(), bone);
    CHECK(r.collision_count == 0);
    CHECK(r.percent_text() == "0.00");
  }

  TEST_CASE("small sphere inside the bone") {
    const SpatialIndex bone(bone_sphere);
    const auto plate = synthetic::uv_sphere(Vec3(2, 1, 0), 3.0, 8, 12);
    const auto r = detect_collisions(plate.vertices(), bone);
    CHECK(r.collision_count == plate.vertex_count());
    CHECK(r.percent_text() == "100.00");
  }

  TEST_CASE("988 of 10000 reports 9.88 percent") {
    const SpatialIndex bone(flat_orbit(20.0, 21));
    const auto r = detect_collisions(split_cloud(10000, 988), bone);
    CHECK(r.collision_count == 988);
    CHECK(r.total_points == 10000);
    CHECK(r.percent_text() == "9.88");
    CHECK(r.percent() == 9.88);
    CHECK(r.message() == "There are 988 collision points. This is approximately 9.88 % of points in the plate.");
    CHECK(r.collision_points.front() == 0);
    CHECK(r.collision_points.back() == 987);
  }

  TEST_CASE("percent equals rounded 100*count/total") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 2000; ++i) {
      const std::size_t total = 1 + rng() % 100000;
      const std::size_t count = rng() % (total + 1);
      const auto r = make_collision_report(std::vector<std::uint32_t>(count, 0), total);
      // Oracle: long double arithmetic, half-up at two decimals.
      const long double exact = 100.0L * static_cast<long double>(count) / static_cast<long double>(total);
      const auto hundredths = static_cast<std::int64_t>(std::floor(exact * 100.0L + 0.5L));
      CHECK(r.percent_hundredths == hundredths);
    }
  }

  TEST_CASE("tolerance ignores shallow contact") {
    const SpatialIndex bone(flat_orbit(20.0, 21));
    const auto pts = split_cloud(100, 50);
    CHECK(detect_collisions(pts, bone, 0.5).collision_count == 50);
    CHECK(detect_collisions(pts, bone, 1.5).collision_count == 0);
  }

  TEST_CASE("percent is monotone as a plate moves into the bone") {
    const SpatialIndex bone(bone_sphere);
    const auto plate = synthetic::sphere_cap(8.0, 1.0, 8, 16);
    double last = -1.0;
    for (int step = 0; step < 20; ++step) {
      const Vec3 offset(30.0 - 1.5 * step, 0.3, -0.2);
      const auto moved = apply_transform(
          apply_transform(plate, RigidTransform::from_axis_angle(Vec3::UnitY(), kPi / 2)),
          RigidTransform::from_translation(offset));
      const auto r = detect_collisions(moved.vertices(), bone);
      CHECK(r.percent() >= last);
      last = r.percent();
    }
    CHECK(last > 0.0);
  }
}

TEST_SUITE("plate_wide_distances") {
  TEST_CASE("coincident and offset plates") {
    const SpatialIndex orbit(flat_orbit());
    const auto plate = flat_plate("p", 0.0);
    for (double d : plate_wide_distances(plate.mesh->vertices(), orbit)) CHECK(std::abs(d) < 1e-9);
    const auto up = apply_transform(plate.mesh->vertices(), RigidTransform::from_translation(Vec3(0, 0, 1)));
    for (double d : plate_wide_distances(up, orbit)) CHECK(std::abs(d - 1.0) < 1e-9);
    const auto down = apply_transform(plate.mesh->vertices(), RigidTransform::from_translation(Vec3(0, 0, -1)));
    for (double d : plate_wide_distances(down, orbit)) CHECK(std::abs(d + 1.0) < 1e-9);
  }

  TEST_CASE("matches exhaustive scan on a curved case") {
    const auto orbit = synthetic::height_solid(synthetic::orbit_height, 0.0, -20, 20, -10, 40, 31, 41);
    const SpatialIndex index(orbit);
    const auto plate = synthetic::plate_model(synthetic::sample_plate_shapes()[0]);
    REQUIRE(plate.mesh->vertex_count() >= 600);
    const RigidTransform pose = RigidTransform::from_translation(synthetic::orbit_stop() + Vec3(0, 0, 0.4)) *
                                RigidTransform::from_axis_angle(Vec3(1, 0.2, 0), 0.05);
    const auto placed = apply_transform(plate.mesh->vertices(), pose);
    const auto d = plate_wide_distances(placed, index);
    for (std::size_t i = 0; i < placed.size(); ++i) {
      CHECK(std::abs(d[i] - oracle::signed_brute_force(orbit, placed[i])) < 1e-9);
    }
  }

  TEST_CASE("equivariant under a common rigid motion") {
    const auto orbit = synthetic::height_patch(synthetic::orbit_height, -20, 20, -10, 40, 31, 41);
    const auto plate = synthetic::plate_model(synthetic::sample_plate_shapes()[1]);
    const RigidTransform pose = RigidTransform::from_translation(synthetic::orbit_stop() + Vec3(0, 0, 0.2));
    const RigidTransform g(Eigen::AngleAxisd(1.3, Vec3(1, -2, 0.5).normalized()).toRotationMatrix(), Vec3(9, -40, 3));
    const auto a = plate_wide_distances(apply_transform(plate.mesh->vertices(), pose), SpatialIndex(orbit));
    const auto b = plate_wide_distances(apply_transform(plate.mesh->vertices(), g * pose),
                                        SpatialIndex(apply_transform(orbit, g)));
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-9);
  }
}

TEST_SUITE("edge_distances") {
  TEST_CASE("curves on the orbit give zero") {
    const SpatialIndex orbit(flat_orbit());
    const auto edges = edge_distances(flat_plate("p", 0.0), RigidTransform::identity(), orbit);
    REQUIRE(edges.size() == 5);
    for (const auto& e : edges) CHECK(std::abs(e.mean) < 1e-9);
  }

  TEST_CASE("plate 2 mm above a plane: 50 distances of exactly 2") {
    const SpatialIndex orbit(flat_orbit());
    const auto r = compute_fit(flat_plate("p", 2.0), RigidTransform::identity(), orbit, orbit);
    std::size_t n = 0;
    for (const auto& e : r.edges) {
      CHECK(e.point_distances.size() == 10);
      CHECK(util::fixed(e.mean) == "2.000000");
      for (double d : e.point_distances) CHECK(std::abs(d - 2.0) < 1e-12);
      n += e.point_distances.size();
    }
    CHECK(n == 50);
    CHECK(util::fixed(r.overall_edge_mean) == "2.000000");
  }

  TEST_CASE("curved case matches brute-force projections") {
    const auto orbit = synthetic::height_patch(synthetic::orbit_height, -20, 20, -10, 40, 41, 51);
    const SpatialIndex index(orbit);
    const auto plate = synthetic::plate_model(synthetic::sample_plate_shapes()[3]);
    const RigidTransform pose = RigidTransform::from_translation(synthetic::orbit_stop() + Vec3(0.3, 0, 0.5)) *
                                RigidTransform::from_axis_angle(Vec3(0, 1, 0), 0.08);
    const auto edges = edge_distances(plate, pose, index);
    double total = 0.0;
    for (std::size_t k = 0; k < 5; ++k) {
      const auto samples = resample_polyline(apply_transform(plate.edge_curves[k], pose), 10).points();
      double sum = 0.0;
      for (std::size_t i = 0; i < 10; ++i) {
        const auto brute = oracle::closest_brute_force(orbit, samples[i]);
        CHECK(std::abs(edges[k].point_distances[i] - brute.distance) < 1e-9);
        CHECK((edges[k].projected_points[i] - brute.point).norm() < 1e-9);
        sum += brute.distance;
      }
      CHECK(std::abs(edges[k].mean - sum / 10.0) < 1e-12);
      total += sum;
    }
    CHECK(std::abs(overall_edge_mean(edges) - total / 50.0) < 1e-12);

    auto shuffled = edges;
    std::reverse(shuffled.begin(), shuffled.end());
    CHECK(overall_edge_mean(shuffled) == overall_edge_mean(edges));
  }

  TEST_CASE("replacing a curve with itself changes nothing; shortened curve still has 10 samples") {
    const SpatialIndex orbit(flat_orbit());
    const auto p = flat_plate("p", 1.0);
    const auto same = update_edge_curve(p, "lateral_floor", p.curve("lateral_floor"));
    const auto a = edge_distances(p, RigidTransform::identity(), orbit);
    const auto b = edge_distances(same, RigidTransform::identity(), orbit);
    for (std::size_t k = 0; k < 5; ++k) CHECK(a[k].point_distances == b[k].point_distances);

    const auto trimmed = update_edge_curve(p, "lateral_floor", Polyline("lateral_floor", {{11, 2, 1}, {11, 9, 1}}));
    CHECK(edge_distances(trimmed, RigidTransform::identity(), orbit)[2].point_distances.size() == 10);
  }

  TEST_CASE("trimming the lateral margin allows a closer pose") {
    // Orbit floor flat medially, rising laterally beyond x = 16. The plate spans x in [0, 24]
    // with its stop on the medial edge, so without trimming it must roll up to clear the rise.
    auto rise = [](double x, double) { return x > 16.0 ? x - 16.0 : 0.0; };
    const auto orbit = synthetic::height_patch(rise, -10, 40, -10, 40, 101, 101);
    const SpatialIndex index(orbit);
    auto plate = flat_plate("p", 0.0, 0.0, 24.0, Vec3(0, 15, 0));
    const Vec3 stop(0, 15, 0);

    auto clear_angle = [&](const PlateModel& model, double max_x) {
      // Smallest roll about the y axis (1e-3 rad steps) with no plate vertex below the orbit.
      for (int k = 0; k < 2000; ++k) {
        auto pl = pivot_rotate(aligned(model, stop, RigidTransform::identity()), Vec3::UnitY(), -1e-3 * k);
        Points kept;
        for (const auto& v : model.mesh->vertices()) {
          if (v.x() <= max_x) kept.push_back(pl.transform.apply(v));
        }
        if (detect_collisions(kept, index, 1e-9).collision_count == 0) return pl;
      }
      FAIL("no clearing pose");
      return Placement{};
    };

    const auto before_pose = clear_angle(plate, 24.0);
    const double before = compute_fit(plate, before_pose.transform, index, index).overall_edge_mean;

    const auto trimmed = update_edge_curve(plate, "lateral_floor", Polyline("lateral_floor", {{14, 2, 0}, {14, 28, 0}}));
    const auto after_pose = clear_angle(trimmed, 15.0);
    const double after = compute_fit(trimmed, after_pose.transform, index, index).overall_edge_mean;
    CHECK(after < before);
    CHECK(after_pose.transform.rotation() != before_pose.transform.rotation());
  }
}

TEST_SUITE("generate_heatmap") {
  TEST_CASE("color anchors") {
    CHECK(heat_color(-5.0) == Rgb{255, 0, 0});
    CHECK(heat_color(0.0) == Rgb{0, 255, 0});
    CHECK(heat_color(5.0) == Rgb{0, 0, 255});
    CHECK(heat_color(-50.0) == Rgb{255, 0, 0});
    CHECK(heat_color(50.0) == Rgb{0, 0, 255});
    CHECK(heat_color(-2.5) == Rgb{128, 128, 0});
    CHECK(heat_color(1.0, {-2.0, 2.0}) == Rgb{0, 128, 128});
  }

  TEST_CASE("all-zero distances are green; histogram conserves counts") {
    TempDir dir;
    const auto mesh = flat_plate("p", 0.0).mesh;
    const std::vector<double> zeros(mesh->vertex_count(), 0.0);
    generate_heatmap(*mesh, zeros, dir / "h.ply", dir / "h.csv");
    const auto ply = util::read_text(dir / "h.ply");
    CHECK(ply.find("property uchar red") != std::string::npos);
    CHECK(ply.find(" 0 255 0\n") != std::string::npos);
    CHECK(ply.find(" 255 0 0\n") == std::string::npos);
    const auto h = distance_histogram(zeros);
    CHECK(h.total() == mesh->vertex_count());
    CHECK(h.counts.size() == 40);
    CHECK(h.counts[20] == mesh->vertex_count());
  }

  TEST_CASE("histogram binning rules") {
    const std::vector<double> d = {-7.0, -5.0, -4.76, -0.25, 0.0, 4.99, 5.0, 5.01, 12.0};
    const auto h = distance_histogram(d);
    CHECK(h.underflow == 1);
    CHECK(h.overflow == 2);
    CHECK(h.counts[0] == 2);
    CHECK(h.counts[19] == 1);
    CHECK(h.counts[20] == 1);
    CHECK(h.counts[39] == 2);
    CHECK(h.total() == d.size());
    const auto csv = h.to_csv();
    CHECK(csv.rfind("bin_lo,bin_hi,count\n-inf,-5.000000,1\n-5.000000,-4.750000,2\n", 0) == 0);
    CHECK(csv.find("5.000000,inf,2\n") != std::string::npos);

    std::mt19937_64 rng(1);
    std::normal_distribution<double> g(0.0, 4.0);
    std::vector<double> many(5000);
    for (auto& x : many) x = g(rng);
    CHECK(distance_histogram(many).total() == many.size());
  }

  TEST_CASE("invalid range and length mismatch") {
    TempDir dir;
    const auto mesh = flat_plate("p", 0.0).mesh;
    const std::vector<double> zeros(mesh->vertex_count(), 0.0);
    try {
      generate_heatmap(*mesh, zeros, dir / "h.ply", dir / "h.csv", {1.0, 1.0});
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::InvalidInput);
    }
    CHECK_THROWS_AS(generate_heatmap(*mesh, std::vector<double>(3, 0.0), dir / "h.ply", dir / "h.csv"), Error);
  }
}

TEST_SUITE("rank_plates") {
  FitReport report(const std::string& id, double mean) {
    FitReport r;
    r.plate_id = id;
    for (auto name : kCanonicalCurves) {
      EdgeReport e;
      e.curve_name = std::string(name);
      e.point_distances.assign(10, mean);
      e.mean = mean;
      r.edges.push_back(e);
    }
    r.overall_edge_mean = mean;
    return r;
  }

  TEST_CASE("single plate is rank 1") {
    const auto r = rank_plates({report("a", 1.2)});
    REQUIRE(r.overall.size() == 1);
    CHECK(r.overall[0].rank == 1);
  }

  TEST_CASE("0.736 ranks ahead of 0.761") {
    const auto r = rank_plates({report("second", 0.761), report("first", 0.736)});
    CHECK(r.overall[0].plate_id == "first");
    CHECK(r.overall[0].rank == 1);
    CHECK(r.overall[1].plate_id == "second");
    CHECK(r.overall[1].rank == 2);
  }

  TEST_CASE("ties share the lower rank and keep input order") {
    const auto r = rank_plates({report("b", 0.9), report("x", 0.5), report("a", 0.9), report("c", 1.0)});
    CHECK(r.overall[0].plate_id == "x");
    CHECK(r.overall[1].plate_id == "b");
    CHECK(r.overall[2].plate_id == "a");
    CHECK(r.overall[1].rank == 2);
    CHECK(r.overall[2].rank == 2);
    CHECK(r.overall[3].rank == 4);
  }

  TEST_CASE("order does not depend on input permutation for distinct means") {
    std::vector<FitReport> in = {report("a", 0.3), report("b", 0.1), report("c", 0.7), report("d", 0.2)};
    const auto base = rank_plates(in).overall;
    std::mt19937_64 rng(5);
    for (int i = 0; i < 20; ++i) {
      std::shuffle(in.begin(), in.end(), rng);
      CHECK(rank_plates(in).overall == base);
    }
  }

  TEST_CASE("per-edge rankings and errors") {
    auto a = report("a", 1.0), b = report("b", 2.0);
    a.edges[2].mean = 3.0;
    const auto r = rank_plates({a, b});
    CHECK(r.per_edge[2].first == "lateral_floor");
    CHECK(r.per_edge[2].second[0].plate_id == "b");
    CHECK(r.per_edge[0].second[0].plate_id == "a");
    CHECK_THROWS_AS(rank_plates({}), Error);
    CHECK_THROWS_AS(rank_plates({a, a}), Error);
  }

  TEST_CASE("ranking json is ordered by rank with fixed decimals") {
    const auto text = ranking_json(rank_plates({report("late", 0.761), report("early", 0.736)}), "case-1");
    CHECK(text.find("\"overall_edge_mean\": 0.736000") != std::string::npos);
    CHECK(text.find("\"early\"") < text.find("\"late\""));
    const auto j = nlohmann::json::parse(text);
    CHECK(j["ranking"][0]["rank"] == 1);
    CHECK(j["ranking"][1]["plate_id"] == "late");
  }
}

TEST_SUITE("export_fit_outputs") {
  TEST_CASE("two plates produce two file sets, re-export is byte-identical") {
    const SpatialIndex orbit(flat_orbit());
    const auto p1 = flat_plate("p1", 1.0), p2 = flat_plate("p2", 0.5);
    const auto r1 = compute_fit(p1, RigidTransform::identity(), orbit, orbit);
    const auto r2 = compute_fit(p2, RigidTransform::identity(), orbit, orbit);
    const auto ranking = rank_plates({r1, r2});
    TempDir a, b, inputs;
    const auto in = inputs.write("case.json", "{}");
    ExportRequest req{"c", {{&r1, p1.mesh.get()}, {&r2, p2.mesh.get()}}, &ranking, {in}, {}};
    const auto da = export_fit_outputs(req, a.path());
    const auto db = export_fit_outputs(req, b.path());
    std::vector<std::string> names;
    for (const auto& e : std::filesystem::directory_iterator(da)) names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    CHECK(names.size() == 10);
    for (const auto& n : names) CHECK(util::read_text(da / n) == util::read_text(db / n));
    CHECK(std::filesystem::exists(da / "p1_heatmap.ply"));
    CHECK(util::read_text(da / "p2_plate_wide_distances.csv").rfind("vertex_id,signed_mm\n0,0.500000\n", 0) == 0);
    const auto edges = util::read_text(da / "p1_edge_distances.csv");
    CHECK(edges.rfind("curve,sample_index,distance_mm,x,y,z\nanterior_floor,0,1.000000,", 0) == 0);
    const auto j = nlohmann::json::parse(util::read_text(da / "ranking.json"));
    CHECK(j["ranking"][0]["plate_id"] == "p2");
    const auto m = nlohmann::json::parse(util::read_text(da / "manifest.json"));
    CHECK(m["inputs"][0]["file"] == "case.json");
    CHECK(m["inputs"][0]["sha256"] == util::sha256_hex("{}"));
  }
}
