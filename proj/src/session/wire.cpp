#include "orbitfit/session/wire.hpp"

#include "orbitfit/error.hpp"

#include <cmath>
#include <sstream>

namespace orbitfit::wire {

Json parse(std::string_view text, std::string_view what) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::Parse, std::string(what) + ": " + e.what());
  }
}

const Json& field(const Json& obj, std::string_view key) {
  if (!obj.is_object()) fail(ErrorKind::InvalidInput, "expected a JSON object holding '" + std::string(key) + "'");
  const auto it = obj.find(std::string(key));
  if (it == obj.end()) fail(ErrorKind::InvalidInput, "missing field '" + std::string(key) + "'");
  return *it;
}

double number(const Json& value, std::string_view what) {
  if (!value.is_number()) fail(ErrorKind::InvalidInput, std::string(what) + " must be a number");
  const double v = value.get<double>();
  if (!std::isfinite(v)) fail(ErrorKind::InvalidInput, std::string(what) + " must be finite");
  return v;
}

std::string text(const Json& value, std::string_view what) {
  if (!value.is_string()) fail(ErrorKind::InvalidInput, std::string(what) + " must be a string");
  return value.get<std::string>();
}

Json to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from_json(const Json& j, std::string_view what) {
  if (!j.is_array() || j.size() != 3) fail(ErrorKind::InvalidInput, std::string(what) + " must be [x, y, z]");
  return {number(j[0], what), number(j[1], what), number(j[2], what)};
}

Json to_json(const RigidTransform& t) {
  const Mat4 m = t.matrix();
  Json rows = Json::array();
  for (int r = 0; r < 4; ++r) rows.push_back(Json::array({m(r, 0), m(r, 1), m(r, 2), m(r, 3)}));
  return Json{{"matrix", rows}};
}

Mat4 matrix_from_json(const Json& j, std::string_view what) {
  const Json& rows = j.is_object() ? field(j, "matrix") : j;
  if (!rows.is_array() || rows.size() != 4) fail(ErrorKind::InvalidInput, std::string(what) + " must be a 4x4 matrix");
  Mat4 m;
  for (int r = 0; r < 4; ++r) {
    if (!rows[r].is_array() || rows[r].size() != 4) {
      fail(ErrorKind::InvalidInput, std::string(what) + " must be a 4x4 matrix");
    }
    for (int c = 0; c < 4; ++c) m(r, c) = number(rows[r][c], what);
  }
  return m;
}

RigidTransform rigid_from_matrix(const Mat4& m) {
  if ((m.row(3) - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > kRigidExactTol) {
    fail(ErrorKind::RejectedTransform, "bottom row of a rigid transform must be [0, 0, 0, 1]");
  }
  const Mat3 r = m.topLeftCorner<3, 3>();
  const Vec3 t = m.topRightCorner<3, 1>();
  const double defect = rotation_defect(r);
  if (defect <= kRigidExactTol) return {r, t};
  if (defect < kPolarCorrectionLimit) return {nearest_rotation(r), t};
  std::ostringstream os;
  os << "transform is not rigid: rotation defect " << defect << " exceeds " << kPolarCorrectionLimit
     << " (det " << r.determinant() << ")";
  fail(ErrorKind::RejectedTransform, os.str());
}

namespace {

Json optional_vec(const std::optional<Vec3>& v) { return v ? to_json(*v) : Json(nullptr); }

std::optional<Vec3> optional_vec_from(const Json& obj, std::string_view key) {
  const auto it = obj.find(std::string(key));
  if (it == obj.end() || it->is_null()) return std::nullopt;
  return vec3_from_json(*it, key);
}

RigidTransform stored_transform(const Json& j) {
  const Mat4 m = matrix_from_json(j, "transform");
  if (m.row(3) != Eigen::RowVector4d(0, 0, 0, 1)) fail(ErrorKind::InvalidInput, "stored transform has a bad bottom row");
  return {m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>()};
}

}  // namespace

Json to_json(const HistoryEntry& h) {
  return Json{{"seq", h.seq},
              {"action", std::string(to_string(h.action))},
              {"transform", to_json(h.transform)},
              {"pivot", optional_vec(h.pivot)},
              {"anchor", optional_vec(h.anchor)}};
}

Json to_json(const Placement& p) {
  Json history = Json::array();
  for (const auto& h : p.history) history.push_back(to_json(h));
  return Json{{"plate_id", p.plate_id},
              {"transform", to_json(p.transform)},
              {"pivot", optional_vec(p.pivot)},
              {"anchor", optional_vec(p.anchor)},
              {"history", history}};
}

Placement placement_from_json(const Json& j) {
  Placement p;
  p.plate_id = text(field(j, "plate_id"), "plate_id");
  p.transform = stored_transform(field(j, "transform"));
  p.pivot = optional_vec_from(j, "pivot");
  p.anchor = optional_vec_from(j, "anchor");
  for (const auto& h : field(j, "history")) {
    HistoryEntry e;
    e.seq = field(h, "seq").get<std::uint64_t>();
    e.action = parse_placement_action(text(field(h, "action"), "action"));
    e.transform = stored_transform(field(h, "transform"));
    e.pivot = optional_vec_from(h, "pivot");
    e.anchor = optional_vec_from(h, "anchor");
    p.history.push_back(std::move(e));
  }
  return p;
}

Json to_json(const Polyline& c) {
  Json pts = Json::array();
  for (const auto& p : c.points()) pts.push_back(to_json(p));
  return Json{{"name", c.name()}, {"points", pts}};
}

Polyline polyline_from_json(const Json& points, const std::string& name) {
  if (!points.is_array()) fail(ErrorKind::InvalidInput, "curve '" + name + "' points must be an array");
  Points pts;
  for (const auto& p : points) pts.push_back(vec3_from_json(p, "curve point"));
  return Polyline(name, std::move(pts));
}

Json to_json(const CollisionReport& r) {
  return Json{{"collision_count", r.collision_count},
              {"total_points", r.total_points},
              {"percent", r.percent()},
              {"percent_text", r.percent_text()},
              {"message", r.message()},
              {"sampling_basis", r.sampling_basis},
              {"collision_points", r.collision_points}};
}

Json to_json(const LiveSummary& s) {
  Json means = Json::object();
  for (std::size_t k = 0; k < kCanonicalCurves.size(); ++k) means[std::string(kCanonicalCurves[k])] = s.curve_means[k];
  return Json{{"plate_id", s.plate_id}, {"collision", to_json(s.collision)}, {"curve_means", means}};
}

Json to_json(const EdgeReport& e) {
  Json samples = Json::array(), projected = Json::array();
  for (const auto& p : e.sample_points) samples.push_back(to_json(p));
  for (const auto& p : e.projected_points) projected.push_back(to_json(p));
  return Json{{"curve_name", e.curve_name},
              {"mean", e.mean},
              {"point_distances", e.point_distances},
              {"sample_points", samples},
              {"projected_points", projected}};
}

Json to_json(const FitReport& r) {
  Json edges = Json::array();
  for (const auto& e : r.edges) edges.push_back(to_json(e));
  return Json{{"plate_id", r.plate_id},
              {"overall_edge_mean", r.overall_edge_mean},
              {"edges", edges},
              {"collision", to_json(r.collision)},
              {"plate_wide", r.plate_wide}};
}

Json to_json(const TriangleMesh& mesh) {
  std::vector<double> v, n;
  std::vector<std::uint32_t> t;
  v.reserve(mesh.vertex_count() * 3);
  n.reserve(mesh.vertex_count() * 3);
  for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
    for (int k = 0; k < 3; ++k) {
      v.push_back(mesh.vertices()[i][k]);
      n.push_back(mesh.vertex_normals()[i][k]);
    }
  }
  for (const auto& tri : mesh.triangles()) t.insert(t.end(), tri.begin(), tri.end());
  return Json{{"vertex_count", mesh.vertex_count()},
              {"triangle_count", mesh.triangle_count()},
              {"vertices", v},
              {"triangles", t},
              {"normals", n}};
}

}  // namespace orbitfit::wire
