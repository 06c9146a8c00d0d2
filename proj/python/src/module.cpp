#include "orbitfit/error.hpp"
#include "orbitfit/mesh/landmarks.hpp"
#include "orbitfit/mesh/mesh_io.hpp"
#include "orbitfit/mesh/spatial_index.hpp"
#include "orbitfit/plate/heatmap.hpp"
#include "orbitfit/registration/icp.hpp"
#include "orbitfit/registration/reconstruction.hpp"
#include "orbitfit/registration/rigid_align.hpp"
#include "orbitfit/session/config.hpp"
#include "orbitfit/session/sample_case.hpp"
#include "orbitfit/session/session.hpp"
#include "orbitfit/session/wire.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace orbitfit;
using wire::Json;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Points points_from(const Array& a) {
  if (a.ndim() != 2 || a.shape(1) != 3) throw py::value_error("expected an (N, 3) array");
  const auto r = a.unchecked<2>();
  Points out(static_cast<std::size_t>(r.shape(0)));
  for (py::ssize_t i = 0; i < r.shape(0); ++i) out[i] = Vec3(r(i, 0), r(i, 1), r(i, 2));
  return out;
}

Array array_from(const Points& pts) {
  Array a({static_cast<py::ssize_t>(pts.size()), py::ssize_t{3}});
  auto w = a.mutable_unchecked<2>();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (int k = 0; k < 3; ++k) w(i, k) = pts[i][k];
  }
  return a;
}

Array array_from(const Mat4& m) {
  Array a({py::ssize_t{4}, py::ssize_t{4}});
  auto w = a.mutable_unchecked<2>();
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) w(i, j) = m(i, j);
  }
  return a;
}

Mat4 matrix_from(const Array& a) {
  if (a.ndim() != 2 || a.shape(0) != 4 || a.shape(1) != 4) throw py::value_error("expected a 4x4 matrix");
  const auto r = a.unchecked<2>();
  Mat4 m;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) m(i, j) = r(i, j);
  }
  return m;
}

Vec3 vec3_from(const std::array<double, 3>& v) { return {v[0], v[1], v[2]}; }

py::object to_python(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

Json from_python(const py::object& o) {
  if (o.is_none()) return Json::object();
  return wire::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>(), "payload");
}

TriangleMesh mesh_from(const Array& vertices, const py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>& faces) {
  if (faces.ndim() != 2 || faces.shape(1) != 3) throw py::value_error("expected an (M, 3) face array");
  const auto f = faces.unchecked<2>();
  std::vector<Triangle> tris(static_cast<std::size_t>(f.shape(0)));
  for (py::ssize_t i = 0; i < f.shape(0); ++i) {
    for (int k = 0; k < 3; ++k) {
      if (f(i, k) < 0) throw py::value_error("negative vertex index");
      tris[i][k] = static_cast<std::uint32_t>(f(i, k));
    }
  }
  return TriangleMesh(points_from(vertices), std::move(tris));
}

py::array_t<std::uint32_t> faces_of(const TriangleMesh& mesh) {
  py::array_t<std::uint32_t> a({static_cast<py::ssize_t>(mesh.triangle_count()), py::ssize_t{3}});
  auto w = a.mutable_unchecked<2>();
  for (std::size_t i = 0; i < mesh.triangle_count(); ++i) {
    for (int k = 0; k < 3; ++k) w(i, k) = mesh.triangles()[i][k];
  }
  return a;
}

LandmarkSet landmarks_from(const std::map<std::string, std::array<double, 3>>& named) {
  std::vector<Landmark> entries;
  for (const auto& [label, p] : named) entries.push_back({label, vec3_from(p)});
  return LandmarkSet(std::move(entries));
}

IcpParams icp_params_from(const py::dict& kw) {
  IcpParams p;
  for (const auto& [key, value] : kw) {
    const auto k = key.cast<std::string>();
    if (k == "max_iterations") p.max_iterations = value.cast<int>();
    else if (k == "convergence_tol") p.convergence_tol = value.cast<double>();
    else if (k == "trim_fraction") p.trim_fraction = value.cast<double>();
    else if (k == "max_correspondence_distance") p.max_correspondence_distance = value.cast<double>();
    else if (k == "sample_count") p.sample_count = value.cast<std::size_t>();
    else if (k == "seed") p.seed = value.cast<std::uint64_t>();
    else throw py::type_error("unknown ICP parameter '" + k + "'");
  }
  p.validate();
  return p;
}

class PySession {
 public:
  PySession(const std::filesystem::path& path, bool verify_pivot) {
    SessionOptions o;
    o.verify_pivot = verify_pivot;
    session_ = std::make_unique<Session>(load_case(path), o);
  }

  py::dict mutate(const std::string& action, const std::string& plate_id, const py::object& payload,
                  const std::string& actor, std::optional<std::size_t> base_seq) {
    const auto m = session_->mutate({action, plate_id, from_python(payload)}, actor, base_seq);
    py::dict out;
    out["event"] = to_python(to_json(m.event));
    const auto it = m.state->placements.find(plate_id);
    out["placement"] = it == m.state->placements.end() ? py::none() : to_python(wire::to_json(it->second));
    return out;
  }

  py::object placements() const {
    Json j = Json::object();
    for (const auto& [id, p] : session_->state()->placements) j[id] = wire::to_json(p);
    return to_python(j);
  }

  py::object events() const {
    Json j = Json::array();
    for (const auto& e : session_->state()->events) j.push_back(to_json(e));
    return to_python(j);
  }

  void replay(const py::object& events) {
    const Json j = from_python(events);
    if (!j.is_array()) throw py::type_error("events must be a list");
    std::vector<SessionEvent> log;
    for (const auto& e : j) log.push_back(event_from_json(e));
    session_->replay(log);
  }

  std::vector<std::string> plate_ids() const {
    std::vector<std::string> ids;
    for (const auto& p : session_->state()->plates) ids.push_back(p.plate_id);
    return ids;
  }

  Session& get() { return *session_; }

 private:
  std::unique_ptr<Session> session_;
};

}  // namespace

PYBIND11_MODULE(_orbitfit, m) {
  m.doc() = "Orbital plate fitting: meshes, registration, plate fit metrics and planning sessions.";

  // Errors surface as OrbitfitError with a `kind` attribute ("invalid-input", "io", ...).
  py::exception<Error>(m, "OrbitfitError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const py::object type = py::module_::import("orbitfit._orbitfit").attr("OrbitfitError");
      py::object instance = type(e.what());
      instance.attr("kind") = std::string(to_string(e.kind()));
      PyErr_SetObject(type.ptr(), instance.ptr());
    }
  });

  py::class_<TriangleMesh>(m, "Mesh")
      .def(py::init(&mesh_from), py::arg("vertices"), py::arg("faces"))
      .def_property_readonly("vertices", [](const TriangleMesh& mesh) { return array_from(mesh.vertices()); })
      .def_property_readonly("faces", &faces_of)
      .def_property_readonly("normals", [](const TriangleMesh& mesh) { return array_from(mesh.vertex_normals()); })
      .def_property_readonly("vertex_count", &TriangleMesh::vertex_count)
      .def_property_readonly("triangle_count", &TriangleMesh::triangle_count)
      .def("is_watertight", &TriangleMesh::is_watertight)
      .def("surface_area", &TriangleMesh::surface_area)
      .def("transformed", [](const TriangleMesh& mesh, const Array& matrix) {
        return apply_transform(mesh, RigidTransform::from_matrix(matrix_from(matrix)));
      });

  m.def("load_mesh", [](const std::filesystem::path& path) { return load_mesh(path); }, py::arg("path"));
  m.def(
      "save_mesh",
      [](const TriangleMesh& mesh, const std::filesystem::path& path) {
        if (path.extension() == ".ply") save_ply(mesh, path);
        else save_stl_binary(mesh, path);
      },
      py::arg("mesh"), py::arg("path"), "Binary STL, or PLY when the path ends in .ply.");

  py::class_<SpatialIndex>(m, "SpatialIndex")
      .def(py::init<TriangleMesh>(), py::arg("mesh"))
      .def(
          "closest_points",
          [](const SpatialIndex& index, const Array& queries) {
            const auto hits = index.closest_points(points_from(queries));
            Points pts;
            py::array_t<double> dist(static_cast<py::ssize_t>(hits.size()));
            py::array_t<double> signed_dist(static_cast<py::ssize_t>(hits.size()));
            py::array_t<std::uint32_t> tri(static_cast<py::ssize_t>(hits.size()));
            auto d = dist.mutable_unchecked<1>();
            auto s = signed_dist.mutable_unchecked<1>();
            auto t = tri.mutable_unchecked<1>();
            for (std::size_t i = 0; i < hits.size(); ++i) {
              pts.push_back(hits[i].point);
              d(i) = hits[i].distance;
              s(i) = hits[i].signed_distance;
              t(i) = hits[i].triangle_id;
            }
            py::dict out;
            out["points"] = array_from(pts);
            out["distances"] = dist;
            out["signed_distances"] = signed_dist;
            out["triangles"] = tri;
            return out;
          },
          py::arg("queries"));

  m.def(
      "landmark_rigid_align",
      [](const std::map<std::string, std::array<double, 3>>& source,
         const std::map<std::string, std::array<double, 3>>& target) {
        return array_from(landmark_rigid_align(landmarks_from(source), landmarks_from(target)).matrix());
      },
      py::arg("source"), py::arg("target"), "Least-squares rigid motion between landmarks matched by label.");

  m.def(
      "icp_rigid",
      [](const Array& source, const TriangleMesh& target, const std::optional<Array>& init, const py::kwargs& kw) {
        const SpatialIndex index(target);
        const RigidTransform start = init ? RigidTransform::from_matrix(matrix_from(*init)) : RigidTransform();
        const auto r = icp_rigid(points_from(source), index, start, icp_params_from(kw));
        py::dict out;
        out["transform"] = array_from(r.transform.matrix());
        out["residual_rms"] = r.residual_rms;
        out["iterations"] = r.iterations;
        out["converged"] = r.converged;
        out["rms_history"] = r.rms_history;
        return out;
      },
      py::arg("source"), py::arg("target"), py::arg("init") = py::none());

  m.def(
      "reconstruct_orbit",
      [](const TriangleMesh& skull, const std::array<double, 3>& plane_point, const std::array<double, 3>& plane_normal,
         const std::string& method, const std::optional<std::vector<bool>>& roi, const std::optional<std::string>& config,
         std::optional<std::uint64_t> seed) {
        RunConfig rc = config ? parse_run_config(*config) : RunConfig{};
        if (seed) apply_seed(rc, *seed);
        const auto r = reconstruct_orbit(skull, MirrorPlane(vec3_from(plane_point), vec3_from(plane_normal)), roi,
                                         parse_reconstruction_method(method), rc.reconstruction);
        py::dict out;
        out["method"] = std::string(to_string(r.method));
        out["transform"] = std::visit([](const auto& t) { return array_from(t.matrix()); }, r.transform);
        out["orbit"] = r.reconstructed_orbit;
        out["residual_rms"] = r.residual_rms;
        out["rigid_residual_rms"] = r.rigid_residual_rms;
        return out;
      },
      py::arg("skull"), py::arg("plane_point"), py::arg("plane_normal"), py::arg("method") = "rigid",
      py::arg("roi") = py::none(), py::arg("config") = py::none(), py::arg("seed") = py::none(),
      "Mirror the skull across the plane and register the mirror back. `config` is run-config JSON text.");

  m.def(
      "heat_color",
      [](double d) {
        const Rgb c = heat_color(d);
        return py::make_tuple(c[0], c[1], c[2]);
      },
      py::arg("distance"));
  m.def(
      "distance_histogram",
      [](const std::vector<double>& distances) {
        const Histogram h = distance_histogram(distances);
        py::dict out;
        out["counts"] = h.counts;
        out["underflow"] = h.underflow;
        out["overflow"] = h.overflow;
        out["bin_width"] = h.bin_width;
        out["total"] = h.total();
        return out;
      },
      py::arg("distances"));

  m.def("write_sample_case", &write_sample_case, py::arg("dir"), "Writes the synthetic demo case; returns case.json.");

  py::class_<PySession>(m, "Session")
      .def(py::init<const std::filesystem::path&, bool>(), py::arg("case"), py::arg("verify_pivot") = false)
      .def_property_readonly("case_id", [](PySession& s) { return s.get().geometry().case_id; })
      .def_property_readonly("plate_ids", &PySession::plate_ids)
      .def("mutate", &PySession::mutate, py::arg("action"), py::arg("plate_id"), py::arg("payload") = py::none(),
           py::arg("actor") = "python", py::arg("base_seq") = py::none())
      .def(
          "register",
          [](PySession& s, const std::vector<std::string>& ids, const std::string& actor) {
            register_plates(s.get(), ids, actor);
          },
          py::arg("plate_ids") = std::vector<std::string>{}, py::arg("actor") = "python")
      .def("placements", &PySession::placements)
      .def("events", &PySession::events)
      .def("live_summary", [](PySession& s, const std::string& id) { return to_python(wire::to_json(s.get().live_summary(id))); })
      .def("fit", [](PySession& s, const std::string& id) { return to_python(wire::to_json(s.get().fit(id))); })
      .def("fit_all",
           [](PySession& s) {
             Json j = Json::array();
             for (const auto& r : s.get().fit_all()) j.push_back(wire::to_json(r));
             return to_python(j);
           })
      .def("ranking", [](PySession& s) { return to_python(wire::parse(ranking_json(s.get().ranking(), s.get().geometry().case_id), "ranking")); })
      .def("ranking_json", [](PySession& s) { return ranking_json(s.get().ranking(), s.get().geometry().case_id); })
      .def("export", [](PySession& s, const std::filesystem::path& out) { return s.get().export_outputs(out); },
           py::arg("out_dir"))
      .def("replay", &PySession::replay, py::arg("events"))
      .def("save", [](PySession& s, const std::filesystem::path& dir) { s.get().save(dir); }, py::arg("dir"));
}
