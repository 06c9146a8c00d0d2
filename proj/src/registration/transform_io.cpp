#include "orbitfit/registration/transform_io.hpp"

#include "orbitfit/error.hpp"
#include "orbitfit/mesh/mesh_io.hpp"
#include "orbitfit/util/io.hpp"

#include <sstream>

namespace orbitfit {

namespace {

constexpr int kTransformVersion = 1;

std::string line_of(std::istringstream& in, const char* what) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    return line;
  }
  fail(ErrorKind::Parse, std::string("unexpected end of record, expected ") + what);
}

std::string keyed(std::istringstream& in, const std::string& key) {
  const auto line = line_of(in, key.c_str());
  if (line.rfind(key + " ", 0) != 0 && line != key) {
    fail(ErrorKind::Parse, "expected '" + key + "', found '" + line + "'");
  }
  return line.size() > key.size() ? line.substr(key.size() + 1) : std::string{};
}

template <int N>
Eigen::Matrix<double, N, 1> numbers(const std::string& text, const char* what) {
  std::istringstream ls(text);
  Eigen::Matrix<double, N, 1> v;
  for (int i = 0; i < N; ++i) {
    if (!(ls >> v[i])) fail(ErrorKind::Parse, std::string("bad numeric row for ") + what + ": '" + text + "'");
  }
  return v;
}

void check_version(std::istringstream& in) {
  const int version = std::stoi(keyed(in, "version"));
  if (version > kTransformVersion) {
    fail(ErrorKind::Migration, "record version " + std::to_string(version) +
                                   " is newer than supported version " + std::to_string(kTransformVersion));
  }
}

}  // namespace

std::string format_transform(const NamedTransform& record) {
  const bool rigid = std::holds_alternative<RigidTransform>(record.transform);
  const Mat4 m = rigid ? std::get<RigidTransform>(record.transform).matrix()
                       : std::get<AffineTransform>(record.transform).matrix();
  std::ostringstream os;
  os << "# orbitfit transform\nversion " << kTransformVersion << "\nname " << record.name << "\nkind "
     << (rigid ? "rigid" : "affine") << "\nmatrix\n";
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) os << (c ? " " : "") << util::exact(m(r, c));
    os << '\n';
  }
  return os.str();
}

NamedTransform parse_transform(std::string_view text) {
  std::istringstream in{std::string(text)};
  check_version(in);
  NamedTransform out;
  out.name = keyed(in, "name");
  const auto kind = keyed(in, "kind");
  keyed(in, "matrix");
  Mat4 m;
  for (int r = 0; r < 4; ++r) m.row(r) = numbers<4>(line_of(in, "matrix row"), "matrix").transpose();
  if (kind == "rigid") {
    out.transform = RigidTransform::from_matrix(m, 1e-9);
  } else if (kind == "affine") {
    out.transform = AffineTransform::from_matrix(m);
  } else {
    fail(ErrorKind::Parse, "unknown transform kind '" + kind + "'");
  }
  return out;
}

void save_transform(const NamedTransform& record, const std::filesystem::path& path) {
  util::write_text(path, format_transform(record));
}

NamedTransform load_transform(const std::filesystem::path& path) {
  try {
    return parse_transform(util::read_text(path));
  } catch (const Error& e) {
    if (e.is_io()) throw;
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::string format_deformation(const DeformationField& field) {
  const auto& n = field.normalization();
  auto vec = [](const Vec3& v) {
    return util::exact(v.x()) + " " + util::exact(v.y()) + " " + util::exact(v.z());
  };
  std::ostringstream os;
  os << "# orbitfit deformation field\n# rows: normalized source point (3), kernel weight (3)\nversion "
     << kTransformVersion << "\nbeta " << util::exact(field.beta()) << "\nsource_mean " << vec(n.source_mean)
     << "\nsource_scale " << util::exact(n.source_scale) << "\ntarget_mean " << vec(n.target_mean)
     << "\ntarget_scale " << util::exact(n.target_scale) << "\npoints " << field.source_points().rows() << '\n';
  for (Eigen::Index i = 0; i < field.source_points().rows(); ++i) {
    os << vec(field.source_points().row(i).transpose()) << ' ' << vec(field.weights().row(i).transpose()) << '\n';
  }
  return os.str();
}

DeformationField parse_deformation(std::string_view text) {
  std::istringstream in{std::string(text)};
  check_version(in);
  const double beta = numbers<1>(keyed(in, "beta"), "beta")[0];
  Normalization n;
  n.source_mean = numbers<3>(keyed(in, "source_mean"), "source_mean");
  n.source_scale = numbers<1>(keyed(in, "source_scale"), "source_scale")[0];
  n.target_mean = numbers<3>(keyed(in, "target_mean"), "target_mean");
  n.target_scale = numbers<1>(keyed(in, "target_scale"), "target_scale")[0];
  const long count = std::stol(keyed(in, "points"));
  if (count < 0) fail(ErrorKind::Parse, "negative point count");
  Eigen::MatrixX3d y(count, 3), w(count, 3);
  for (long i = 0; i < count; ++i) {
    const auto row = numbers<6>(line_of(in, "deformation row"), "deformation row");
    y.row(i) = row.head<3>().transpose();
    w.row(i) = row.tail<3>().transpose();
  }
  return {std::move(y), std::move(w), beta, n};
}

void save_deformation(const DeformationField& field, const std::filesystem::path& path) {
  util::write_text(path, format_deformation(field));
}

DeformationField load_deformation(const std::filesystem::path& path) {
  try {
    return parse_deformation(util::read_text(path));
  } catch (const Error& e) {
    if (e.is_io()) throw;
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

void save_reconstruction(const ReconstructionResult& result, const std::filesystem::path& dir) {
  save_ply(result.reconstructed_orbit, dir / "reconstructed_orbit.ply");
  NamedTransform record{"mirror_registration_" + std::string(to_string(result.method)), result.transform};
  save_transform(record, dir / "transform.txt");
  if (result.deformation) save_deformation(*result.deformation, dir / "deformation.txt");
  std::ostringstream os;
  os << "method " << to_string(result.method) << "\nresidual_rms " << util::fixed(result.residual_rms)
     << "\nrigid_residual_rms " << util::fixed(result.rigid_residual_rms) << '\n';
  util::write_text(dir / "summary.txt", os.str());
}

}  // namespace orbitfit
