#include "orbitfit/mesh/mesh_io.hpp"

#include "orbitfit/error.hpp"
#include "orbitfit/util/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <sstream>

namespace orbitfit {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void parse_fail(std::size_t offset, const std::string& what) {
  fail(ErrorKind::Parse, what + " at byte offset " + std::to_string(offset));
}

/// Whitespace tokenizer that remembers where each token starts.
class Tokenizer {
 public:
  explicit Tokenizer(std::string_view text) : text_(text) {}

  bool next(std::string_view& token) {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ >= text_.size()) return false;
    start_ = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    token = text_.substr(start_, pos_ - start_);
    return true;
  }

  std::string_view expect(std::string_view what) {
    std::string_view token;
    if (!next(token)) parse_fail(text_.size(), "unexpected end of file, expected '" + std::string(what) + "'");
    return token;
  }

  void expect_keyword(std::string_view keyword) {
    auto token = expect(keyword);
    if (token != keyword) {
      parse_fail(start_, "expected '" + std::string(keyword) + "', found '" + std::string(token) + "'");
    }
  }

  double number() {
    auto token = expect("number");
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
      parse_fail(start_, "invalid number '" + std::string(token) + "'");
    }
    return value;
  }

  std::size_t token_start() const { return start_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t start_ = 0;
};

TriangleMesh finish_soup(const Points& soup, const MeshLoadOptions& options,
                         std::vector<std::string>& warnings) {
  TriangleMesh welded = mesh_from_soup(soup, options.weld_tolerance);
  if (welded.dropped_degenerate() > 0) {
    warnings.push_back("dropped " + std::to_string(welded.dropped_degenerate()) +
                       " degenerate facet(s)");
  }
  TriangleMesh mesh = compact(welded);
  if (mesh.empty()) fail(ErrorKind::InvalidInput, "mesh has no non-degenerate triangles");
  return mesh;
}

float read_f32(const std::uint8_t* p) {
  float v;
  std::memcpy(&v, p, sizeof v);  // little-endian hosts only
  return v;
}

}  // namespace

TriangleMesh parse_stl_binary(std::span<const std::uint8_t> bytes, const MeshLoadOptions& options,
                              std::vector<std::string>& warnings) {
  if (bytes.size() < 84) parse_fail(bytes.size(), "binary STL shorter than 84-byte header");
  std::uint32_t count = 0;
  std::memcpy(&count, bytes.data() + 80, 4);
  const std::size_t expected = 84 + static_cast<std::size_t>(count) * 50;
  if (bytes.size() < expected) {
    parse_fail(bytes.size(), "binary STL truncated: header declares " + std::to_string(count) +
                                 " facets (" + std::to_string(expected) + " bytes)");
  }
  if (bytes.size() > expected) {
    warnings.push_back(std::to_string(bytes.size() - expected) + " trailing bytes ignored");
  }
  Points soup;
  soup.reserve(static_cast<std::size_t>(count) * 3);
  for (std::uint32_t f = 0; f < count; ++f) {
    const std::uint8_t* rec = bytes.data() + 84 + static_cast<std::size_t>(f) * 50;
    for (int v = 0; v < 3; ++v) {
      const std::uint8_t* p = rec + 12 + v * 12;
      Vec3 point(read_f32(p), read_f32(p + 4), read_f32(p + 8));
      if (!point.allFinite()) {
        parse_fail(static_cast<std::size_t>(p - bytes.data()), "non-finite vertex coordinate");
      }
      soup.push_back(point);
    }
  }
  return finish_soup(soup, options, warnings);
}

TriangleMesh parse_stl_ascii(std::string_view text, const MeshLoadOptions& options,
                             std::vector<std::string>& warnings) {
  Tokenizer tok(text);
  tok.expect_keyword("solid");
  Points soup;
  std::string_view token;
  // The solid name is free text up to the first "facet".
  while (true) {
    if (!tok.next(token)) parse_fail(text.size(), "unexpected end of file inside solid");
    if (token == "facet" || token == "endsolid") break;
  }
  while (token == "facet") {
    tok.expect_keyword("normal");
    tok.number();
    tok.number();
    tok.number();
    tok.expect_keyword("outer");
    tok.expect_keyword("loop");
    for (int v = 0; v < 3; ++v) {
      tok.expect_keyword("vertex");
      const double x = tok.number();
      const double y = tok.number();
      const double z = tok.number();
      soup.emplace_back(x, y, z);
    }
    tok.expect_keyword("endloop");
    tok.expect_keyword("endfacet");
    if (!tok.next(token)) parse_fail(text.size(), "missing 'endsolid'");
  }
  if (token != "endsolid") {
    parse_fail(tok.token_start(), "expected 'facet' or 'endsolid', found '" + std::string(token) + "'");
  }
  if (soup.empty()) fail(ErrorKind::InvalidInput, "STL contains no facets");
  return finish_soup(soup, options, warnings);
}

MeshLoadResult parse_ply(std::string_view text) {
  struct Property {
    std::string name;
    bool is_list = false;
  };
  struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<Property> props;
  };

  std::size_t pos = 0;
  auto next_line = [&](std::size_t& line_start) -> std::string_view {
    line_start = pos;
    const auto end = text.find('\n', pos);
    std::string_view line = text.substr(pos, end == std::string_view::npos ? text.size() - pos : end - pos);
    pos = end == std::string_view::npos ? text.size() : end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
  };

  std::size_t line_start = 0;
  if (next_line(line_start) != "ply") parse_fail(0, "missing 'ply' magic");
  std::vector<Element> elements;
  bool ascii = false;
  while (true) {
    if (pos >= text.size()) parse_fail(pos, "PLY header not terminated by end_header");
    std::string line(next_line(line_start));
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "end_header") break;
    if (key == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt != "ascii") parse_fail(line_start, "unsupported PLY format '" + fmt + "' (ascii only)");
      ascii = true;
    } else if (key == "element") {
      Element e;
      ls >> e.name >> e.count;
      if (!ls) parse_fail(line_start, "malformed element line");
      elements.push_back(std::move(e));
    } else if (key == "property") {
      if (elements.empty()) parse_fail(line_start, "property before any element");
      Property p;
      std::string type;
      ls >> type;
      if (type == "list") {
        std::string count_type, item_type;
        ls >> count_type >> item_type;
        p.is_list = true;
      }
      ls >> p.name;
      if (!ls) parse_fail(line_start, "malformed property line");
      elements.back().props.push_back(std::move(p));
    } else if (key == "comment" || key == "obj_info" || key.empty()) {
      continue;
    } else {
      parse_fail(line_start, "unknown PLY header keyword '" + key + "'");
    }
  }
  if (!ascii) parse_fail(0, "PLY header lacks a format line");

  MeshLoadResult result;
  Points vertices;
  std::vector<Triangle> triangles;
  std::vector<double> scalars;
  bool has_scalar = false;

  for (const auto& e : elements) {
    int ix = -1, iy = -1, iz = -1, idist = -1, ilist = -1;
    for (int k = 0; k < static_cast<int>(e.props.size()); ++k) {
      const auto& n = e.props[k].name;
      if (n == "x") ix = k;
      if (n == "y") iy = k;
      if (n == "z") iz = k;
      if (n == "distance") idist = k;
      if (e.props[k].is_list && (n == "vertex_indices" || n == "vertex_index")) ilist = k;
    }
    if (e.name == "vertex" && (ix < 0 || iy < 0 || iz < 0)) {
      parse_fail(pos, "vertex element lacks x/y/z properties");
    }
    has_scalar = has_scalar || (e.name == "vertex" && idist >= 0);
    for (std::size_t r = 0; r < e.count; ++r) {
      if (pos >= text.size()) parse_fail(pos, "unexpected end of PLY body in element '" + e.name + "'");
      const std::string_view line = next_line(line_start);
      Tokenizer tok(line);
      Vec3 p = Vec3::Zero();
      double dist = 0.0;
      std::vector<std::uint32_t> poly;
      for (int k = 0; k < static_cast<int>(e.props.size()); ++k) {
        try {
          if (e.props[k].is_list) {
            const double n = tok.number();
            if (n < 0 || n != std::floor(n)) parse_fail(0, "invalid list length");
            for (int i = 0; i < static_cast<int>(n); ++i) {
              const double idx = tok.number();
              if (idx < 0 || idx != std::floor(idx)) parse_fail(0, "invalid vertex index");
              poly.push_back(static_cast<std::uint32_t>(idx));
            }
          } else {
            const double v = tok.number();
            if (k == ix) p.x() = v;
            if (k == iy) p.y() = v;
            if (k == iz) p.z() = v;
            if (k == idist) dist = v;
          }
        } catch (const Error& err) {
          parse_fail(line_start + tok.token_start(), "bad value in PLY element '" + e.name + "'");
        }
      }
      if (e.name == "vertex") {
        vertices.push_back(p);
        scalars.push_back(dist);
      } else if (e.name == "face" && ilist >= 0) {
        if (poly.size() < 3) parse_fail(line_start, "face with fewer than 3 vertices");
        for (std::size_t i = 1; i + 1 < poly.size(); ++i) triangles.push_back({poly[0], poly[i], poly[i + 1]});
      }
    }
  }
  const std::size_t before = triangles.size();
  TriangleMesh mesh(std::move(vertices), std::move(triangles));
  if (mesh.dropped_degenerate() > 0) {
    result.warnings.push_back("dropped " + std::to_string(mesh.dropped_degenerate()) + " of " +
                              std::to_string(before) + " faces as degenerate");
  }
  if (mesh.empty()) fail(ErrorKind::InvalidInput, "PLY mesh has no non-degenerate triangles");
  result.mesh = std::move(mesh);
  if (has_scalar) result.scalars = std::move(scalars);
  return result;
}

MeshLoadResult load_mesh_with_report(const fs::path& path, MeshFormat format,
                                     const MeshLoadOptions& options) {
  const auto bytes = util::read_bytes(path);
  if (format == MeshFormat::Auto) {
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".ply") {
      format = MeshFormat::Ply;
    } else {
      bool binary_size_matches = false;
      if (bytes.size() >= 84) {
        std::uint32_t count = 0;
        std::memcpy(&count, bytes.data() + 80, 4);
        binary_size_matches = bytes.size() == 84 + static_cast<std::size_t>(count) * 50;
      }
      const bool starts_solid = bytes.size() >= 5 && std::memcmp(bytes.data(), "solid", 5) == 0;
      format = (starts_solid && !binary_size_matches) ? MeshFormat::StlAscii : MeshFormat::StlBinary;
    }
  }
  MeshLoadResult result;
  try {
    switch (format) {
      case MeshFormat::StlBinary:
        result.mesh = parse_stl_binary(bytes, options, result.warnings);
        break;
      case MeshFormat::StlAscii:
        result.mesh = parse_stl_ascii(
            std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()), options,
            result.warnings);
        break;
      case MeshFormat::Ply:
      case MeshFormat::Auto:
        result = parse_ply(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
        break;
    }
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
  return result;
}

namespace {

void put_f32(std::vector<std::uint8_t>& out, float v) {
  std::uint8_t b[4];
  std::memcpy(b, &v, 4);
  out.insert(out.end(), b, b + 4);
}

}  // namespace

void save_stl_binary(const TriangleMesh& mesh, const fs::path& path) {
  std::vector<std::uint8_t> out(80, 0);
  const char header[] = "orbitfit binary stl";
  std::memcpy(out.data(), header, sizeof header - 1);
  const auto count = static_cast<std::uint32_t>(mesh.triangle_count());
  std::uint8_t cb[4];
  std::memcpy(cb, &count, 4);
  out.insert(out.end(), cb, cb + 4);
  for (std::size_t f = 0; f < mesh.triangle_count(); ++f) {
    const Vec3 n = mesh.face_normal(f);
    for (int k = 0; k < 3; ++k) put_f32(out, static_cast<float>(n[k]));
    for (auto idx : mesh.triangles()[f]) {
      for (int k = 0; k < 3; ++k) put_f32(out, static_cast<float>(mesh.vertices()[idx][k]));
    }
    out.push_back(0);
    out.push_back(0);
  }
  util::write_bytes(path, out);
}

void save_stl_ascii(const TriangleMesh& mesh, const fs::path& path) {
  std::ostringstream os;
  os << "solid orbitfit\n";
  for (std::size_t f = 0; f < mesh.triangle_count(); ++f) {
    const Vec3 n = mesh.face_normal(f);
    os << "  facet normal " << util::exact(n.x()) << ' ' << util::exact(n.y()) << ' '
       << util::exact(n.z()) << "\n    outer loop\n";
    for (auto idx : mesh.triangles()[f]) {
      const auto& v = mesh.vertices()[idx];
      os << "      vertex " << util::exact(v.x()) << ' ' << util::exact(v.y()) << ' '
         << util::exact(v.z()) << '\n';
    }
    os << "    endloop\n  endfacet\n";
  }
  os << "endsolid orbitfit\n";
  util::write_text(path, os.str());
}

void save_ply(const TriangleMesh& mesh, const fs::path& path) {
  std::ostringstream os;
  os << "ply\nformat ascii 1.0\nelement vertex " << mesh.vertex_count()
     << "\nproperty double x\nproperty double y\nproperty double z\nelement face "
     << mesh.triangle_count() << "\nproperty list uchar int vertex_indices\nend_header\n";
  for (const auto& v : mesh.vertices()) {
    os << util::exact(v.x()) << ' ' << util::exact(v.y()) << ' ' << util::exact(v.z()) << '\n';
  }
  for (const auto& t : mesh.triangles()) os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  util::write_text(path, os.str());
}

std::string format_ply_with_scalars(const TriangleMesh& mesh, std::span<const double> scalars,
                                    std::span<const Rgb> colors) {
  if (scalars.size() != mesh.vertex_count()) {
    fail(ErrorKind::InvalidInput, "scalar count " + std::to_string(scalars.size()) +
                                      " does not match vertex count " +
                                      std::to_string(mesh.vertex_count()));
  }
  if (!colors.empty() && colors.size() != mesh.vertex_count()) {
    fail(ErrorKind::InvalidInput, "color count does not match vertex count");
  }
  std::ostringstream os;
  os << "ply\nformat ascii 1.0\nelement vertex " << mesh.vertex_count()
     << "\nproperty double x\nproperty double y\nproperty double z\nproperty float distance\n";
  if (!colors.empty()) os << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  os << "element face " << mesh.triangle_count()
     << "\nproperty list uchar int vertex_indices\nend_header\n";
  for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
    const auto& v = mesh.vertices()[i];
    os << util::fixed(v.x()) << ' ' << util::fixed(v.y()) << ' ' << util::fixed(v.z()) << ' '
       << util::fixed(scalars[i]);
    if (!colors.empty()) {
      os << ' ' << int(colors[i][0]) << ' ' << int(colors[i][1]) << ' ' << int(colors[i][2]);
    }
    os << '\n';
  }
  for (const auto& t : mesh.triangles()) os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  return os.str();
}

void save_mesh_with_scalars(const TriangleMesh& mesh, std::span<const double> scalars,
                            const fs::path& path, std::span<const Rgb> colors) {
  util::write_text(path, format_ply_with_scalars(mesh, scalars, colors));
}

}  // namespace orbitfit
