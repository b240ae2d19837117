#include "handsynth/obj_io.hpp"

#include "handsynth/error.hpp"
#include "handsynth/hashing.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>
#include <vector>

namespace handsynth {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

double parse_double(std::string_view tok, const std::string& where) {
  // from_chars for double is available in libstdc++ 11.
  double value = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
    throw Error(ErrorCode::ParseError, where + ": bad number '" + std::string(tok) + "'");
  }
  return value;
}

long parse_index(std::string_view tok, long count, const std::string& where) {
  long value = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || value == 0) {
    throw Error(ErrorCode::ParseError, where + ": bad index '" + std::string(tok) + "'");
  }
  const long resolved = value > 0 ? value - 1 : count + value;
  if (resolved < 0 || resolved >= count) {
    throw Error(ErrorCode::ParseError, where + ": index out of range '" + std::string(tok) + "'");
  }
  return resolved;
}

}  // namespace

Mesh parse_obj(std::string_view text, const std::string& source_name) {
  std::vector<Vec3> positions;
  std::vector<Eigen::Vector2d> texcoords;
  std::vector<Eigen::Vector3i> faces;
  std::vector<Eigen::Vector3i> uv_faces;
  bool any_face_without_uv = false;
  bool any_statement = false;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const auto line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto where = source_name + ":" + std::to_string(line_no);
    const auto toks = split_ws(line);
    const auto& kw = toks.front();
    any_statement = true;
    if (kw == "v") {
      if (toks.size() < 4) throw Error(ErrorCode::ParseError, where + ": vertex needs 3 coordinates");
      positions.emplace_back(parse_double(toks[1], where), parse_double(toks[2], where),
                             parse_double(toks[3], where));
    } else if (kw == "vt") {
      if (toks.size() < 3) throw Error(ErrorCode::ParseError, where + ": vt needs 2 coordinates");
      texcoords.emplace_back(parse_double(toks[1], where), parse_double(toks[2], where));
    } else if (kw == "f") {
      if (toks.size() < 4) throw Error(ErrorCode::ParseError, where + ": face needs >= 3 vertices");
      std::vector<int> vi, ti;
      for (std::size_t k = 1; k < toks.size(); ++k) {
        const auto tok = toks[k];
        const auto slash = tok.find('/');
        vi.push_back(static_cast<int>(
            parse_index(tok.substr(0, slash), static_cast<long>(positions.size()), where)));
        if (slash != std::string_view::npos) {
          const auto rest = tok.substr(slash + 1);
          const auto slash2 = rest.find('/');
          const auto vt = rest.substr(0, slash2);
          if (!vt.empty()) {
            ti.push_back(static_cast<int>(
                parse_index(vt, static_cast<long>(texcoords.size()), where)));
          }
        }
      }
      const bool has_uv = ti.size() == vi.size();
      if (!ti.empty() && !has_uv) {
        throw Error(ErrorCode::ParseError, where + ": mixed texture indices within a face");
      }
      if (!has_uv) any_face_without_uv = true;
      for (std::size_t k = 1; k + 1 < vi.size(); ++k) {
        faces.emplace_back(vi[0], vi[k], vi[k + 1]);
        if (has_uv) uv_faces.emplace_back(ti[0], ti[k], ti[k + 1]);
      }
    }
  }
  if (!any_statement) throw Error(ErrorCode::ParseError, source_name + ": empty OBJ");
  if (faces.empty()) throw Error(ErrorCode::DegenerateMesh, source_name + ": no faces");

  Mesh mesh;
  mesh.vertices.resize(static_cast<Eigen::Index>(positions.size()), 3);
  for (std::size_t i = 0; i < positions.size(); ++i) {
    mesh.vertices.row(static_cast<Eigen::Index>(i)) = positions[i].transpose();
  }
  mesh.faces.resize(static_cast<Eigen::Index>(faces.size()), 3);
  for (std::size_t i = 0; i < faces.size(); ++i) {
    mesh.faces.row(static_cast<Eigen::Index>(i)) = faces[i].transpose();
  }
  if (!texcoords.empty() && !any_face_without_uv) {
    mesh.uvs.resize(static_cast<Eigen::Index>(texcoords.size()), 2);
    for (std::size_t i = 0; i < texcoords.size(); ++i) {
      mesh.uvs.row(static_cast<Eigen::Index>(i)) = texcoords[i].transpose();
    }
    mesh.uv_faces.resize(static_cast<Eigen::Index>(uv_faces.size()), 3);
    for (std::size_t i = 0; i < uv_faces.size(); ++i) {
      mesh.uv_faces.row(static_cast<Eigen::Index>(i)) = uv_faces[i].transpose();
    }
  }
  return mesh;
}

Mesh load_object_mesh(const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes;
  try {
    bytes = read_file_bytes(path);
  } catch (const Error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  const std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  return parse_obj(text, path.string());
}

std::string write_obj(const Mesh& mesh) {
  std::ostringstream out;
  char buf[128];
  for (Eigen::Index i = 0; i < mesh.vertices.rows(); ++i) {
    std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", mesh.vertices(i, 0),
                  mesh.vertices(i, 1), mesh.vertices(i, 2));
    out << buf;
  }
  const bool indexed_uv = mesh.uv_faces.rows() == mesh.faces.rows() && mesh.has_uvs();
  const bool per_vertex_uv = !indexed_uv && mesh.uvs.rows() == mesh.vertices.rows() && mesh.has_uvs();
  for (Eigen::Index i = 0; i < mesh.uvs.rows() && (indexed_uv || per_vertex_uv); ++i) {
    std::snprintf(buf, sizeof(buf), "vt %.17g %.17g\n", mesh.uvs(i, 0), mesh.uvs(i, 1));
    out << buf;
  }
  for (Eigen::Index f = 0; f < mesh.faces.rows(); ++f) {
    out << 'f';
    for (int k = 0; k < 3; ++k) {
      out << ' ' << mesh.faces(f, k) + 1;
      if (indexed_uv) out << '/' << mesh.uv_faces(f, k) + 1;
      if (per_vertex_uv) out << '/' << mesh.faces(f, k) + 1;
    }
    out << '\n';
  }
  return out.str();
}

bool meshes_equal(const Mesh& a, const Mesh& b) {
  auto same = [](const auto& x, const auto& y) {
    return x.rows() == y.rows() && x.cols() == y.cols() && (x.size() == 0 || x == y);
  };
  return same(a.vertices, b.vertices) && same(a.faces, b.faces) && same(a.uvs, b.uvs) &&
         same(a.uv_faces, b.uv_faces);
}

}  // namespace handsynth
