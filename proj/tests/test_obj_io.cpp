#include "handsynth/error.hpp"
#include "handsynth/obj_io.hpp"
#include "handsynth/toy_assets.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace handsynth;

namespace {

const char* kCubeObj = R"(# unit cube
v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
v 0 0 1
v 1 0 1
v 1 1 1
v 0 1 1
f 1 2 3 4
f 5 8 7 6
f 1 5 6 2
f 2 6 7 3
f 3 7 8 4
f 5 1 4 8
)";

ErrorCode code_of(const std::string& text) {
  try {
    parse_obj(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::ParseError;
}

}  // namespace

TEST_CASE("unit cube OBJ has 8 vertices and 12 triangles") {
  const Mesh m = parse_obj(kCubeObj);
  CHECK(m.num_vertices() == 8);
  CHECK(m.num_faces() == 12);
  CHECK_FALSE(m.has_uvs());
}

TEST_CASE("quads split 0-1-2 / 0-2-3") {
  const Mesh m = parse_obj("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n");
  REQUIRE(m.num_faces() == 2);
  CHECK(m.faces.row(0) == Eigen::RowVector3i(0, 1, 2));
  CHECK(m.faces.row(1) == Eigen::RowVector3i(0, 2, 3));
}

TEST_CASE("slash indices, negative indices and texture coordinates") {
  const Mesh m = parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nvt 1 0\nvt 0 1\nvn 0 0 1\nf -3/1/1 -2/2/1 -1/3/1\n");
  REQUIRE(m.num_faces() == 1);
  CHECK(m.faces.row(0) == Eigen::RowVector3i(0, 1, 2));
  CHECK(m.has_uvs());
  CHECK(m.uv_faces.row(0) == Eigen::RowVector3i(0, 1, 2));
}

TEST_CASE("malformed input") {
  CHECK(code_of("") == ErrorCode::ParseError);
  CHECK(code_of("   \n# only a comment\n") == ErrorCode::ParseError);
  CHECK(code_of("v 0 0 0\nv 1 0 0\nv 0 1 0\n") == ErrorCode::DegenerateMesh);
  CHECK(code_of("v 0 0 zero\n") == ErrorCode::ParseError);
  CHECK(code_of("v 0 0 0\nf 1 2 3\n") == ErrorCode::ParseError);
}

TEST_CASE("write_obj round trip is exact") {
  const Mesh cube = make_cube_mesh(0.05);
  CHECK(cube.num_vertices() == 8);
  CHECK(cube.num_faces() == 12);
  CHECK(meshes_equal(parse_obj(write_obj(cube)), cube));
}

TEST_CASE("load_object_mesh reads from disk") {
  const auto path = std::filesystem::temp_directory_path() / "handsynth_test_cube.obj";
  {
    std::ofstream out(path);
    out << kCubeObj;
  }
  CHECK(load_object_mesh(path).num_faces() == 12);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_object_mesh(path), Error);
}
