#pragma once

#include "handsynth/geometry.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace handsynth {

// Parses the OBJ subset `v`, `vt` and `f` (with optional `/vt` and `/vn`
// index suffixes, negative indices allowed). Polygons are fan-triangulated:
// quads split as (0,1,2) and (0,2,3). Other statements are ignored.
// Throws ParseError on malformed input or an empty file and DegenerateMesh
// when no face survives.
Mesh parse_obj(std::string_view text, const std::string& source_name = "<memory>");
Mesh load_object_mesh(const std::filesystem::path& path);

// Writes v / vt / f with 17 significant digits so parse_obj(write_obj(m))
// reproduces the mesh exactly.
std::string write_obj(const Mesh& mesh);

bool meshes_equal(const Mesh& a, const Mesh& b);

}  // namespace handsynth
