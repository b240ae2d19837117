#pragma once

#include "handsynth/asset_store.hpp"

#include <cstdint>

namespace handsynth {

// Geometry constants of the procedural toy hand.
inline constexpr int kToyWristRingSize = 16;
inline constexpr double kToyWristRadius = 0.035;  // meters
inline constexpr int kToyJointCount = 16;         // wrist + 5 fingers x 3

// Deterministic procedural pack standing in for licensed assets: a ~200 vertex
// rigged hand (wrist at the origin, fingers along +y, palm facing -z), shape
// and pose banks, skin and sleeve textures, ramp-depth backgrounds and two
// cube grasps. Same seed, same bits.
AssetPack make_toy_assets(std::uint64_t seed = 0);

// Axis-aligned cube centered at its origin, 8 vertices and 12 triangles with
// per-face UVs.
Mesh make_cube_mesh(double side);

}  // namespace handsynth
