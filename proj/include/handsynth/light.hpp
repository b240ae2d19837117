#pragma once

#include "handsynth/geometry.hpp"

#include <string_view>

namespace handsynth {

enum class LightKind { Ambient, Point, Directional, Spot };

std::string_view to_string(LightKind kind);
LightKind light_kind_from_string(std::string_view s);

// World-frame light. Point and spot lights have no distance falloff, so the
// intensity is the irradiance scale at any distance.
struct LightSpec {
  LightKind kind = LightKind::Ambient;
  Vec3 color = Vec3::Ones();       // each channel in [0,1]
  double intensity = 1.0;          // >= 0
  Vec3 position = Vec3::Zero();    // point, spot
  Vec3 direction = -Vec3::UnitZ(); // directional, spot: direction the light travels
  double cone_angle = 0.0;         // spot: half-angle, radians
};

}  // namespace handsynth
