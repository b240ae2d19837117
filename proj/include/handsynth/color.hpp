#pragma once

#include "handsynth/geometry.hpp"

namespace handsynth {

// Hue in turns [0, 1), saturation and value in [0, 1].
struct Hsv {
  double h;
  double s;
  double v;
};

Hsv rgb_to_hsv(const Vec3& rgb);
Vec3 hsv_to_rgb(const Hsv& hsv);

}  // namespace handsynth
