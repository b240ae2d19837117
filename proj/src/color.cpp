#include "handsynth/color.hpp"

#include <algorithm>
#include <cmath>

namespace handsynth {

Hsv rgb_to_hsv(const Vec3& rgb) {
  const double r = rgb.x(), g = rgb.y(), b = rgb.z();
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double delta = mx - mn;
  Hsv out{0.0, 0.0, mx};
  if (mx > 0.0) out.s = delta / mx;
  if (delta > 0.0) {
    double h;
    if (mx == r) {
      h = (g - b) / delta;
    } else if (mx == g) {
      h = 2.0 + (b - r) / delta;
    } else {
      h = 4.0 + (r - g) / delta;
    }
    h /= 6.0;
    if (h < 0.0) h += 1.0;
    out.h = h;
  }
  return out;
}

Vec3 hsv_to_rgb(const Hsv& hsv) {
  double h = hsv.h - std::floor(hsv.h);
  const double s = std::clamp(hsv.s, 0.0, 1.0);
  const double v = hsv.v;
  if (s == 0.0) return {v, v, v};
  h *= 6.0;
  const int sector = static_cast<int>(std::floor(h)) % 6;
  const double f = h - std::floor(h);
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  switch (sector) {
    case 0: return {v, t, p};
    case 1: return {q, v, p};
    case 2: return {p, v, t};
    case 3: return {p, q, v};
    case 4: return {t, p, v};
    default: return {v, p, q};
  }
}

}  // namespace handsynth
