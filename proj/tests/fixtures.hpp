// Random inputs shared by the metric tests and the acceptance binary.
#pragma once

#include "handsynth/geometry.hpp"
#include "handsynth/random.hpp"
#include "handsynth/rotation.hpp"

namespace fixtures {

using handsynth::Points3d;
using handsynth::RandomStream;
using handsynth::Vec3;

// K hand-sized points (about 10 cm across) around a point 0.5 m ahead.
inline Points3d random_joints(RandomStream& rng, int k = 21) {
  Points3d p(k, 3);
  for (int i = 0; i < k; ++i) {
    p.row(i) = (Vec3(0.0, 0.0, 0.5) + 0.05 * Vec3(rng.normal(), rng.normal(), rng.normal())).transpose();
  }
  return p;
}

struct Similarity {
  double scale = 1.0;
  handsynth::Mat3 rotation = handsynth::Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Points3d apply(const Points3d& pts) const {
    Points3d out(pts.rows(), 3);
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
      out.row(i) = (scale * (rotation * Vec3(pts.row(i).transpose())) + translation).transpose();
    }
    return out;
  }
};

inline Similarity random_similarity(RandomStream& rng, double max_angle = 3.1) {
  Similarity s;
  s.scale = rng.uniform(0.5, 2.0);
  s.rotation = handsynth::axis_angle_to_matrix(rng.unit_vector() * rng.uniform(0.0, max_angle));
  s.translation = 0.2 * Vec3(rng.normal(), rng.normal(), rng.normal());
  return s;
}

inline Points3d add_noise(RandomStream& rng, const Points3d& pts, double sigma_m) {
  Points3d out = pts;
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (int c = 0; c < 3; ++c) out(i, c) += sigma_m * rng.normal();
  return out;
}

// Prediction that is a noisy, moderately misplaced copy of the ground truth:
// rotation up to 30 degrees, scale 0.8-1.25, offset of a few centimeters,
// and 2-8 mm per-joint noise.
inline Points3d random_prediction(RandomStream& rng, const Points3d& gt) {
  Similarity s;
  s.scale = rng.uniform(0.8, 1.25);
  s.rotation = handsynth::axis_angle_to_matrix(rng.unit_vector() * rng.uniform(0.0, 0.52));
  const Vec3 centre = gt.colwise().mean().transpose();
  s.translation = centre - s.scale * (s.rotation * centre) + 0.03 * rng.unit_vector();
  return add_noise(rng, s.apply(gt), rng.uniform(0.002, 0.008));
}

}  // namespace fixtures
