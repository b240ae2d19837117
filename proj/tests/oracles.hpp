// Independent reference implementations used as test oracles. None of these
// share code with the library paths they check.
#pragma once

#include "handsynth/camera.hpp"
#include "handsynth/geometry.hpp"
#include "handsynth/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace oracle {

using handsynth::Vec3;

// Moller-Trumbore; returns the ray parameter of the hit.
inline std::optional<double> ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a, const Vec3& b,
                                          const Vec3& c) {
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 p = dir.cross(e2);
  const double det = e1.dot(p);
  if (std::abs(det) < 1e-18) return std::nullopt;
  const double inv = 1.0 / det;
  const Vec3 s = origin - a;
  const double u = s.dot(p) * inv;
  if (u < -1e-12 || u > 1.0 + 1e-12) return std::nullopt;
  const Vec3 q = s.cross(e1);
  const double v = dir.dot(q) * inv;
  if (v < -1e-12 || u + v > 1.0 + 1e-12) return std::nullopt;
  const double t = e2.dot(q) * inv;
  if (t <= 0.0) return std::nullopt;
  return t;
}

// Camera-space z of the nearest surface under the pixel center, or nullopt.
inline std::optional<double> ray_cast_depth(const std::vector<handsynth::SceneItem>& scene,
                                            const handsynth::CameraSpec& cam, int row, int col,
                                            double near_plane = 0.0) {
  const auto& k = cam.intrinsics;
  // Ray through the pixel center in camera space, scaled so dir.z == 1; the
  // ray parameter is then the camera-space depth.
  const Vec3 dir((col + 0.5 - k.cx) / k.fx, (row + 0.5 - k.cy) / k.fy, 1.0);
  const handsynth::Rigid cfw = cam.world_from_camera.inverse();
  double best = std::numeric_limits<double>::infinity();
  for (const auto& item : scene) {
    const auto& m = item.mesh;
    for (Eigen::Index f = 0; f < m.faces.rows(); ++f) {
      const Vec3 a = cfw * Vec3(m.vertices.row(m.faces(f, 0)).transpose());
      const Vec3 b = cfw * Vec3(m.vertices.row(m.faces(f, 1)).transpose());
      const Vec3 c = cfw * Vec3(m.vertices.row(m.faces(f, 2)).transpose());
      const auto t = ray_triangle(Vec3::Zero(), dir, a, b, c);
      if (t && *t >= near_plane && *t < best) best = *t;
    }
  }
  if (!std::isfinite(best)) return std::nullopt;
  return best;
}

// Mean Euclidean distance, millimeters, by a plain loop.
inline double mean_distance_mm(const handsynth::Points3d& a, const handsynth::Points3d& b) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    double sq = 0.0;
    for (int c = 0; c < 3; ++c) sq += (a(i, c) - b(i, c)) * (a(i, c) - b(i, c));
    sum += std::sqrt(sq);
  }
  return 1000.0 * sum / static_cast<double>(a.rows());
}

// RMS residual of the best similarity transform for a fixed rotation R, with
// scale and translation in closed form (scale clamped to be positive).
inline double similarity_rms_for_rotation(const handsynth::Points3d& pred, const handsynth::Points3d& gt,
                                          const handsynth::Mat3& R) {
  const Vec3 pm = pred.colwise().mean().transpose();
  const Vec3 gm = gt.colwise().mean().transpose();
  double num = 0.0, den = 0.0;
  for (Eigen::Index i = 0; i < pred.rows(); ++i) {
    const Vec3 p = R * (Vec3(pred.row(i).transpose()) - pm);
    const Vec3 g = Vec3(gt.row(i).transpose()) - gm;
    num += p.dot(g);
    den += p.squaredNorm();
  }
  const double s = std::max(num / den, 1e-12);
  double sq = 0.0;
  for (Eigen::Index i = 0; i < pred.rows(); ++i) {
    const Vec3 p = s * (R * (Vec3(pred.row(i).transpose()) - pm));
    sq += (p - (Vec3(gt.row(i).transpose()) - gm)).squaredNorm();
  }
  return std::sqrt(sq / static_cast<double>(pred.rows()));
}

// Minimum similarity RMS residual by dense search over a rotation-vector grid
// followed by shrinking-step coordinate refinement. No matrix decompositions.
inline double similarity_rms_search(const handsynth::Points3d& pred, const handsynth::Points3d& gt,
                                    int grid = 24) {
  auto rot = [](const Vec3& w) {
    const double a = w.norm();
    if (a == 0.0) return handsynth::Mat3(handsynth::Mat3::Identity());
    return handsynth::Mat3(Eigen::AngleAxisd(a, w / a).toRotationMatrix());
  };
  const double pi = 3.14159265358979323846;
  Vec3 best_w = Vec3::Zero();
  double best = similarity_rms_for_rotation(pred, gt, handsynth::Mat3::Identity());
  const double step = 2.0 * pi / grid;
  for (int i = 0; i <= grid; ++i)
    for (int j = 0; j <= grid; ++j)
      for (int k = 0; k <= grid; ++k) {
        const Vec3 w(-pi + i * step, -pi + j * step, -pi + k * step);
        if (w.norm() > pi) continue;
        const double r = similarity_rms_for_rotation(pred, gt, rot(w));
        if (r < best) {
          best = r;
          best_w = w;
        }
      }
  for (double h = step; h > 1e-7; h *= 0.5) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (int axis = 0; axis < 3; ++axis)
        for (double sign : {-1.0, 1.0}) {
          Vec3 w = best_w;
          w[axis] += sign * h;
          const double r = similarity_rms_for_rotation(pred, gt, rot(w));
          if (r < best) {
            best = r;
            best_w = w;
            improved = true;
          }
        }
    }
  }
  return best;
}

}  // namespace oracle
