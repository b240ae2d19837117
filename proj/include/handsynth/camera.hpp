#pragma once

#include "handsynth/geometry.hpp"

namespace handsynth {

struct Intrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
};

// Pinhole camera looking down its +z axis, +x right, +y down in the image.
// Pixel (row, col) covers [col, col+1) x [row, row+1); its center is at
// (col + 0.5, row + 0.5).
struct CameraSpec {
  double fov_y = 0.0;  // radians
  int width = 0;
  int height = 0;
  Rigid world_from_camera = Rigid::Identity();
  Intrinsics intrinsics;

  // fx = fy = (H/2) / tan(fov_y/2), principal point at the image center.
  static CameraSpec from_fov(double fov_y, int width, int height, const Rigid& world_from_camera);

  Vec3 position() const { return world_from_camera.translation(); }
  Vec3 forward() const { return world_from_camera.linear().col(2); }
};

struct Projection {
  double u;
  double v;
  double z;  // camera-space depth, meters
};

inline constexpr double kMinProjectDepth = 1e-6;

// Throws BehindCamera when the camera-space z <= 1e-6 m.
Projection project(const CameraSpec& camera, const Vec3& world_point);

// Same, for a point already in camera coordinates.
Projection project_camera_point(const Intrinsics& k, const Vec3& camera_point);

}  // namespace handsynth
