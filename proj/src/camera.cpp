#include "handsynth/camera.hpp"

#include "handsynth/error.hpp"

#include <cmath>

namespace handsynth {

CameraSpec CameraSpec::from_fov(double fov_y, int width, int height, const Rigid& world_from_camera) {
  CameraSpec cam;
  cam.fov_y = fov_y;
  cam.width = width;
  cam.height = height;
  cam.world_from_camera = world_from_camera;
  const double f = (height / 2.0) / std::tan(fov_y / 2.0);
  cam.intrinsics = {f, f, width / 2.0, height / 2.0};
  return cam;
}

Projection project_camera_point(const Intrinsics& k, const Vec3& p) {
  if (!p.allFinite()) throw Error(ErrorCode::BehindCamera, "non-finite point");
  if (p.z() <= kMinProjectDepth) {
    throw Error(ErrorCode::BehindCamera, "camera-space z = " + std::to_string(p.z()));
  }
  return {k.cx + k.fx * p.x() / p.z(), k.cy + k.fy * p.y() / p.z(), p.z()};
}

Projection project(const CameraSpec& camera, const Vec3& world_point) {
  const Vec3 p = camera.world_from_camera.inverse() * world_point;
  return project_camera_point(camera.intrinsics, p);
}

}  // namespace handsynth
