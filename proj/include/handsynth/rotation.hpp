#pragma once

#include "handsynth/geometry.hpp"

namespace handsynth {

// Rodrigues: axis-angle vector (radians) to rotation matrix.
Mat3 axis_angle_to_matrix(const Vec3& aa);

// Inverse of axis_angle_to_matrix; result has norm in [0, pi].
Vec3 matrix_to_axis_angle(const Mat3& r);

// Maps any axis-angle vector to the equivalent one with norm <= pi.
Vec3 canonicalize_axis_angle(const Vec3& aa);

// Spherical-linear interpolation between two rotations given as axis-angle,
// taken along the shorter arc. t = 0 and t = 1 return the inputs unchanged.
Vec3 slerp_axis_angle(const Vec3& a, const Vec3& b, double t);

// Camera orientation looking from `eye` at `target`, with +z forward and
// +y pointing down in the image. `roll` rotates the image plane about +z.
Mat3 look_at_rotation(const Vec3& eye, const Vec3& target, double roll);

}  // namespace handsynth
