#include "handsynth/rotation.hpp"

#include <cmath>
#include <numbers>

namespace handsynth {

Mat3 axis_angle_to_matrix(const Vec3& aa) {
  const double theta = aa.norm();
  if (theta == 0.0) return Mat3::Identity();
  Mat3 k;
  k << 0.0, -aa.z(), aa.y(),
       aa.z(), 0.0, -aa.x(),
       -aa.y(), aa.x(), 0.0;
  double a, b;
  if (theta < 1e-6) {
    // Taylor expansions of sin(t)/t and (1-cos t)/t^2.
    const double t2 = theta * theta;
    a = 1.0 - t2 / 6.0;
    b = 0.5 - t2 / 24.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / (theta * theta);
  }
  return Mat3::Identity() + a * k + b * k * k;
}

Vec3 matrix_to_axis_angle(const Mat3& r) {
  Eigen::Quaterniond q(r);
  q.normalize();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const Vec3 v = q.vec();
  const double s = v.norm();
  if (s == 0.0) return Vec3::Zero();
  const double angle = 2.0 * std::atan2(s, q.w());
  return v * (angle / s);
}

Vec3 canonicalize_axis_angle(const Vec3& aa) {
  constexpr double kPi = std::numbers::pi;
  const double theta = aa.norm();
  if (theta <= kPi) return aa;
  const Vec3 axis = aa / theta;
  double reduced = std::fmod(theta, 2.0 * kPi);
  if (reduced > kPi) return -axis * (2.0 * kPi - reduced);
  return axis * reduced;
}

Vec3 slerp_axis_angle(const Vec3& a, const Vec3& b, double t) {
  if (t == 0.0) return a;
  if (t == 1.0) return b;
  const Eigen::Quaterniond qa(Eigen::AngleAxisd(axis_angle_to_matrix(a)));
  const Eigen::Quaterniond qb(Eigen::AngleAxisd(axis_angle_to_matrix(b)));
  const Eigen::Quaterniond q = qa.slerp(t, qb);
  return matrix_to_axis_angle(q.toRotationMatrix());
}

Mat3 look_at_rotation(const Vec3& eye, const Vec3& target, double roll) {
  const Vec3 forward = (target - eye).normalized();
  Vec3 up_hint = Vec3::UnitZ();
  if (std::abs(forward.dot(up_hint)) > 0.9) up_hint = Vec3::UnitY();
  const Vec3 x0 = forward.cross(up_hint).normalized();
  const Vec3 y0 = forward.cross(x0);
  const double c = std::cos(roll);
  const double s = std::sin(roll);
  Mat3 r;
  r.col(0) = c * x0 + s * y0;
  r.col(1) = -s * x0 + c * y0;
  r.col(2) = forward;
  return r;
}

}  // namespace handsynth
