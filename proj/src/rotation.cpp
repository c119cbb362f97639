#include "cubepose/rotation.hpp"

#include <algorithm>
#include <cmath>

#include "cubepose/error.hpp"

namespace cubepose {

namespace {

constexpr double kLockTol = 1e-9;
constexpr double kOrthoTol = 1e-6;

}  // namespace

double wrap_angle(double deg) {
  if (!std::isfinite(deg)) {
    throw Error(ErrorCode::kInvalidArgument, "wrap_angle: non-finite angle");
  }
  double r = std::fmod(deg, 360.0);
  if (r > 180.0) {
    r -= 360.0;
  } else if (r <= -180.0) {
    r += 360.0;
  }
  return r;
}

double angle_diff(double a, double b) { return std::abs(wrap_angle(a - b)); }

EulerPose canonicalize(const EulerPose& p) {
  EulerPose c{wrap_angle(p.yaw), wrap_angle(p.pitch), wrap_angle(p.roll)};
  if (std::abs(c.pitch) > 90.0) {
    c.yaw = wrap_angle(180.0 - c.yaw);
    c.pitch = wrap_angle(c.pitch + 180.0);
    c.roll = wrap_angle(c.roll + 180.0);
  }
  return c;
}

Rotation3 euler_to_matrix(const EulerPose& p) {
  const double y = deg2rad(p.yaw);
  const double pt = deg2rad(p.pitch);
  const double r = deg2rad(p.roll);
  const double cy = std::cos(y), sy = std::sin(y);
  const double cp = std::cos(pt), sp = std::sin(pt);
  const double cr = std::cos(r), sr = std::sin(r);

  const Eigen::Vector3d row1(cy * cr, -cy * sr, sy);
  const Eigen::Vector3d row2(cp * sr + sp * sy * cr, cp * cr - sp * sy * sr, -cy * sp);
  Rotation3 m;
  m.row(0) = row1.transpose();
  m.row(1) = row2.transpose();
  m.row(2) = row1.cross(row2).transpose();
  return m;
}

double orthonormality_error(const Rotation3& r) {
  return (r.transpose() * r - Rotation3::Identity()).cwiseAbs().maxCoeff();
}

EulerPose matrix_to_euler(const Rotation3& r) {
  if (!r.allFinite() || orthonormality_error(r) > kOrthoTol ||
      std::abs(r.determinant() - 1.0) > kOrthoTol) {
    throw Error(ErrorCode::kInvalidArgument, "matrix_to_euler: matrix is not a rotation");
  }

  const double s02 = std::clamp(r(0, 2), -1.0, 1.0);
  // Tested on cos(yaw) rather than on 1 - |R02|: pitch and roll stay
  // recoverable to ~1e-16 / cos(yaw) rad right up to the lock.
  if (std::hypot(r(0, 0), r(0, 1)) < kLockTol) {
    // cos(yaw) = 0: only pitch +- roll is observable.
    const double pitch = s02 > 0 ? std::atan2(r(1, 0), r(1, 1)) : std::atan2(-r(1, 0), r(1, 1));
    return canonicalize({s02 > 0 ? 90.0 : -90.0, rad2deg(pitch), 0.0});
  }

  // Choose the sign of cos(yaw) that makes cos(pitch) = R(2,2)/cos(yaw) >= 0.
  const double s = r(2, 2) >= 0.0 ? 1.0 : -1.0;
  const double cy = s * std::hypot(r(0, 0), r(0, 1));
  const double yaw = std::atan2(r(0, 2), cy);
  const double pitch = std::atan2(-s * r(1, 2), s * r(2, 2));
  const double roll = std::atan2(-s * r(0, 1), s * r(0, 0));
  return canonicalize({rad2deg(yaw), rad2deg(pitch), rad2deg(roll)});
}

double rotation_angle_between(const EulerPose& a, const EulerPose& b) {
  // ||Ra - Rb||_F = 2 sqrt(2) sin(theta / 2); stays accurate near zero, unlike acos of the trace
  const double chord = (euler_to_matrix(a) - euler_to_matrix(b)).norm() / (2.0 * std::sqrt(2.0));
  return rad2deg(2.0 * std::asin(std::min(chord, 1.0)));
}

}  // namespace cubepose
