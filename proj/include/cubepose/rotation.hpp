#pragma once

#include <Eigen/Dense>

namespace cubepose {

/// Head orientation in degrees.
///
/// The angles are defined by the rotation R = Rx(pitch) * Ry(yaw) * Rz(roll):
/// the first two rows of R, scaled by the cube edge length, are the image-plane
/// projections of the three cube axes. Canonical form has yaw and roll in
/// (-180, 180] and pitch in [-90, 90], which keeps yaw unrestricted.
struct EulerPose {
  double yaw = 0.0;
  double pitch = 0.0;
  double roll = 0.0;

  friend bool operator==(const EulerPose&, const EulerPose&) = default;
};

using Rotation3 = Eigen::Matrix3d;

inline constexpr double kPi = 3.14159265358979323846;

constexpr double deg2rad(double deg) { return deg * (kPi / 180.0); }
constexpr double rad2deg(double rad) { return rad * (180.0 / kPi); }

/// Maps any finite angle to (-180, 180]. Throws on NaN/inf.
double wrap_angle(double deg);

/// |wrap_angle(a - b)|, in [0, 180].
double angle_diff(double a, double b);

/// Wraps all angles and folds pitch into [-90, 90] using the two-fold alias
/// (yaw, pitch, roll) ~ (180 - yaw, pitch + 180, roll + 180).
EulerPose canonicalize(const EulerPose& p);

Rotation3 euler_to_matrix(const EulerPose& p);

/// Inverse of euler_to_matrix returning a canonical pose. At gimbal lock
/// (|yaw| = 90, R(0,2) = +-1) roll is fixed to 0 and the free angle goes to pitch.
EulerPose matrix_to_euler(const Rotation3& r);

/// max |R^T R - I| entry; used for input validation.
double orthonormality_error(const Rotation3& r);

/// Angle (deg) of the relative rotation between two poses; alias-free.
double rotation_angle_between(const EulerPose& a, const EulerPose& b);

}  // namespace cubepose
