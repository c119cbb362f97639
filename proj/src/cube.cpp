#include "cubepose/cube.hpp"

#include <algorithm>
#include <cmath>

#include "cubepose/error.hpp"

namespace cubepose {

namespace {

constexpr double kMinEdge = 1e-9;     // px, degenerate cube
constexpr double kDenEps = 1e-9;      // px, ratio-path denominators
constexpr double kOrthoTolRel = 1e-3; // fraction of l^2
constexpr double kDeltaTol = 1e-6;

void check_constraint(const AxisProjection& axes) {
  const AxisMatrix a = axes.matrix();
  const Eigen::Matrix2d gram = a * a.transpose();
  const double l2 = axes.l * axes.l;
  const double err = (gram - l2 * Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff();
  if (err > kOrthoTolRel * l2) {
    throw Error(ErrorCode::kConstraintViolation, "cube violates projection constraints");
  }
}

double delta_from_ratios(const SlopeRatios& k) {
  return 2.0 * k.k3 * k.k3 * (1.0 + k.k1 * k.k2) / ((k.k1 - k.k3) * (k.k2 - k.k3));
}

double checked_range(double delta) {
  if (!std::isfinite(delta) || delta < -kDeltaTol || delta > 2.0 + kDeltaTol) {
    throw Error(ErrorCode::kConstraintViolation, "cube violates projection constraints");
  }
  return delta;
}

double ratio_delta(const Cube2D& cube, const AxisProjection& axes) {
  check_constraint(axes);
  const SlopeRatios k = slope_ratios(cube);
  const double scale = std::max({1.0, std::abs(k.k1), std::abs(k.k2), std::abs(k.k3)});
  if (std::abs(k.k1 - k.k3) < 1e-12 * scale || std::abs(k.k2 - k.k3) < 1e-12 * scale) {
    throw Error(ErrorCode::kSingular, "ratio path singular, use matrix path");
  }
  return checked_range(delta_from_ratios(k));
}

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace

AxisMatrix AxisProjection::matrix() const {
  AxisMatrix a;
  a.col(0) = u;
  a.col(1) = v;
  a.col(2) = w;
  return a;
}

AxisProjection AxisProjection::from_matrix(const AxisMatrix& a, double l) {
  return {a.col(0), a.col(1), a.col(2), l};
}

AxisProjection euler_to_axes(const EulerPose& pose, double l) {
  if (!(l > 0.0) || !std::isfinite(l)) {
    throw Error(ErrorCode::kInvalidArgument, "euler_to_axes: edge length must be positive");
  }
  const AxisMatrix a = l * euler_to_matrix(pose).topRows<2>();
  return AxisProjection::from_matrix(a, l);
}

Cube2D axes_to_cube(const AxisProjection& axes, const Vec2& center) {
  Cube2D cube;
  cube.center = center;
  for (int b = 0; b < 8; ++b) {
    cube.vertices[b] = center + 0.5 * (vertex_sign(b, 0) * axes.u + vertex_sign(b, 1) * axes.v +
                                       vertex_sign(b, 2) * axes.w);
  }
  return cube;
}

Cube2D euler2cube(const EulerPose& pose, const Vec2& center, double l) {
  return axes_to_cube(euler_to_axes(pose, l), center);
}

RecoveredAxes cube_to_axes(const Cube2D& cube) {
  Vec2 center = Vec2::Zero();
  AxisMatrix a = AxisMatrix::Zero();
  for (int b = 0; b < 8; ++b) {
    const Vec2& p = cube.vertices[b];
    center += p;
    for (int k = 0; k < 3; ++k) {
      a.col(k) += vertex_sign(b, k) * p;
    }
  }
  center /= 8.0;
  a /= 4.0;  // mean of the + face minus mean of the - face
  const double l = std::sqrt(a.squaredNorm() / 2.0);
  if (!(l >= kMinEdge)) {
    throw Error(ErrorCode::kDegenerate, "degenerate cube");
  }
  return {AxisProjection::from_matrix(a, l), center};
}

AxisProjection corner_axes(const Cube2D& cube) {
  const Vec2& origin = cube.vertices[0];
  AxisMatrix a;
  a.col(0) = cube.vertices[1] - origin;
  a.col(1) = cube.vertices[2] - origin;
  a.col(2) = cube.vertices[4] - origin;
  const double l = std::sqrt(a.squaredNorm() / 2.0);
  if (!(l >= kMinEdge)) {
    throw Error(ErrorCode::kDegenerate, "degenerate cube");
  }
  return AxisProjection::from_matrix(a, l);
}

EulerPose pose_from_axes(const AxisProjection& axes) {
  const AxisMatrix a = axes.matrix();
  Eigen::Vector3d r1 = a.row(0).transpose();
  Eigen::Vector3d r2 = a.row(1).transpose();
  const double n1 = r1.norm(), n2 = r2.norm();
  const double floor = kMinEdge * std::max(1.0, axes.l);
  if (!(n1 > floor) || !(n2 > floor)) {
    throw Error(ErrorCode::kDegenerate, "degenerate cube");
  }
  r1 /= n1;
  r2 /= n2;
  // Unit rows: (r1 + r2) is orthogonal to (r1 - r2).
  Eigen::Vector3d plus = r1 + r2;
  Eigen::Vector3d minus = r1 - r2;
  if (!(plus.norm() > 1e-12) || !(minus.norm() > 1e-12)) {
    throw Error(ErrorCode::kDegenerate, "view-degenerate cube");
  }
  plus.normalize();
  minus.normalize();
  const Eigen::Vector3d row1 = (plus + minus) / std::sqrt(2.0);
  const Eigen::Vector3d row2 = (plus - minus) / std::sqrt(2.0);

  Rotation3 r;
  r.row(0) = row1.transpose();
  r.row(1) = row2.transpose();
  r.row(2) = row1.cross(row2).transpose();
  return matrix_to_euler(r);
}

SlopeRatios slope_ratios(const Cube2D& cube) {
  const AxisProjection axes = cube_to_axes(cube).axes;
  const double den = std::min({std::abs(axes.u.y()), std::abs(axes.v.y()), std::abs(axes.w.y())});
  if (!(den >= kDenEps)) {
    throw Error(ErrorCode::kSingular, "ratio path singular, use matrix path");
  }
  SlopeRatios k;
  k.k1 = axes.u.x() / axes.u.y();
  k.k2 = axes.v.x() / axes.v.y();
  k.k3 = axes.w.x() / axes.w.y();
  k.min_denominator = den / axes.l;
  k.cross_term = (k.k1 - k.k3) * (k.k2 - k.k3);
  return k;
}

double delta_of_cube(const Cube2D& cube) {
  const AxisProjection axes = cube_to_axes(cube).axes;
  check_constraint(axes);
  const double cu = cross(axes.u, axes.w), cv = cross(axes.v, axes.w);
  const double l2 = axes.l * axes.l;
  if (std::abs(cu) < 1e-12 * l2 || std::abs(cv) < 1e-12 * l2) {
    throw Error(ErrorCode::kSingular, "delta undefined: an axis projects parallel to w");
  }
  return checked_range(2.0 * axes.w.x() * axes.w.x() * axes.u.dot(axes.v) / (cu * cv));
}

EulerPose cube2euler_ratios(const Cube2D& cube) {
  const AxisProjection axes = cube_to_axes(cube).axes;
  const double delta = std::clamp(ratio_delta(cube, axes), 0.0, 2.0);

  // |yaw| in [0, 90]; the cos(yaw) >= 0 branch is taken here and the
  // canonicalization at the end moves the result to the other branch when
  // the recovered pitch lands outside [-90, 90].
  const double abs_yaw = 0.5 * std::acos(1.0 - delta);
  const double yaw = axes.w.x() < 0.0 ? -abs_yaw : abs_yaw;
  const double cy = std::cos(abs_yaw);

  const double roll = std::atan2(-axes.v.x(), axes.u.x());
  const double sp = -axes.w.y() / (axes.l * cy);
  const double cp = (axes.u.y() * std::sin(roll) + axes.v.y() * std::cos(roll)) / axes.l;
  const double pitch = std::atan2(sp, cp);
  return canonicalize({rad2deg(yaw), rad2deg(pitch), rad2deg(roll)});
}

EulerPose cube2euler_matrix(const Cube2D& cube) { return pose_from_axes(cube_to_axes(cube).axes); }

}  // namespace cubepose
