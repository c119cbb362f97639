#pragma once

#include <array>

#include <Eigen/Dense>

#include "cubepose/rotation.hpp"

namespace cubepose {

using Vec2 = Eigen::Vector2d;
using AxisMatrix = Eigen::Matrix<double, 2, 3>;

/// Image-plane projections of the three cube axes (px) and the edge length l.
/// For an exact orthographic projection the 2x3 matrix [u v w] satisfies
/// A * A^T = l^2 * I.
struct AxisProjection {
  Vec2 u = Vec2::Zero();
  Vec2 v = Vec2::Zero();
  Vec2 w = Vec2::Zero();
  double l = 0.0;

  AxisMatrix matrix() const;
  static AxisProjection from_matrix(const AxisMatrix& a, double l);
};

/// Zero-filled point array (Eigen leaves default-constructed vectors uninitialized).
template <std::size_t N>
std::array<Vec2, N> zero_points() {
  std::array<Vec2, N> a;
  a.fill(Vec2::Zero());
  return a;
}

/// Eight projected cube vertices.
///
/// Vertex b in [0, 8) sits at center + s0*u/2 + s1*v/2 + s2*w/2 where s_i is
/// +1 when bit i of b is set and -1 otherwise. Edges along u join b and b^1,
/// along v b and b^2, along w b and b^4. The +w face is the front face.
struct Cube2D {
  Vec2 center = Vec2::Zero();
  std::array<Vec2, 8> vertices = zero_points<8>();
};

constexpr double vertex_sign(int vertex, int axis) { return (vertex >> axis) & 1 ? 1.0 : -1.0; }

AxisProjection euler_to_axes(const EulerPose& pose, double l);
Cube2D axes_to_cube(const AxisProjection& axes, const Vec2& center);
Cube2D euler2cube(const EulerPose& pose, const Vec2& center, double l);

struct RecoveredAxes {
  AxisProjection axes;
  Vec2 center;
};

/// Face-mean inverse of axes_to_cube: exact on perfect cubes, least squares on
/// noisy ones. Throws kDegenerate when the recovered l is below 1e-9 px.
RecoveredAxes cube_to_axes(const Cube2D& cube);

/// Axes read from the three edges incident to vertex 0, with no averaging.
/// This is how an unadjusted hexahedron is read when the parallel-edge
/// projection is skipped.
AxisProjection corner_axes(const Cube2D& cube);

/// Pose from (possibly noisy) axes: both image rows are normalized, made
/// orthogonal symmetrically, completed by their cross product and converted.
EulerPose pose_from_axes(const AxisProjection& axes);

/// Closed-form inverse through the slope ratios k1..k3 and
/// delta = 1 - cos(2 yaw). Throws kSingular when a ratio denominator vanishes
/// and kConstraintViolation when the cube is not a projected cube.
EulerPose cube2euler_ratios(const Cube2D& cube);

/// Closed-form inverse through the recovered rotation rows. Full yaw range,
/// no ratio singularities.
EulerPose cube2euler_matrix(const Cube2D& cube);

/// delta = 2 k3^2 (1 + k1 k2) / ((k1 - k3)(k2 - k3)); equals 1 - cos(2 yaw)
/// on perfect cubes. Evaluated with the y denominators multiplied out,
///   delta = 2 w_x^2 (u . v) / ((u x w)(v x w)),
/// so it stays defined where an axis projects horizontally (|yaw| = 90).
/// Throws kSingular when u or v is parallel to w and kConstraintViolation
/// like cube2euler_ratios.
double delta_of_cube(const Cube2D& cube);

/// Slope ratios x/y of the three recovered axes, plus the quantities the
/// ratio path divides by (y components normalized by l, and (k1-k3)(k2-k3)).
struct SlopeRatios {
  double k1 = 0.0;
  double k2 = 0.0;
  double k3 = 0.0;
  double min_denominator = 0.0;
  double cross_term = 0.0;
};

/// Throws kSingular when a y component is below 1e-9 px.
SlopeRatios slope_ratios(const Cube2D& cube);

}  // namespace cubepose
