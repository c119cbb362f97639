#include "cubepose/cube_fit.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "cubepose/error.hpp"

namespace cubepose {

namespace {

constexpr double kRankTol = 1e-9;

AxisMatrix half_diagonals(const Octa2D& octa) {
  AxisMatrix a;
  for (int k = 0; k < 3; ++k) {
    a.col(k) = 0.5 * (octa.plus(k) - octa.minus(k));
  }
  return a;
}

Octa2D from_half_diagonals(const Vec2& center, const AxisMatrix& a) {
  Octa2D out;
  out.center = center;
  for (int k = 0; k < 3; ++k) {
    out.apexes[2 * k] = center + a.col(k);
    out.apexes[2 * k + 1] = center - a.col(k);
  }
  return out;
}

// Both singular values of a 2x3 matrix replaced by their mean. Returns false
// when the matrix is rank deficient.
bool equalize_singular_values(const AxisMatrix& a, AxisMatrix& out, double& mean_sigma) {
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(a),
                                               Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd s = svd.singularValues();
  if (!(s(0) > 0.0) || !(s(1) >= kRankTol * s(0))) {
    return false;
  }
  mean_sigma = 0.5 * (s(0) + s(1));
  out = mean_sigma * svd.matrixU() * svd.matrixV().transpose();
  return true;
}

}  // namespace

RelDims::RelDims(double du, double dv, double dw) {
  for (double d : {du, dv, dw}) {
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw Error(ErrorCode::kInvalidArgument, "relative dimensions must be positive");
    }
  }
  const double mean = (du + dv + dw) / 3.0;
  // Already-normalized input is kept as is so stored dims round-trip exactly.
  if (std::abs(mean - 1.0) <= 1e-12) {
    d_ = {du, dv, dw};
  } else {
    d_ = {du / mean, dv / mean, dw / mean};
  }
}

Octa2D dual_octahedron(const Cube2D& cube) {
  Octa2D octa;
  Vec2 sum = Vec2::Zero();
  for (const Vec2& p : cube.vertices) {
    sum += p;
  }
  octa.center = sum / 8.0;
  for (int k = 0; k < 3; ++k) {
    Vec2 plus = Vec2::Zero(), minus = Vec2::Zero();
    for (int b = 0; b < 8; ++b) {
      ((b >> k) & 1 ? plus : minus) += cube.vertices[b];
    }
    octa.apexes[2 * k] = plus / 4.0;
    octa.apexes[2 * k + 1] = minus / 4.0;
  }
  return octa;
}

Octa2D symmetrize(const Octa2D& octa) {
  Vec2 center = Vec2::Zero();
  for (const Vec2& p : octa.apexes) {
    center += p;
  }
  center /= 6.0;
  return from_half_diagonals(center, half_diagonals(octa));
}

Octa2D regulate_diagonals(const Octa2D& octa, const RelDims& dims) {
  const Octa2D sym = symmetrize(octa);
  const AxisMatrix a = half_diagonals(sym);
  const Eigen::Vector3d d(dims[0], dims[1], dims[2]);

  AxisMatrix scaled = a * d.cwiseInverse().asDiagonal();
  AxisMatrix regulated;
  double sigma = 0.0;
  if (!equalize_singular_values(scaled, regulated, sigma)) {
    return sym;
  }
  return from_half_diagonals(sym.center, regulated * d.asDiagonal());
}

Cube2D dual_hexahedron(const Octa2D& octa) {
  const AxisMatrix a = half_diagonals(octa);
  Cube2D cube;
  cube.center = octa.center;
  for (int b = 0; b < 8; ++b) {
    cube.vertices[b] = octa.center + vertex_sign(b, 0) * a.col(0) + vertex_sign(b, 1) * a.col(1) +
                       vertex_sign(b, 2) * a.col(2);
  }
  return cube;
}

Cube2D edge_adjust(const Cube2D& cube, const RelDims& dims) {
  const Octa2D octa = dual_octahedron(cube);
  if (!(half_diagonals(octa).cwiseAbs().maxCoeff() > 1e-9)) {
    throw Error(ErrorCode::kDegenerate, "degenerate cube");
  }
  return dual_hexahedron(regulate_diagonals(octa, dims));
}

RectifiedCube rectify_orthoscale(const Cube2D& cube) {
  const RecoveredAxes rec = cube_to_axes(cube);
  AxisMatrix rectified;
  double l = 0.0;
  if (!equalize_singular_values(rec.axes.matrix(), rectified, l)) {
    throw Error(ErrorCode::kDegenerate, "view-degenerate cube");
  }
  return {axes_to_cube(AxisProjection::from_matrix(rectified, l), rec.center), l};
}

double parallelism_residual(const Cube2D& cube) {
  double longest = 0.0;
  for (int k = 0; k < 3; ++k) {
    for (int b = 0; b < 8; ++b) {
      if (!((b >> k) & 1)) {
        longest = std::max(longest, (cube.vertices[b | (1 << k)] - cube.vertices[b]).norm());
      }
    }
  }
  const double min_len = 1e-7 * longest;

  double residual = 0.0;
  bool compared = false;
  for (int k = 0; k < 3; ++k) {
    std::array<Vec2, 4> edges;
    int n = 0;
    for (int b = 0; b < 8; ++b) {
      if (!((b >> k) & 1)) {
        edges[n++] = cube.vertices[b | (1 << k)] - cube.vertices[b];
      }
    }
    for (int i = 0; i < 4; ++i) {
      for (int j = i + 1; j < 4; ++j) {
        const Vec2& e1 = edges[i];
        const Vec2& e2 = edges[j];
        if (!(e1.norm() > min_len) || !(e2.norm() > min_len)) {
          continue;
        }
        const double cross = e1.x() * e2.y() - e1.y() * e2.x();
        residual = std::max(residual, std::atan2(std::abs(cross), e1.dot(e2)));
        compared = true;
      }
    }
  }
  if (!compared) {
    throw Error(ErrorCode::kDegenerate, "parallelism_residual: all edges degenerate");
  }
  return residual;
}

}  // namespace cubepose
