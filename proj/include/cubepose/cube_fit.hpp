#pragma once

#include <array>
#include <utility>

#include "cubepose/cube.hpp"

namespace cubepose {

/// Dual octahedron of a projected hexahedron: its apexes are the six face
/// centroids, ordered (+u, -u, +v, -v, +w, -w).
struct Octa2D {
  Vec2 center = Vec2::Zero();
  std::array<Vec2, 6> apexes = zero_points<6>();

  const Vec2& plus(int axis) const { return apexes[2 * axis]; }
  const Vec2& minus(int axis) const { return apexes[2 * axis + 1]; }
};

/// Relative 3D dimensions of the cuboid along u, v, w; positive and stored
/// normalized to mean 1. A regular hexahedron is (1, 1, 1).
class RelDims {
 public:
  RelDims() = default;
  /// Throws kInvalidArgument unless all three are finite and > 0.
  RelDims(double du, double dv, double dw);

  double operator[](int axis) const { return d_[axis]; }
  const std::array<double, 3>& values() const { return d_; }

 private:
  std::array<double, 3> d_{1.0, 1.0, 1.0};
};

Octa2D dual_octahedron(const Cube2D& cube);

/// Re-centers on the mean of the six apexes and makes each diagonal pair
/// antipodal: apex(+-k) = center +- (apex(+k) - apex(-k)) / 2.
Octa2D symmetrize(const Octa2D& octa);

/// Symmetrizes, then regulates the three diagonals so that they are the
/// projection of orthogonal 3D diagonals with lengths proportional to dims:
/// with D = diag(dims) the 2x3 diagonal matrix A is replaced by
/// polar(A D^-1) * mean_sigma(A D^-1) * D. Rank-deficient input is only
/// symmetrized.
Octa2D regulate_diagonals(const Octa2D& octa, const RelDims& dims);

/// vertex(b) = center + sum_k s_k(b) * (apex(+k) - apex(-k)) / 2, the inverse
/// of dual_octahedron for every hexahedron with parallel opposite edges.
Cube2D dual_hexahedron(const Octa2D& octa);

/// Edge adjustment: dual_hexahedron(regulate_diagonals(dual_octahedron(cube))).
/// The result has exactly parallel opposite edges.
Cube2D edge_adjust(const Cube2D& cube, const RelDims& dims = {});

struct RectifiedCube {
  Cube2D cube;
  double l = 0.0;
};

/// Nearest (Frobenius) cube whose axis matrix satisfies A A^T = l^2 I:
/// both singular values of A are replaced by their mean.
/// Throws kDegenerate ("view-degenerate cube") when sigma2 < 1e-9 * sigma1.
RectifiedCube rectify_orthoscale(const Cube2D& cube);

/// Largest angle (radians) between two edges of the same direction class.
/// Edges shorter than 1e-7 of the longest edge are skipped; throws
/// kDegenerate when no pair can be compared.
double parallelism_residual(const Cube2D& cube);

}  // namespace cubepose
