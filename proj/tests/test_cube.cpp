#include "doctest.h"
#include "support.hpp"

#include "cubepose/cube.hpp"
#include "cubepose/error.hpp"

using namespace cubepose;

namespace {

void check_vec(const Vec2& v, double x, double y, double tol = 1e-12) {
  CHECK(std::abs(v.x() - x) <= tol);
  CHECK(std::abs(v.y() - y) <= tol);
}

}  // namespace

TEST_CASE("euler_to_axes examples") {
  const AxisProjection a = euler_to_axes({0, 0, 0}, 2);
  check_vec(a.u, 2, 0);
  check_vec(a.v, 0, 2);
  check_vec(a.w, 0, 0);
  CHECK(a.l == 2);

  const AxisProjection b = euler_to_axes({90, 0, 0}, 2);
  check_vec(b.u, 0, 0);
  check_vec(b.v, 0, 2);
  check_vec(b.w, 2, 0);

  // numpy oracle (first two rows of Rx * Ry * Rz)
  const AxisProjection c = euler_to_axes({30, 20, 10}, 1);
  check_vec(c.u, 0.8528685319524433, 0.33158795558326737);
  check_vec(c.v, -0.1503837331804353, 0.895720991091381);
  check_vec(c.w, 0.49999999999999994, -0.29619813272602386);
  const AxisMatrix m = c.matrix();
  CHECK(((m * m.transpose()) - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-12);

  const AxisProjection top = euler_to_axes({0, -90, 0}, 2);
  check_vec(top.w, 0, 2);

  CHECK_THROWS_AS(euler_to_axes({0, 0, 0}, 0), Error);
  CHECK_THROWS_AS(euler_to_axes({0, 0, 0}, -1), Error);
}

TEST_CASE("forward constraint A A^T = l^2 I") {
  for (int i = 0; i < 5000; ++i) {
    const EulerPose p = test::random_pose(2, std::uint64_t(i));
    for (double l : {1.0, 64.0, 512.0}) {
      const AxisMatrix a = euler_to_axes(p, l).matrix();
      REQUIRE(((a * a.transpose()) - l * l * Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-12 * l * l);
    }
  }
}

TEST_CASE("axes_to_cube examples") {
  const Cube2D front = axes_to_cube(euler_to_axes({0, 0, 0}, 2), Vec2(0, 0));
  for (int b = 0; b < 8; ++b) {
    check_vec(front.vertices[b], vertex_sign(b, 0), vertex_sign(b, 1));
  }

  // numpy oracle, l=100, center (50, 50)
  const double expected[8][2] = {{-10.124239938600397, 3.4444593025687738}, {75.16261325664394, 36.603254860895504},
                                 {-25.162613256643922, 93.01655841170688}, {60.12423993860041, 126.17535397003361},
                                 {39.87576006139959, -26.175353970033612}, {125.16261325664392, 6.983441588293118},
                                 {24.837386743356067, 63.396745139104496}, {110.1242399386004, 96.55554069743123}};
  const AxisProjection axes = euler_to_axes({30, 20, 10}, 100);
  const Cube2D c = axes_to_cube(axes, Vec2(50, 50));
  for (int b = 0; b < 8; ++b) check_vec(c.vertices[b], expected[b][0], expected[b][1], 1e-12);
  for (int b = 0; b < 8; ++b) {
    if (b & 1) continue;
    CHECK((c.vertices[b | 1] - c.vertices[b] - axes.u).norm() < 1e-12);
  }
  Vec2 mean = Vec2::Zero();
  for (const auto& v : c.vertices) mean += v / 8.0;
  CHECK((mean - Vec2(50, 50)).norm() < 1e-12);
}

TEST_CASE("mean of vertices is the center") {
  for (int i = 0; i < 1000; ++i) {
    SampleRng rng(4, std::uint64_t(i));
    const Vec2 center(rng.uniform(-1e3, 1e3), rng.uniform(-1e3, 1e3));
    const Cube2D c = euler2cube(sample_pose(rng, PoseRange::kFull), center, rng.uniform(1, 500));
    Vec2 mean = Vec2::Zero();
    for (const auto& v : c.vertices) mean += v;
    CHECK((mean / 8.0 - center).norm() < 1e-9);
  }
}

TEST_CASE("cube_to_axes inverts axes_to_cube") {
  const AxisProjection axes = euler_to_axes({30, 20, 10}, 100);
  const RecoveredAxes r = cube_to_axes(axes_to_cube(axes, Vec2(3, -7)));
  CHECK((r.axes.u - axes.u).norm() < 1e-12);
  CHECK((r.axes.v - axes.v).norm() < 1e-12);
  CHECK((r.axes.w - axes.w).norm() < 1e-12);
  CHECK((r.center - Vec2(3, -7)).norm() < 1e-12);
  CHECK(std::abs(r.axes.l - 100.0) < 1e-9);

  Cube2D zero;
  CHECK_THROWS_AS(cube_to_axes(zero), Error);
}

TEST_CASE("cube_to_axes cancels opposite-face-symmetric noise") {
  const AxisProjection axes = euler_to_axes({-40, 15, 60}, 80);
  Cube2D c = axes_to_cube(axes, Vec2(0, 0));
  // products of two or three vertex signs sum to zero over every face pair
  const Vec2 e[4] = {{0.3, -0.2}, {1.1, 0.4}, {-0.7, 0.9}, {0.05, -1.3}};
  for (int b = 0; b < 8; ++b) {
    const double s0 = vertex_sign(b, 0), s1 = vertex_sign(b, 1), s2 = vertex_sign(b, 2);
    c.vertices[b] += s0 * s1 * e[0] + s0 * s2 * e[1] + s1 * s2 * e[2] + s0 * s1 * s2 * e[3];
  }
  const RecoveredAxes r = cube_to_axes(c);
  CHECK((r.axes.u - axes.u).norm() < 1e-12);
  CHECK((r.axes.v - axes.v).norm() < 1e-12);
  CHECK((r.axes.w - axes.w).norm() < 1e-12);
  CHECK(r.center.norm() < 1e-12);
}

TEST_CASE("cube2euler_ratios examples") {
  const EulerPose z = cube2euler_ratios(euler2cube({0, 20, 10}, Vec2(0, 0), 100));
  CHECK(std::abs(z.yaw) < 1e-9);
  CHECK(test::max_angle_diff(cube2euler_ratios(euler2cube({30, 20, 10}, Vec2(5, 5), 100)), {30, 20, 10}) < 1e-6);
  const Cube2D c = euler2cube({60, -10, 5}, Vec2(0, 0), 1);
  CHECK(std::abs(delta_of_cube(c) - 1.5) < 1e-9);
  CHECK(std::abs(cube2euler_ratios(c).yaw - 60) < 1e-6);
}

TEST_CASE("ratio path errors") {
  // yaw 0, roll 90: u is horizontal so u_y = 0
  CHECK_THROWS_AS(cube2euler_ratios(euler2cube({0, 0, 90}, Vec2(0, 0), 100)), Error);
  try {
    cube2euler_ratios(euler2cube({0, 0, 90}, Vec2(0, 0), 100));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSingular);
  }
  // a sheared, non-projected cube
  AxisProjection bad;
  bad.u = Vec2(100, 30);
  bad.v = Vec2(40, 90);
  bad.w = Vec2(70, -20);
  bad.l = 100;
  try {
    cube2euler_ratios(axes_to_cube(bad, Vec2(0, 0)));
    FAIL("expected a constraint error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kConstraintViolation);
    CHECK(std::string(e.what()).find("cube violates projection constraints") != std::string::npos);
  }
}

TEST_CASE("cube2euler_matrix examples") {
  CHECK(test::max_angle_diff(cube2euler_matrix(euler2cube({150, 30, -170}, Vec2(0, 0), 80)), {150, 30, -170}) < 1e-7);
  CHECK(test::max_angle_diff(cube2euler_matrix(euler2cube({0, 0, 0}, Vec2(0, 0), 80)), {0, 0, 0}) < 1e-12);
  CHECK_THROWS_AS(cube2euler_matrix(Cube2D{}), Error);
}

TEST_CASE("matrix and ratio round trips over full-view poses") {
  double worst_matrix = 0.0, worst_ratio = 0.0;
  int ratio_checked = 0;
  for (int i = 0; i < 10000; ++i) {
    SampleRng rng(6, std::uint64_t(i));
    const EulerPose p = sample_pose(rng, PoseRange::kFull);
    const Vec2 center(rng.uniform(-1e3, 1e3), rng.uniform(-1e3, 1e3));
    for (double l : {1.0, 64.0, 512.0}) {
      const Cube2D c = euler2cube(p, center, l);
      worst_matrix = std::max(worst_matrix, test::max_angle_diff(cube2euler_matrix(c), canonicalize(p)));
      const SlopeRatios k = slope_ratios(c);
      if (k.min_denominator > 1e-3 && std::abs(k.cross_term) > 1e-3) {
        worst_ratio = std::max(worst_ratio, test::max_angle_diff(cube2euler_ratios(c), canonicalize(p)));
        ++ratio_checked;
      }
    }
  }
  CHECK(worst_matrix < 1e-6);
  CHECK(worst_ratio < 1e-4);
  CHECK(ratio_checked > 20000);
}

TEST_CASE("delta_of_cube examples and range") {
  CHECK(std::abs(delta_of_cube(euler2cube({0, 10, 20}, Vec2(0, 0), 10))) < 1e-12);
  CHECK(std::abs(delta_of_cube(euler2cube({90, 10, 20}, Vec2(0, 0), 10)) - 2.0) < 1e-9);
  CHECK(std::abs(delta_of_cube(euler2cube({45, 15, -20}, Vec2(0, 0), 10)) - 1.0) < 1e-9);
  for (int i = 0; i < 10000; ++i) {
    const EulerPose p = test::random_pose(12, std::uint64_t(i));
    const Cube2D c = euler2cube(p, Vec2(0, 0), 50);
    const AxisProjection a = euler_to_axes(p, 50);
    if (std::abs(a.u.x() * a.w.y() - a.u.y() * a.w.x()) < 1e-6 * 2500 ||
        std::abs(a.v.x() * a.w.y() - a.v.y() * a.w.x()) < 1e-6 * 2500) {
      continue;
    }
    const double delta = delta_of_cube(c);
    REQUIRE(delta >= 0.0);
    REQUIRE(delta <= 2.0);
    REQUIRE(std::abs(delta - (1.0 - std::cos(2.0 * deg2rad(p.yaw)))) < 1e-9);
  }
}

TEST_CASE("translation and scale invariance") {
  for (int i = 0; i < 500; ++i) {
    SampleRng rng(13, std::uint64_t(i));
    const EulerPose p = sample_pose(rng, PoseRange::kFull);
    const Cube2D c = euler2cube(p, Vec2(10, 20), 60);
    Cube2D moved = c, scaled = c;
    const Vec2 t(rng.uniform(-300, 300), rng.uniform(-300, 300));
    const double s = rng.uniform(0.2, 5);
    moved.center += t;
    for (auto& v : moved.vertices) v += t;
    for (auto& v : scaled.vertices) v = c.center + s * (v - c.center);
    const EulerPose e = cube2euler_matrix(c);
    CHECK(test::max_angle_diff(cube2euler_matrix(moved), e) < 1e-9);
    CHECK(test::max_angle_diff(cube2euler_matrix(scaled), e) < 1e-9);
  }
}

TEST_CASE("yaw sign follows w_x") {
  for (int i = 0; i < 2000; ++i) {
    const EulerPose p = canonicalize(test::random_pose(14, std::uint64_t(i)));
    if (std::abs(p.yaw) < 1e-6 || std::abs(std::abs(p.yaw) - 180) < 1e-6) continue;
    const AxisProjection a = euler_to_axes(p, 10);
    CHECK((p.yaw > 0) == (a.w.x() > 0));
  }
}

TEST_CASE("corner_axes equals face-mean axes on perfect cubes") {
  const Cube2D c = euler2cube({-120, 40, 33}, Vec2(1, 2), 70);
  const AxisProjection a = corner_axes(c);
  const AxisProjection b = cube_to_axes(c).axes;
  CHECK((a.u - b.u).norm() < 1e-12);
  CHECK((a.v - b.v).norm() < 1e-12);
  CHECK((a.w - b.w).norm() < 1e-12);
}
