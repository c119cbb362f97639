#pragma once

#include <algorithm>
#include <cmath>

#include "cubepose/bench.hpp"
#include "cubepose/cube.hpp"

namespace cubepose::test {

inline double max_vertex_diff(const Cube2D& a, const Cube2D& b) {
  double m = 0.0;
  for (int k = 0; k < 8; ++k) m = std::max(m, (a.vertices[k] - b.vertices[k]).cwiseAbs().maxCoeff());
  return m;
}

inline double max_angle_diff(const EulerPose& a, const EulerPose& b) {
  return std::max({angle_diff(a.yaw, b.yaw), angle_diff(a.pitch, b.pitch), angle_diff(a.roll, b.roll)});
}

// full-view pose for sample i of a fixed test stream
inline EulerPose random_pose(std::uint64_t seed, std::uint64_t i) {
  SampleRng rng(seed, i);
  return sample_pose(rng, PoseRange::kFull);
}

inline Cube2D add_noise(Cube2D c, double sigma, SampleRng& rng) {
  Vec2 sum = Vec2::Zero();
  for (auto& v : c.vertices) {
    v += sigma * Vec2(rng.normal(), rng.normal());
    sum += v;
  }
  c.center = sum / 8.0;
  return c;
}

}  // namespace cubepose::test
