#include "doctest.h"
#include "support.hpp"

#include <sstream>

#include "cubepose/dataset.hpp"
#include "cubepose/error.hpp"
#include "json.hpp"

using namespace cubepose;

namespace {

HeadLabel head(const std::string& id, BBox box, EulerPose pose) {
  HeadLabel h;
  h.image_id = id;
  h.bbox = box;
  h.pose = pose;
  return h;
}

}  // namespace

TEST_CASE("label_to_cube examples") {
  const CubeLabel plain = label_to_cube(head("a", {0, 0, 100, 100}, {0, 0, 0}));
  CHECK((plain.cube.center - Vec2(50, 50)).norm() < 1e-12);
  CHECK(cube_to_axes(plain.cube).axes.l == doctest::Approx(100));
  // the +w face projects onto the box center for the identity pose
  Vec2 front = Vec2::Zero();
  for (int b = 4; b < 8; ++b) front += plain.cube.vertices[b] / 4.0;
  CHECK((front - Vec2(50, 50)).norm() < 1e-12);
  CHECK(plain.dims.values() == std::array<double, 3>{1, 1, 1});

  HeadLabel with_nose = head("a", {0, 0, 100, 100}, {0, 0, 0});
  with_nose.nose = Vec2(60, 50);
  const CubeLabel shifted = label_to_cube(with_nose);
  for (int b = 0; b < 8; ++b) CHECK((shifted.cube.vertices[b] - plain.cube.vertices[b] - Vec2(10, 0)).norm() < 1e-12);

  const CubeLabel tilted = label_to_cube(head("b", {0, 0, 100, 100}, {30, 20, 10}));
  CHECK(test::max_angle_diff(cube2euler_matrix(tilted.cube), {30, 20, 10}) < 1e-6);

  HeadLabel sized = head("c", {0, 0, 100, 60}, {0, 0, 0});
  CHECK(cube_to_axes(label_to_cube(sized).cube).axes.l == doctest::Approx(60));
  sized.l = 75;
  CHECK(cube_to_axes(label_to_cube(sized).cube).axes.l == doctest::Approx(75));

  CHECK_THROWS_AS(label_to_cube(head("d", {0, 0, 0, 10}, {0, 0, 0})), Error);
  CHECK_THROWS_AS(label_to_cube(head("d", {0, 0, 10, -1}, {0, 0, 0})), Error);
}

TEST_CASE("label_to_cube preserves the pose, nose or not") {
  for (int i = 0; i < 2000; ++i) {
    SampleRng rng(41, std::uint64_t(i));
    HeadLabel h = head("x", {rng.uniform(0, 500), rng.uniform(0, 500), rng.uniform(10, 200), rng.uniform(10, 200)},
                       sample_pose(rng, PoseRange::kFull));
    if (i % 2) h.nose = Vec2(rng.uniform(0, 700), rng.uniform(0, 700));
    REQUIRE(test::max_angle_diff(cube2euler_matrix(label_to_cube(h).cube), canonicalize(h.pose)) < 1e-6);
  }
}

TEST_CASE("gaussian_radius matches the reference implementation") {
  // values from the three-case CenterNet formula evaluated in numpy
  CHECK(gaussian_radius(25, 25) == doctest::Approx(6.83300132670378).epsilon(1e-14));
  CHECK(gaussian_radius(10, 20) == doctest::Approx(3.6779253585061333).epsilon(1e-14));
  CHECK(gaussian_radius(3, 3) == doctest::Approx(0.8199601592044532).epsilon(1e-14));
  CHECK(gaussian_radius(2, 2) == doctest::Approx(0.5466401061363024).epsilon(1e-14));

  SigmaPolicy p;
  CHECK(p.radius(25, 25) == 6);
  CHECK(p.radius(3, 3) == 1);  // floor of one cell
  p.kind = SigmaPolicy::Kind::kFixed;
  p.fixed_radius = 3;
  CHECK(p.radius(100, 100) == 3);
}

TEST_CASE("render_targets") {
  CHECK_THROWS_AS(render_targets({}, 0, 320, 4), Error);
  const TensorMaps empty = render_targets({}, 320, 240, 4);
  CHECK(empty.height() == 60);
  CHECK(empty.width() == 80);
  for (const Tensor* t : {&empty.center_heat, &empty.kp_heat, &empty.kp_off, &empty.kp_disp, &empty.dims}) {
    CHECK(std::all_of(t->data.begin(), t->data.end(), [](float v) { return v == 0.0f; }));
  }

  const CubeLabel label = label_to_cube(head("a", {100, 100, 100, 100}, {30, 20, 10}));
  const TensorMaps m = render_targets({label}, 320, 320, 4);
  // center (150, 150) -> cell (37, 37), offset (0.5, 0.5); box 25 cells -> radius 6
  CHECK(m.center_heat.at(37, 37, 0) == 1.0f);
  CHECK(m.center_off.at(37, 37, 0) == 0.5f);
  CHECK(m.center_off.at(37, 37, 1) == 0.5f);
  CHECK(m.box_size.at(37, 37, 0) == 25.0f);
  const double sigma = 13.0 / 6.0;
  CHECK(m.center_heat.at(37, 38, 0) == static_cast<float>(std::exp(-1.0 / (2 * sigma * sigma))));
  CHECK(m.center_heat.at(37, 38, 0) == doctest::Approx(0.8989670691281666).epsilon(1e-7));
  CHECK(m.center_heat.at(37, 43, 0) > 0.0f);
  CHECK(m.center_heat.at(37, 44, 0) == 0.0f);
  for (int k = 0; k < 3; ++k) CHECK(m.dims.at(37, 37, k) == 1.0f);
  for (int k = 0; k < 8; ++k) {
    const Vec2 v = label.cube.vertices[k] / 4.0;
    const int vx = int(std::floor(v.x())), vy = int(std::floor(v.y()));
    CHECK(m.kp_heat.at(vy, vx, k) == 1.0f);
    CHECK(m.kp_disp.at(37, 37, 2 * k) == float(vx - 37));
    CHECK(m.kp_disp.at(37, 37, 2 * k + 1) == float(vy - 37));
    CHECK(m.kp_off.at(vy, vx, 2 * k) == static_cast<float>(v.x() - vx));
  }
  m.validate();
}

TEST_CASE("render_targets: overlapping splats combine by max") {
  const CubeLabel a = label_to_cube(head("a", {100, 100, 40, 40}, {0, 0, 0}));
  const CubeLabel b = label_to_cube(head("b", {108, 100, 40, 40}, {0, 0, 0}));
  const TensorMaps ma = render_targets({a}, 320, 320, 4);
  const TensorMaps mb = render_targets({b}, 320, 320, 4);
  const TensorMaps both = render_targets({a, b}, 320, 320, 4);
  for (std::size_t i = 0; i < both.center_heat.data.size(); ++i) {
    CHECK(both.center_heat.data[i] == std::max(ma.center_heat.data[i], mb.center_heat.data[i]));
  }
}

TEST_CASE("evaluate examples") {
  const std::vector<PosePrediction> gts{{"a", {10, 20, 30}}, {"b", {-179, 0, 0}}, {"c", {95, 5, 5}}};
  const EvalReport zero = evaluate(gts, gts);
  CHECK(zero.yaw_mae == 0.0);
  CHECK(zero.pitch_mae == 0.0);
  CHECK(zero.roll_mae == 0.0);
  CHECK(zero.mean_mae == 0.0);
  CHECK(zero.count == 3);

  const EvalReport wrap = evaluate({{"b", {179, 0, 0}}}, gts);
  CHECK(wrap.yaw_mae == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(wrap.mean_mae == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  const std::vector<PosePrediction> three{{"a", {15, 20, 30}}, {"b", {-169, 0, 0}}, {"c", {80, 5, 5}}};
  const EvalReport r = evaluate(three, gts);
  CHECK(r.yaw_mae == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(r.pitch_mae == 0.0);
  CHECK(r.mean_mae == doctest::Approx(10.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("evaluate: frontal subset excludes |yaw| >= 90") {
  const std::vector<PosePrediction> gts{{"a", {89.999, 0, 0}}, {"b", {90, 0, 0}}, {"c", {-90, 0, 0}}, {"d", {-10, 0, 0}}};
  const std::vector<PosePrediction> preds{{"a", {88.999, 0, 0}}, {"b", {0, 0, 0}}, {"c", {0, 0, 0}}, {"d", {-7, 0, 0}}};
  const EvalReport r = evaluate(preds, gts, Subset::kFrontal);
  CHECK(r.count == 2);
  CHECK(r.yaw_mae == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(r.subset == Subset::kFrontal);
  CHECK_THROWS_AS(evaluate({{"b", {0, 0, 0}}}, gts, Subset::kFrontal), Error);
}

TEST_CASE("evaluate: errors") {
  const std::vector<PosePrediction> gts{{"a", {0, 0, 0}}};
  try {
    evaluate({{"a", {0, 0, 0}}, {"zz", {0, 0, 0}}, {"yy", {0, 0, 0}}}, gts);
    FAIL("expected an unmatched error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnmatched);
    CHECK(std::string(e.what()).find("zz, yy") != std::string::npos);
  }
  CHECK_THROWS_AS(evaluate({}, gts), Error);
  CHECK_THROWS_AS(evaluate({{"a", {0, 0, 0}}, {"a", {1, 0, 0}}}, gts), Error);
}

TEST_CASE("evaluate: pair order does not matter") {
  std::vector<PosePrediction> preds, gts;
  for (int i = 0; i < 50; ++i) {
    SampleRng rng(42, std::uint64_t(i));
    gts.push_back({std::to_string(i), sample_pose(rng, PoseRange::kFull)});
    preds.push_back({std::to_string(i), sample_pose(rng, PoseRange::kFull)});
  }
  const EvalReport a = evaluate(preds, gts);
  std::reverse(preds.begin(), preds.end());
  const EvalReport b = evaluate(preds, gts);
  CHECK(a.yaw_mae == doctest::Approx(b.yaw_mae).epsilon(1e-14));
  CHECK(a.mean_mae == doctest::Approx((a.yaw_mae + a.pitch_mae + a.roll_mae) / 3).epsilon(1e-15));
}

TEST_CASE("eval report formats") {
  EvalReport r;
  r.yaw_mae = 1.5;
  r.pitch_mae = 2.25;
  r.roll_mae = 0.125;
  r.mean_mae = (1.5 + 2.25 + 0.125) / 3;
  r.count = 4;
  const std::string table = eval_report_table(r);
  CHECK(table.find("1.500000") != std::string::npos);
  CHECK(table.find("1.291667") != std::string::npos);
  const auto j = nlohmann::json::parse(eval_report_json(r));
  CHECK(j.at("mean_mae").get<double>() == r.mean_mae);
  CHECK(j.at("count").get<int>() == 4);
  CHECK(j.at("subset") == "all");
}

TEST_CASE("label files round trip bit-exactly") {
  std::vector<CubeLabel> cubes;
  std::vector<HeadLabel> heads;
  for (int i = 0; i < 50; ++i) {
    SampleRng rng(43, std::uint64_t(i));
    HeadLabel h = head("img_" + std::to_string(i), {rng.uniform(0, 300), rng.uniform(0, 300), 0.1 + rng.uniform(), 77},
                       sample_pose(rng, PoseRange::kFull));
    if (i % 3 == 0) h.nose = Vec2(rng.uniform(), rng.uniform());
    if (i % 4 == 0) h.l = rng.uniform(1, 9);
    heads.push_back(h);
    CubeLabel c = label_to_cube(h);
    if (i % 5 == 0) c.dims = RelDims(0.9, 1.3, 0.8);
    cubes.push_back(c);
  }
  std::stringstream hs, cs;
  write_head_labels(hs, heads);
  write_cube_labels(cs, cubes);
  const auto h2 = read_head_labels(hs, true).values();
  const auto c2 = read_cube_labels(cs, true).values();
  REQUIRE(h2.size() == heads.size());
  REQUIRE(c2.size() == cubes.size());
  for (std::size_t i = 0; i < heads.size(); ++i) {
    CHECK(h2[i].image_id == heads[i].image_id);
    CHECK(h2[i].bbox == heads[i].bbox);
    CHECK(h2[i].pose == heads[i].pose);
    CHECK(h2[i].nose == heads[i].nose);
    CHECK(h2[i].l == heads[i].l);
    CHECK(c2[i].cube.center == cubes[i].cube.center);
    for (int b = 0; b < 8; ++b) CHECK(c2[i].cube.vertices[b] == cubes[i].cube.vertices[b]);
    CHECK(c2[i].dims.values() == cubes[i].dims.values());
    CHECK(c2[i].pose == cubes[i].pose);
  }
}

TEST_CASE("JSONL readers report malformed lines with their numbers") {
  std::istringstream in(
      R"({"image_id":"a","bbox":[0,0,10,10],"yaw":1,"pitch":2,"roll":3})" "\n"
      "{broken\n"
      "\n"
      R"({"image_id":"c","bbox":[0,0,10],"yaw":1,"pitch":2,"roll":3})" "\n"
      R"({"image_id":"d","bbox":[0,0,10,10],"yaw":1,"pitch":2,"roll":3})" "\n");
  const auto r = read_head_labels(in);
  REQUIRE(r.records.size() == 2);
  CHECK(r.records[0].first == 1);
  CHECK(r.records[1].first == 5);
  REQUIRE(r.errors.size() == 2);
  CHECK(r.errors[0].line == 2);
  CHECK(r.errors[1].line == 4);

  std::istringstream again("{broken\n");
  try {
    read_head_labels(again, true);
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
}

TEST_CASE("prediction records") {
  const auto p = prediction_from_json(prediction_to_json({"x", {1.25, -2.5, 3}}));
  REQUIRE(p);
  CHECK(p->image_id == "x");
  CHECK(p->pose == EulerPose{1.25, -2.5, 3});
  CHECK_FALSE(prediction_from_json(prediction_error_to_json("x", "ratio path singular")));
}
