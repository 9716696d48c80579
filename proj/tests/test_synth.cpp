#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "vfuse/ba.hpp"
#include "vfuse/scene.hpp"
#include "vfuse/synth.hpp"

using namespace vfuse;

namespace {

Scene test_scene() {
  Scene scene;
  scene.room = AxisBox{Eigen::Vector3d(-3, -2.5, 0), Eigen::Vector3d(3, 2.5, 3)};
  scene.spheres.push_back({Eigen::Vector3d(0.5, 0, 1.2), 0.5});
  return scene;
}

Intrinsics grid_camera() {
  Intrinsics k;
  k.fx = 35.0;
  k.fy = 35.0;
  k.cx = 17.0;
  k.cy = 10.5;
  k.width = 35;
  k.height = 22;
  return k;
}

std::vector<Pose> small_orbit(int n) {
  return ellipse_trajectory(n, 2.0, 1.5, 1.5, Eigen::Vector3d(0, 0, 1.5));
}

// Laterally shifted cameras with near-total frustum overlap; every pixel is
// covered by several factors with real parallax.
std::vector<Pose> lateral_track(int n) {
  std::vector<Pose> traj;
  for (int i = 0; i < n; ++i)
    traj.push_back(look_at(Eigen::Vector3d(2.0, -0.5 + 1.0 * i / std::max(1, n - 1), 1.5),
                           Eigen::Vector3d(0, 0, 1.5)));
  return traj;
}

FactorGraph build(const NoiseModel& noise, int frames = 6, int window = 2) {
  return synthesize_factor_graph(test_scene(), small_orbit(frames), grid_camera(), noise, window);
}

}  // namespace

TEST_CASE("sigma_at applies the largest covering mask") {
  NoiseModel noise;
  noise.sigma_flow = 0.2;
  noise.masks.push_back({2, 2, 10, 10, 100.0});
  noise.masks.push_back({5, 5, 8, 8, 300.0});
  CHECK(sigma_at(noise, 0, 0) == doctest::Approx(0.2));
  CHECK(sigma_at(noise, 3, 3) == doctest::Approx(20.0));
  CHECK(sigma_at(noise, 6, 6) == doctest::Approx(60.0));
  // Half-open rectangles: the upper corner is outside.
  CHECK(sigma_at(noise, 10, 10) == doctest::Approx(0.2));
}

TEST_CASE("masked pixels carry the inverse-square inflated weight") {
  NoiseModel noise;
  noise.sigma_flow = 0.5;
  noise.masks.push_back({0, 0, 5, 5, 100.0});
  FactorGraph g = build(noise);
  double base = 1.0 / (0.5 * 0.5);
  bool saw_masked = false, saw_clean = false;
  for (const FlowFactor& f : g.factors) {
    REQUIRE(f.weight_x == f.weight_y);
    if (f.px < 5 && f.py < 5) {
      // Inflation 100 scales the weight by 1e-4.
      CHECK(f.weight_x == doctest::Approx(1e-4 * base));
      saw_masked = true;
    } else if (f.px >= 5 && f.py >= 5) {
      CHECK(f.weight_x == doctest::Approx(base));
      saw_clean = true;
    }
  }
  CHECK(saw_masked);
  CHECK(saw_clean);
}

TEST_CASE("zero noise scale gives exact reprojection targets") {
  NoiseModel noise;
  noise.noise_scale = 0.0;
  noise.depth_init_sigma = 0.0;
  noise.pose_init_rot = 0.0;
  noise.pose_init_trans = 0.0;
  FactorGraph g = build(noise);
  REQUIRE(!g.factors.empty());
  // With ground-truth state and exact targets the cost vanishes identically.
  CHECK(graph_cost(g) < 1e-20);
  for (const FlowFactor& f : g.factors) {
    FlowJacobians fj =
        flow_jacobians(g.keyframes[f.frame_i].pose, g.keyframes[f.frame_j].pose,
                       Eigen::Vector2d(f.px, f.py),
                       g.keyframes[f.frame_i].inv_depth.at(f.px, f.py), g.intrinsics);
    REQUIRE(fj.valid);
    CHECK((fj.prediction - f.target).norm() < 1e-12);
  }
}

TEST_CASE("zero noise scale keeps finite nominal weights") {
  NoiseModel noise;
  noise.noise_scale = 0.0;
  noise.sigma_flow = 0.25;
  FactorGraph g = build(noise);
  for (const FlowFactor& f : g.factors) CHECK(f.weight_x == doctest::Approx(16.0));
}

TEST_CASE("identical seeds produce bit-identical graphs") {
  NoiseModel noise;
  noise.outlier_fraction = 0.2;
  noise.masks.push_back({0, 0, 10, 10, 50.0});
  FactorGraph a = build(noise);
  FactorGraph b = build(noise);
  REQUIRE(a.factors.size() == b.factors.size());
  for (std::size_t i = 0; i < a.factors.size(); ++i) {
    CHECK((a.factors[i].target - b.factors[i].target).norm() == 0.0);
    CHECK(a.factors[i].weight_x == b.factors[i].weight_x);
  }
  for (int f = 0; f < a.num_frames(); ++f) {
    CHECK((a.keyframes[f].pose.translation() - b.keyframes[f].pose.translation()).norm() == 0.0);
    CHECK(a.keyframes[f].inv_depth.data() == b.keyframes[f].inv_depth.data());
  }
}

TEST_CASE("different seeds perturb the measurements") {
  NoiseModel noise;
  FactorGraph a = build(noise);
  noise.seed = 2;
  FactorGraph b = build(noise);
  REQUIRE(a.factors.size() == b.factors.size());
  int moved = 0;
  for (std::size_t i = 0; i < a.factors.size(); ++i)
    if ((a.factors[i].target - b.factors[i].target).norm() > 1e-12) ++moved;
  CHECK(moved > static_cast<int>(a.factors.size()) / 2);
}

TEST_CASE("outlier fraction displaces roughly that share of pixels") {
  NoiseModel clean;
  clean.outlier_fraction = 0.0;
  NoiseModel dirty = clean;
  dirty.outlier_fraction = 0.25;
  FactorGraph a = build(clean);
  FactorGraph b = build(dirty);
  REQUIRE(a.factors.size() == b.factors.size());
  // Outlier choice and noise use separate streams, so the runs differ only
  // by the added offsets; weights must be untouched.
  int corrupted = 0;
  for (std::size_t i = 0; i < a.factors.size(); ++i) {
    CHECK(b.factors[i].weight_x == a.factors[i].weight_x);
    double shift = (b.factors[i].target - a.factors[i].target).norm();
    if (shift > 1e-9) {
      // Offsets have the configured magnitude exactly.
      CHECK(shift == doctest::Approx(dirty.outlier_magnitude).epsilon(1e-9));
      ++corrupted;
    }
  }
  double frac = static_cast<double>(corrupted) / a.factors.size();
  CHECK(frac > 0.18);
  CHECK(frac < 0.32);
}

TEST_CASE("window limits factor pairs and both directions appear") {
  NoiseModel noise;
  FactorGraph g = build(noise, 8, 2);
  bool forward = false, backward = false;
  for (const FlowFactor& f : g.factors) {
    CHECK(f.frame_i != f.frame_j);
    CHECK(std::abs(f.frame_i - f.frame_j) <= 2);
    if (f.frame_j > f.frame_i) forward = true;
    if (f.frame_j < f.frame_i) backward = true;
  }
  CHECK(forward);
  CHECK(backward);
  // The window is linear in frame index: no wraparound pairs (0, 7).
  for (const FlowFactor& f : g.factors) {
    bool wraps = (f.frame_i == 0 && f.frame_j == 7) || (f.frame_i == 7 && f.frame_j == 0);
    CHECK_FALSE(wraps);
  }
}

TEST_CASE("initial state is perturbed ground truth with exact gauge frame") {
  NoiseModel noise;
  FactorGraph g = build(noise);
  auto gt_poses = small_orbit(6);
  auto gt_depths = ground_truth_depth_maps(test_scene(), gt_poses, grid_camera());
  // Pose 0 anchors the gauge and must be bit-exact.
  CHECK((g.keyframes[0].pose.translation() - gt_poses[0].translation()).norm() == 0.0);
  double pose_shift = 0.0, depth_shift = 0.0;
  for (int f = 1; f < g.num_frames(); ++f) {
    pose_shift += (g.keyframes[f].pose.translation() - gt_poses[f].translation()).norm();
    for (int y = 0; y < g.grid_height; ++y)
      for (int x = 0; x < g.grid_width; ++x)
        if (gt_depths[f].valid(x, y))
          depth_shift +=
              std::abs(g.keyframes[f].inv_depth.at(x, y) - gt_depths[f].at(x, y));
  }
  CHECK(pose_shift > 0.0);
  CHECK(depth_shift > 0.0);
  CHECK(g.gauge == std::vector<int>{0});
}

TEST_CASE("ground truth depth maps match direct raycasts") {
  auto poses = small_orbit(4);
  auto maps = ground_truth_depth_maps(test_scene(), poses, grid_camera());
  REQUIRE(maps.size() == 4);
  DepthMap direct = raycast_inverse_depth(test_scene(), poses[2], grid_camera());
  CHECK(maps[2].data() == direct.data());
}

TEST_CASE("gauss-newton step at ground truth with exact targets is null") {
  NoiseModel noise;
  noise.noise_scale = 0.0;
  noise.depth_init_sigma = 0.0;
  noise.pose_init_rot = 0.0;
  noise.pose_init_trans = 0.0;
  FactorGraph g = synthesize_factor_graph(test_scene(), lateral_track(5), grid_camera(),
                                          noise, 2);
  BlockSparseHessian h = assemble(g, 0.0);
  ReducedSystem red = schur_reduce(h);
  Eigen::VectorXd dxi = solve_poses(red);
  Eigen::VectorXd dd = solve_depths(h, dxi);
  CHECK(dxi.norm() < 1e-8);
  CHECK(dd.norm() < 1e-8);
}

TEST_CASE("graph passes its own structural validation") {
  NoiseModel noise;
  noise.outlier_fraction = 0.2;
  FactorGraph g = build(noise);
  CHECK_NOTHROW(g.validate());
  REQUIRE(!g.factors.empty());
  // The clean prediction is bounds-checked before noise is added, so every
  // target sits within the image up to the noise and outlier amplitude.
  double slack = noise.outlier_magnitude + 5.0 * noise.sigma_flow;
  for (const FlowFactor& f : g.factors) {
    CHECK(f.weight_x > 0.0);
    CHECK(g.keyframes[f.frame_i].inv_depth.valid(f.px, f.py));
    CHECK(f.target.x() >= -slack);
    CHECK(f.target.y() >= -slack);
    CHECK(f.target.x() <= grid_camera().width - 1.0 + slack);
    CHECK(f.target.y() <= grid_camera().height - 1.0 + slack);
  }
}
