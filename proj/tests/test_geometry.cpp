#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "vfuse/error.hpp"
#include "vfuse/geometry.hpp"
#include "vfuse/rng.hpp"

using namespace vfuse;

namespace {

Twist random_twist(Rng& rng, double rot_scale, double trans_scale) {
  Twist t;
  for (int i = 0; i < 3; ++i) t[i] = rng.normal(0.0, rot_scale);
  for (int i = 3; i < 6; ++i) t[i] = rng.normal(0.0, trans_scale);
  return t;
}

Intrinsics test_camera() {
  Intrinsics k;
  k.fx = 300.0;
  k.fy = 280.0;
  k.cx = 160.5;
  k.cy = 120.5;
  k.width = 320;
  k.height = 240;
  return k;
}

}  // namespace

TEST_CASE("exp of zero is the identity") {
  Pose p = Pose::exp(Twist::Zero());
  CHECK(p.translation().norm() == doctest::Approx(0.0));
  CHECK(p.quaternion().angularDistance(Eigen::Quaterniond::Identity()) ==
        doctest::Approx(0.0));
}

TEST_CASE("log of the identity is zero") {
  CHECK(Pose().log().norm() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("exp then log returns the twist") {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    Twist t = random_twist(rng, 0.6, 2.0);
    Twist back = Pose::exp(t).log();
    CHECK((back - t).norm() < 1e-10 * std::max(1.0, t.norm()));
  }
}

TEST_CASE("log then exp returns the pose") {
  Rng rng(22);
  for (int trial = 0; trial < 200; ++trial) {
    Pose p = Pose::exp(random_twist(rng, 0.8, 3.0));
    Pose q = Pose::exp(p.log());
    CHECK((q.translation() - p.translation()).norm() < 1e-10);
    CHECK(q.quaternion().angularDistance(p.quaternion()) < 1e-10);
  }
}

TEST_CASE("exp handles tiny rotations without loss") {
  Twist t = Twist::Zero();
  t << 1e-12, -2e-12, 5e-13, 0.3, -0.1, 0.7;
  Twist back = Pose::exp(t).log();
  CHECK((back - t).norm() < 1e-14);
}

TEST_CASE("composition and inverse cancel") {
  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    Pose p = Pose::exp(random_twist(rng, 1.0, 2.0));
    Pose id = p * p.inverse();
    CHECK(id.translation().norm() < 1e-12);
    CHECK(id.quaternion().angularDistance(Eigen::Quaterniond::Identity()) < 1e-12);
  }
}

TEST_CASE("pose action matches rotation plus translation") {
  Rng rng(24);
  Pose p = Pose::exp(random_twist(rng, 0.9, 1.5));
  Eigen::Vector3d x(0.3, -1.2, 2.5);
  Eigen::Vector3d expect = p.rotation() * x + p.translation();
  CHECK((p * x - expect).norm() < 1e-12);
}

TEST_CASE("composition action equals sequential action") {
  Rng rng(25);
  Pose a = Pose::exp(random_twist(rng, 0.5, 1.0));
  Pose b = Pose::exp(random_twist(rng, 0.5, 1.0));
  Eigen::Vector3d x(1.0, 2.0, 3.0);
  CHECK((((a * b) * x) - (a * (b * x))).norm() < 1e-12);
}

TEST_CASE("project and backproject are mutual inverses") {
  Intrinsics k = test_camera();
  Rng rng(26);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::Vector2d px(rng.uniform(0.0, k.width - 1.0), rng.uniform(0.0, k.height - 1.0));
    double d = rng.uniform(0.05, 2.0);
    Eigen::Vector3d pc = backproject(px, d, k);
    CHECK(pc.z() == doctest::Approx(1.0 / d));
    Eigen::Vector2d back = project(pc, k);
    CHECK((back - px).norm() < 1e-10);
  }
}

TEST_CASE("project rejects non-positive depth") {
  Intrinsics k = test_camera();
  CHECK_THROWS_AS(project(Eigen::Vector3d(0, 0, 0), k), NonPositiveDepth);
  CHECK_THROWS_AS(project(Eigen::Vector3d(1, 1, -2), k), NonPositiveDepth);
}

TEST_CASE("backproject rejects non-positive inverse depth") {
  Intrinsics k = test_camera();
  CHECK_THROWS_AS(backproject(Eigen::Vector2d(10, 10), 0.0, k), NonPositiveInverseDepth);
  CHECK_THROWS_AS(backproject(Eigen::Vector2d(10, 10), -0.5, k), NonPositiveInverseDepth);
}

TEST_CASE("intrinsics validation rejects out-of-range values") {
  Intrinsics k = test_camera();
  k.fx = -1.0;
  CHECK_THROWS_AS(k.validate(), InvalidIntrinsics);
  k = test_camera();
  k.cx = 400.0;
  CHECK_THROWS_AS(k.validate(), InvalidIntrinsics);
  k = test_camera();
  k.width = 0;
  CHECK_THROWS_AS(k.validate(), InvalidIntrinsics);
}

TEST_CASE("projection jacobian matches finite differences") {
  Intrinsics k = test_camera();
  Rng rng(27);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::Vector3d pc(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(0.5, 5.0));
    Eigen::Matrix<double, 2, 3> j = project_jacobian(pc, k);
    const double h = 1e-7;
    for (int c = 0; c < 3; ++c) {
      Eigen::Vector3d hi = pc, lo = pc;
      hi[c] += h;
      lo[c] -= h;
      Eigen::Vector2d fd = (project(hi, k) - project(lo, k)) / (2.0 * h);
      CHECK((j.col(c) - fd).norm() < 1e-5);
    }
  }
}

TEST_CASE("downscaled intrinsics sample the same rays") {
  Intrinsics fine = test_camera();
  const int f = 8;
  Intrinsics coarse = fine.downscaled(f);
  CHECK(coarse.width == fine.width / f);
  CHECK(coarse.height == fine.height / f);
  // Coarse pixel (i, j) must lift to the same ray as fine pixel
  // (f i + (f-1)/2, f j + (f-1)/2).
  double off = (f - 1) * 0.5;
  for (int i : {0, 3, 20}) {
    for (int j : {0, 5, 14}) {
      Eigen::Vector3d pc = backproject(Eigen::Vector2d(i, j), 0.5, coarse);
      Eigen::Vector2d fine_px = project(pc, fine);
      CHECK(fine_px.x() == doctest::Approx(f * i + off).epsilon(1e-12));
      CHECK(fine_px.y() == doctest::Approx(f * j + off).epsilon(1e-12));
    }
  }
}

TEST_CASE("upscaled undoes downscaled") {
  Intrinsics fine = test_camera();
  Intrinsics back = fine.downscaled(8).upscaled(8);
  CHECK(back.fx == doctest::Approx(fine.fx));
  CHECK(back.fy == doctest::Approx(fine.fy));
  CHECK(back.cx == doctest::Approx(fine.cx));
  CHECK(back.cy == doctest::Approx(fine.cy));
  CHECK(back.width == fine.width);
  CHECK(back.height == fine.height);
}

TEST_CASE("flow prediction equals manual reprojection") {
  Intrinsics k = test_camera();
  Rng rng(28);
  for (int trial = 0; trial < 50; ++trial) {
    Pose ti = Pose::exp(random_twist(rng, 0.1, 0.2));
    Pose tj = Pose::exp(random_twist(rng, 0.1, 0.2));
    Eigen::Vector2d px(rng.uniform(20.0, 300.0), rng.uniform(20.0, 220.0));
    double d = rng.uniform(0.2, 1.0);
    FlowJacobians fj = flow_jacobians(ti, tj, px, d, k);
    REQUIRE(fj.valid);
    Eigen::Vector3d world = ti * backproject(px, d, k);
    Eigen::Vector2d expect = project(tj.inverse() * world, k);
    CHECK((fj.prediction - expect).norm() < 1e-10);
  }
}

TEST_CASE("flow jacobians match finite differences") {
  Intrinsics k = test_camera();
  Rng rng(29);
  const double h = 1e-6;
  for (int trial = 0; trial < 20; ++trial) {
    Pose ti = Pose::exp(random_twist(rng, 0.12, 0.25));
    Pose tj = Pose::exp(random_twist(rng, 0.12, 0.25));
    Eigen::Vector2d px(rng.uniform(40.0, 280.0), rng.uniform(40.0, 200.0));
    double d = rng.uniform(0.2, 0.8);
    FlowJacobians fj = flow_jacobians(ti, tj, px, d, k);
    REQUIRE(fj.valid);

    for (int c = 0; c < 6; ++c) {
      Twist dt = Twist::Zero();
      dt[c] = h;
      // Right-multiplicative perturbation of pose i.
      Eigen::Vector2d hi = flow_jacobians(ti.retract(dt), tj, px, d, k).prediction;
      dt[c] = -h;
      Eigen::Vector2d lo = flow_jacobians(ti.retract(dt), tj, px, d, k).prediction;
      Eigen::Vector2d fd = (hi - lo) / (2.0 * h);
      CHECK((fj.d_pose_i.col(c) - fd).norm() < 2e-4 * std::max(1.0, fd.norm()));
    }
    for (int c = 0; c < 6; ++c) {
      Twist dt = Twist::Zero();
      dt[c] = h;
      Eigen::Vector2d hi = flow_jacobians(ti, tj.retract(dt), px, d, k).prediction;
      dt[c] = -h;
      Eigen::Vector2d lo = flow_jacobians(ti, tj.retract(dt), px, d, k).prediction;
      Eigen::Vector2d fd = (hi - lo) / (2.0 * h);
      CHECK((fj.d_pose_j.col(c) - fd).norm() < 2e-4 * std::max(1.0, fd.norm()));
    }
    Eigen::Vector2d hi = flow_jacobians(ti, tj, px, d + h, k).prediction;
    Eigen::Vector2d lo = flow_jacobians(ti, tj, px, d - h, k).prediction;
    Eigen::Vector2d fd = (hi - lo) / (2.0 * h);
    CHECK((fj.d_inv_depth - fd).norm() < 2e-4 * std::max(1.0, fd.norm()));
  }
}

TEST_CASE("identity poses give zero flow and a pure depth direction") {
  Intrinsics k = test_camera();
  Eigen::Vector2d px(100.0, 80.0);
  FlowJacobians fj = flow_jacobians(Pose(), Pose(), px, 0.5, k);
  REQUIRE(fj.valid);
  CHECK((fj.prediction - px).norm() < 1e-12);
  // Same camera: moving the point along the ray does not move the pixel.
  CHECK(fj.d_inv_depth.norm() < 1e-12);
}

TEST_CASE("points behind the target camera are flagged invalid") {
  Intrinsics k = test_camera();
  // Target camera translated two meters forward along +z: a point at one
  // meter depth in frame i sits one meter behind it.
  Pose tj(Eigen::Quaterniond::Identity(), Eigen::Vector3d(0, 0, 2.0));
  FlowJacobians fj = flow_jacobians(Pose(), tj, Eigen::Vector2d(160.0, 120.0), 1.0, k);
  CHECK_FALSE(fj.valid);
}

TEST_CASE("non-finite poses are rejected") {
  Pose bad(Eigen::Quaterniond::Identity(),
           Eigen::Vector3d(std::nan(""), 0.0, 0.0));
  CHECK_THROWS_AS(bad.check_finite(), InvalidPose);
}
