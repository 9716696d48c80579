#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "vfuse/geometry.hpp"
#include "vfuse/image.hpp"
#include "vfuse/rng.hpp"

namespace vfuse {

struct Sphere {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double radius = 1.0;
};

struct AxisBox {
  Eigen::Vector3d min = Eigen::Vector3d::Zero();
  Eigen::Vector3d max = Eigen::Vector3d::Ones();
};

// Analytic scene: an optional enclosing room (viewed from inside, so its
// interior faces are geometry) plus convex obstacles viewed from outside.
struct Scene {
  std::optional<AxisBox> room;
  std::vector<Sphere> spheres;
  std::vector<AxisBox> boxes;

  // Nearest positive hit parameter t along origin + t * dir, or +inf on miss.
  // dir need not be unit length; t is measured in units of |dir|.
  double raycast(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir) const;

  double surface_area() const;
};

// Per-pixel inverse depth seen by a camera (camera-to-world pose). Depth is
// the camera-frame z coordinate of the hit. Misses are invalid (NaN).
DepthMap raycast_inverse_depth(const Scene& scene, const Pose& cam_to_world, const Intrinsics& k);

// Uniform surface samples at `density` points per square meter; per-face
// sample counts are round(area * density).
std::vector<Eigen::Vector3d> sample_scene_surface(const Scene& scene, double density, Rng& rng);

// Camera poses on a horizontal ellipse (semi-axes rx, ry at height z), all
// looking at `target` with x right, y down, z forward.
std::vector<Pose> ellipse_trajectory(int count, double rx, double ry, double height,
                                     const Eigen::Vector3d& target);

Pose look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target);

}  // namespace vfuse
