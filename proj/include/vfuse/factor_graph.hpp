#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "vfuse/geometry.hpp"
#include "vfuse/image.hpp"

namespace vfuse {

// One optical-flow constraint: pixel (px, py) of frame_i, lifted by its
// inverse depth, must reproject to `target` in frame_j. weight_* are the
// per-axis confidence weights (inverse measurement variances).
struct FlowFactor {
  std::int32_t frame_i = 0;
  std::int32_t frame_j = 0;
  std::int32_t px = 0;
  std::int32_t py = 0;
  Eigen::Vector2d target = Eigen::Vector2d::Zero();
  double weight_x = 0.0;
  double weight_y = 0.0;
};

struct Keyframe {
  Pose pose;           // camera-to-world
  DepthMap inv_depth;  // solver-resolution inverse depth state
};

// Bundle adjustment problem over keyframe poses and per-pixel inverse depths.
// Each keyframe owns a grid_width x grid_height inverse-depth map; every grid
// pixel is one scalar variable. Poses listed in `gauge` are held fixed.
struct FactorGraph {
  Intrinsics intrinsics;  // solver-resolution camera
  int grid_width = 0;
  int grid_height = 0;
  std::vector<Keyframe> keyframes;
  std::vector<FlowFactor> factors;
  std::vector<int> gauge = {0};

  int num_frames() const { return static_cast<int>(keyframes.size()); }
  int depth_count() const { return num_frames() * grid_width * grid_height; }
  int depth_index(int frame, int x, int y) const {
    return (frame * grid_height + y) * grid_width + x;
  }

  bool is_fixed(int frame) const {
    for (int g : gauge)
      if (g == frame) return true;
    return false;
  }

  // Checks structural invariants; throws on violation.
  void validate() const;
};

}  // namespace vfuse
