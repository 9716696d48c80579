#include "vfuse/factor_graph.hpp"

#include <cmath>
#include <string>

namespace vfuse {

void FactorGraph::validate() const {
  if (keyframes.empty()) throw EmptyGraph();
  intrinsics.validate();
  if (grid_width != intrinsics.width || grid_height != intrinsics.height)
    throw DimensionMismatch("grid size does not match intrinsics");
  for (const Keyframe& kf : keyframes) {
    kf.pose.check_finite();
    if (kf.inv_depth.width() != grid_width || kf.inv_depth.height() != grid_height)
      throw DimensionMismatch("keyframe depth map size does not match the grid");
  }
  if (gauge.empty()) throw Error("gauge must fix at least one pose");
  bool has_zero = false;
  for (int g : gauge) {
    if (g < 0 || g >= num_frames()) throw Error("gauge index out of range");
    if (g == 0) has_zero = true;
  }
  if (!has_zero) throw Error("gauge must contain pose 0");

  for (const FlowFactor& f : factors) {
    if (f.frame_i < 0 || f.frame_i >= num_frames() || f.frame_j < 0 ||
        f.frame_j >= num_frames() || f.frame_i == f.frame_j)
      throw Error("factor frame indices out of range");
    if (f.px < 0 || f.px >= grid_width || f.py < 0 || f.py >= grid_height)
      throw Error("factor pixel out of range");
    const Keyframe& kf = keyframes[f.frame_i];
    double d = kf.inv_depth.at(f.px, f.py);
    if (std::isnan(d)) throw Error("factor references an invalid pixel");
    if (d <= 0.0) throw NonPositiveInverseDepth("factor references a non-positive inverse depth");
    if (!(f.weight_x >= 0.0) || !(f.weight_y >= 0.0) || !std::isfinite(f.weight_x) ||
        !std::isfinite(f.weight_y))
      throw Error("factor weights must be finite and non-negative");
    if (!f.target.allFinite()) throw Error("factor target must be finite");
  }
}

}  // namespace vfuse
