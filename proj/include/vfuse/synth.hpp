#pragma once

#include <cstdint>
#include <vector>

#include "vfuse/factor_graph.hpp"
#include "vfuse/scene.hpp"

namespace vfuse {

// Rectangle of solver-grid pixels [x0, x1) x [y0, y1) whose measurement noise
// is inflated, emulating textureless or aliased image regions.
struct MaskRect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  double inflation = 10.0;

  bool contains(int x, int y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
};

struct NoiseModel {
  double sigma_flow = 0.1;        // base measurement std, pixels
  std::vector<MaskRect> masks;    // sigma multiplied by `inflation` inside
  double outlier_fraction = 0.0;  // fraction of pixels whose flow is corrupted
  // Tens of sigma: a gross mismatch, not tail noise, yet weak enough that
  // the corrupted factors (which keep nominal weight by design) do not drag
  // the pose estimates with them.
  double outlier_magnitude = 1.5;  // pixels, on the solver grid
  // Scales the measurement perturbation only; weights always reflect
  // sigma(p). 0 produces exact targets with finite weights.
  double noise_scale = 1.0;
  double depth_init_sigma = 0.2;   // lognormal sigma on initial inverse depth
  double pose_init_rot = 0.05;     // rad, per-axis std of the initial pose twist
  double pose_init_trans = 0.05;   // m
  std::uint64_t seed = 1;
};

double sigma_at(const NoiseModel& noise, int x, int y);

// Builds a bundle adjustment problem from an analytic scene and a camera
// trajectory. For every ordered frame pair within `window` and every pixel
// with a ray hit, the measured target is the ground-truth reprojection
// perturbed by noise_scale * sigma(p); weights are 1 / sigma(p)^2 per axis.
// Outlier pixels get an extra random offset at nominal weight. Targets that
// fall outside frame j or behind its camera produce no factor. The stored
// state is ground truth perturbed by the init noise; pose 0 stays exact and
// is the gauge anchor. Identical seeds give bit-identical graphs.
FactorGraph synthesize_factor_graph(const Scene& scene, const std::vector<Pose>& trajectory,
                                    const Intrinsics& k, const NoiseModel& noise, int window);

// Ground-truth low-resolution inverse depth maps for the same trajectory.
std::vector<DepthMap> ground_truth_depth_maps(const Scene& scene,
                                              const std::vector<Pose>& trajectory,
                                              const Intrinsics& k);

}  // namespace vfuse
