#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "vfuse/tsdf.hpp"

namespace vfuse {

// Indexed triangle mesh with one scalar uncertainty per vertex.
struct TriangleMesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<double> uncertainty;  // one value per vertex
  std::vector<std::array<int, 3>> triangles;
};

// Uncertainty attributed to a fused voxel from its accumulated weight:
// u(W) = 1 / W^2, +inf for W <= 0. Monotone decreasing in W, so a bound
// u <= u_max is exactly a minimum-weight threshold (u <= 0.01 <=> W >= 10).
double voxel_uncertainty(double weight);

// True when the voxel is allowed to produce surface: observed (W > 0) and
// within the uncertainty bound.
bool voxel_admissible(double weight, double u_max);

// Marching cubes over the admissible voxels. A cube yields triangles only if
// all eight corners are admissible; zero crossings are located by linear
// interpolation between voxel centers, and vertex uncertainties interpolate
// u(W) with the same parameter. Shared vertices are deduplicated across
// cubes; degenerate (zero-area) triangles are dropped. Pass
// u_max = infinity to mesh every observed voxel.
TriangleMesh extract_mesh(const TsdfVolume& volume, double u_max);

// Admissibility flags in volume linear-index order; lets callers check that
// tighter bounds admit strict subsets.
std::vector<std::uint8_t> admissible_mask(const TsdfVolume& volume, double u_max);

}  // namespace vfuse
