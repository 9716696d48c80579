#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "vfuse/geometry.hpp"
#include "vfuse/upsample.hpp"

namespace vfuse {

enum class FusionWeightMode {
  kInverseSigma,     // w = 1 / sigma_z (default)
  kInverseVariance,  // w = 1 / sigma_z^2
  kConstant,         // w = 1
};

// Per-measurement fusion weight for a depth with standard deviation sigma_z,
// clamped to [0, 1e4].
double fusion_weight(double sigma_z, FusionWeightMode mode);

// Dense truncated signed distance volume with per-voxel weighted running
// averages:
//
//   phi <- (W phi + w s) / (W + w),   W <- W + w
//
// where s = z_measured - z_voxel, clamped to [-tau, tau]; observations with
// s < -tau (voxel far behind the measured surface) are skipped. Voxels start
// at phi = tau, W = 0. Values and weights are stored as f32; update
// arithmetic runs in double.
class TsdfVolume {
 public:
  TsdfVolume(const Eigen::Vector3d& origin, double voxel_size,
             const std::array<int, 3>& dims, double truncation = 0.1);

  // Fuses one posed depth image (pose is camera-to-world). Each voxel center
  // is projected with `k` and samples the nearest pixel; invalid pixels and
  // out-of-view voxels contribute nothing.
  void integrate(const DepthImage& depth, const Pose& cam_to_world, const Intrinsics& k,
                 FusionWeightMode mode);

  double phi(int i, int j, int l) const { return phi_[index(i, j, l)]; }
  double weight(int i, int j, int l) const { return weight_[index(i, j, l)]; }
  void set(int i, int j, int l, double phi, double weight) {
    phi_[index(i, j, l)] = static_cast<float>(phi);
    weight_[index(i, j, l)] = static_cast<float>(weight);
  }
  // Applies one measurement to one voxel; exposed so order-invariance can be
  // tested directly.
  void update_voxel(int i, int j, int l, double sdf, double w);

  const Eigen::Vector3d& origin() const { return origin_; }
  double voxel_size() const { return voxel_size_; }
  double truncation() const { return truncation_; }
  const std::array<int, 3>& dims() const { return dims_; }
  std::size_t voxel_count() const { return phi_.size(); }

  Eigen::Vector3d voxel_center(int i, int j, int l) const {
    return origin_ + voxel_size_ * Eigen::Vector3d(i, j, l);
  }
  std::size_t index(int i, int j, int l) const {
    return (static_cast<std::size_t>(l) * dims_[1] + j) * dims_[0] + i;
  }

  const std::vector<float>& phi_data() const { return phi_; }
  const std::vector<float>& weight_data() const { return weight_; }
  std::vector<float>& phi_data() { return phi_; }
  std::vector<float>& weight_data() { return weight_; }

 private:
  Eigen::Vector3d origin_;
  double voxel_size_;
  double truncation_;
  std::array<int, 3> dims_;
  std::vector<float> phi_;
  std::vector<float> weight_;
};

// Closed-form value of the running average: the weighted mean of the clamped
// signed distances (skipping s < -tau) and the weight total. Measurements are
// (sdf, sigma_z) pairs taken at one voxel. Throws AllZeroWeights when no
// surviving measurement has positive weight. This is the order-free reference
// the incremental updates must match.
std::pair<double, double> fused_value_oracle(
    const std::vector<std::pair<double, double>>& measurements, double tau,
    FusionWeightMode mode);

}  // namespace vfuse
