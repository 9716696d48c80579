#include "vfuse/tsdf.hpp"

#include <algorithm>
#include <cmath>

namespace vfuse {

namespace {
constexpr double kMaxWeight = 1e4;
}

double fusion_weight(double sigma_z, FusionWeightMode mode) {
  if (mode == FusionWeightMode::kConstant) return 1.0;
  if (!(sigma_z > 0.0)) return kMaxWeight;  // perfect measurement saturates the clamp
  double w = mode == FusionWeightMode::kInverseSigma ? 1.0 / sigma_z : 1.0 / (sigma_z * sigma_z);
  return std::clamp(w, 0.0, kMaxWeight);
}

TsdfVolume::TsdfVolume(const Eigen::Vector3d& origin, double voxel_size,
                       const std::array<int, 3>& dims, double truncation)
    : origin_(origin), voxel_size_(voxel_size), truncation_(truncation), dims_(dims) {
  if (voxel_size <= 0.0) throw Error("voxel size must be positive");
  if (truncation <= 0.0) throw Error("truncation distance must be positive");
  if (dims[0] < 1 || dims[1] < 1 || dims[2] < 1)
    throw DimensionMismatch("volume dimensions must be positive");
  std::size_t n = static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  phi_.assign(n, static_cast<float>(truncation));
  weight_.assign(n, 0.0f);
}

void TsdfVolume::update_voxel(int i, int j, int l, double sdf, double w) {
  if (sdf < -truncation_) return;  // far behind the surface: leave untouched
  w = std::clamp(w, 0.0, kMaxWeight);
  if (w == 0.0) return;
  double s = std::min(sdf, truncation_);
  std::size_t idx = index(i, j, l);
  double wsum = static_cast<double>(weight_[idx]);
  double phi = static_cast<double>(phi_[idx]);
  // With wsum == 0 the tau initialization drops out and phi becomes s.
  phi_[idx] = static_cast<float>((wsum * phi + w * s) / (wsum + w));
  weight_[idx] = static_cast<float>(wsum + w);
}

void TsdfVolume::integrate(const DepthImage& depth, const Pose& cam_to_world,
                           const Intrinsics& k, FusionWeightMode mode) {
  k.validate();
  cam_to_world.check_finite();
  if (depth.z.width() != k.width || depth.z.height() != k.height ||
      depth.sigma.width() != k.width || depth.sigma.height() != k.height)
    throw DimensionMismatch("depth image size does not match the intrinsics");

  Pose world_to_cam = cam_to_world.inverse();
  Eigen::Matrix3d r = world_to_cam.rotation();
  Eigen::Vector3d t = world_to_cam.translation();

  for (int l = 0; l < dims_[2]; ++l) {
    for (int j = 0; j < dims_[1]; ++j) {
      for (int i = 0; i < dims_[0]; ++i) {
        Eigen::Vector3d pc = r * voxel_center(i, j, l) + t;
        if (pc.z() <= 1e-9) continue;
        double iz = 1.0 / pc.z();
        int u = static_cast<int>(std::lround(k.fx * pc.x() * iz + k.cx));
        int v = static_cast<int>(std::lround(k.fy * pc.y() * iz + k.cy));
        if (!depth.z.valid(u, v) || !depth.sigma.valid(u, v)) continue;
        double z_meas = depth.z.at(u, v);
        if (!(z_meas > 0.0)) continue;
        update_voxel(i, j, l, z_meas - pc.z(), fusion_weight(depth.sigma.at(u, v), mode));
      }
    }
  }
}

std::pair<double, double> fused_value_oracle(
    const std::vector<std::pair<double, double>>& measurements, double tau,
    FusionWeightMode mode) {
  if (tau <= 0.0) throw Error("truncation distance must be positive");
  double num = 0.0, den = 0.0;
  for (const auto& [sdf, sigma] : measurements) {
    if (sdf < -tau) continue;
    double w = fusion_weight(sigma, mode);
    num += w * std::min(sdf, tau);
    den += w;
  }
  if (den == 0.0) throw AllZeroWeights("no surviving measurement has positive weight");
  return {num / den, den};
}

}  // namespace vfuse
