#pragma once

#include <array>
#include <utility>
#include <vector>

#include "vfuse/image.hpp"

namespace vfuse {

// Convex combination weights for integer-factor upsampling. Every output
// pixel blends the 3x3 low-resolution neighborhood centered on the cell that
// contains it: d = sum_i w_i d_i with w_i >= 0 and sum_i w_i = 1. Variances
// propagate through the same weights as sigma^2 = sum_i w_i^2 sigma_i^2.
class ConvexWeightField {
 public:
  // Bilinear-equivalent weights. Out-of-range neighbors are clamped to the
  // border, which keeps the weights convex without renormalization.
  static ConvexWeightField bilinear(int low_width, int low_height, int factor = 8);
  // One-hot weights on the window center (nearest-neighbor upsampling).
  static ConvexWeightField nearest(int low_width, int low_height, int factor = 8);

  int factor() const { return factor_; }
  int low_width() const { return low_w_; }
  int low_height() const { return low_h_; }
  int high_width() const { return low_w_ * factor_; }
  int high_height() const { return low_h_ * factor_; }

  // Window weights for high-res pixel (x, y); index k = (dy+1)*3 + (dx+1)
  // addresses low-res pixel (x/factor + dx, y/factor + dy), clamped to the
  // grid.
  const std::array<double, 9>& at(int x, int y) const {
    return weights_[static_cast<std::size_t>(y) * high_width() + x];
  }
  std::array<double, 9>& at(int x, int y) {
    return weights_[static_cast<std::size_t>(y) * high_width() + x];
  }

  // Throws unless every pixel's weights are non-negative and sum to 1 within
  // 1e-6.
  void validate() const;

 private:
  ConvexWeightField(int low_w, int low_h, int factor);

  int factor_ = 0;
  int low_w_ = 0;
  int low_h_ = 0;
  std::vector<std::array<double, 9>> weights_;
};

// Upsamples an inverse-depth map and its variance map by the field's factor.
// A high-res pixel is invalid when any contributing low-res pixel with
// weight > 1e-6 is invalid.
std::pair<Image, Image> convex_upsample(const Image& low_depth, const Image& low_variance,
                                        const ConvexWeightField& weights);

// First-order propagation of inverse depth to depth: z = 1/d,
// sigma_z = sigma_d / d^2. Throws NonPositiveInverseDepth for d <= 0.
void invdepth_to_depth(double inv_depth, double sigma_d, double& z, double& sigma_z);

// Full-resolution depth with per-pixel standard deviation, ready for fusion.
struct DepthImage {
  Image z;
  Image sigma;        // std of z, not variance
  int keyframe = -1;  // index into the source trajectory
};

// Converts upsampled inverse depth + variance into a DepthImage; invalid
// pixels stay invalid.
DepthImage depth_image_from_inverse(const Image& inv_depth, const Image& variance,
                                    int keyframe = -1);

}  // namespace vfuse
