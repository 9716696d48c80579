#include "vfuse/upsample.hpp"

#include <algorithm>
#include <cmath>

namespace vfuse {

ConvexWeightField::ConvexWeightField(int low_w, int low_h, int factor)
    : factor_(factor), low_w_(low_w), low_h_(low_h) {
  if (low_w <= 0 || low_h <= 0 || factor < 1)
    throw DimensionMismatch("weight field dimensions must be positive");
  weights_.assign(static_cast<std::size_t>(low_w) * factor * low_h * factor, {});
}

ConvexWeightField ConvexWeightField::nearest(int low_width, int low_height, int factor) {
  ConvexWeightField f(low_width, low_height, factor);
  for (auto& w : f.weights_) w[4] = 1.0;  // window center
  return f;
}

ConvexWeightField ConvexWeightField::bilinear(int low_width, int low_height, int factor) {
  ConvexWeightField f(low_width, low_height, factor);
  for (int y = 0; y < f.high_height(); ++y) {
    for (int x = 0; x < f.high_width(); ++x) {
      int cx = x / factor, cy = y / factor;
      // Continuous low-res coordinate of this pixel center; its bilinear
      // neighbors always lie inside the 3x3 window around (cx, cy).
      double lx = (x + 0.5) / factor - 0.5;
      double ly = (y + 0.5) / factor - 0.5;
      lx = std::clamp(lx, 0.0, low_width - 1.0);
      ly = std::clamp(ly, 0.0, low_height - 1.0);
      int x0 = static_cast<int>(std::floor(lx));
      int y0 = static_cast<int>(std::floor(ly));
      x0 = std::min(x0, low_width - 2 >= 0 ? low_width - 2 : 0);
      y0 = std::min(y0, low_height - 2 >= 0 ? low_height - 2 : 0);
      double ax = lx - x0, ay = ly - y0;

      auto& w = f.at(x, y);
      auto put = [&](int lxi, int lyi, double val) {
        int dx = lxi - cx, dy = lyi - cy;
        w[(dy + 1) * 3 + (dx + 1)] += val;
      };
      if (low_width == 1) ax = 0.0;
      if (low_height == 1) ay = 0.0;
      int x1 = std::min(x0 + 1, low_width - 1);
      int y1 = std::min(y0 + 1, low_height - 1);
      put(x0, y0, (1.0 - ax) * (1.0 - ay));
      put(x1, y0, ax * (1.0 - ay));
      put(x0, y1, (1.0 - ax) * ay);
      put(x1, y1, ax * ay);
    }
  }
  return f;
}

void ConvexWeightField::validate() const {
  for (const auto& w : weights_) {
    double sum = 0.0;
    for (double wi : w) {
      if (wi < 0.0 || !std::isfinite(wi)) throw Error("upsampling weights must be non-negative");
      sum += wi;
    }
    if (std::abs(sum - 1.0) > 1e-6) throw Error("upsampling weights must sum to 1");
  }
}

std::pair<Image, Image> convex_upsample(const Image& low_depth, const Image& low_variance,
                                        const ConvexWeightField& weights) {
  if (low_depth.width() != weights.low_width() || low_depth.height() != weights.low_height() ||
      low_variance.width() != weights.low_width() ||
      low_variance.height() != weights.low_height())
    throw DimensionMismatch("input maps do not match the weight field");

  const int hw = weights.high_width(), hh = weights.high_height();
  const int lw = weights.low_width(), lh = weights.low_height();
  const int factor = weights.factor();
  Image d_hi(hw, hh), var_hi(hw, hh);

  for (int y = 0; y < hh; ++y) {
    for (int x = 0; x < hw; ++x) {
      int cx = x / factor, cy = y / factor;
      const auto& w = weights.at(x, y);
      double d = 0.0, var = 0.0;
      bool ok = true;
      for (int k = 0; k < 9 && ok; ++k) {
        double wk = w[k];
        if (wk == 0.0) continue;
        int lx = std::clamp(cx + k % 3 - 1, 0, lw - 1);
        int ly = std::clamp(cy + k / 3 - 1, 0, lh - 1);
        if (!low_depth.valid(lx, ly) || !low_variance.valid(lx, ly)) {
          // Contributors at negligible weight may be invalid; their mass is
          // dropped.
          if (wk > 1e-6) ok = false;
          continue;
        }
        d += wk * low_depth.at(lx, ly);
        var += wk * wk * low_variance.at(lx, ly);
      }
      if (ok) {
        d_hi.at(x, y) = d;
        var_hi.at(x, y) = var;
      }
    }
  }
  return {std::move(d_hi), std::move(var_hi)};
}

void invdepth_to_depth(double inv_depth, double sigma_d, double& z, double& sigma_z) {
  if (inv_depth <= 0.0) throw NonPositiveInverseDepth();
  if (sigma_d < 0.0) throw Error("sigma must be non-negative");
  z = 1.0 / inv_depth;
  sigma_z = sigma_d / (inv_depth * inv_depth);
}

DepthImage depth_image_from_inverse(const Image& inv_depth, const Image& variance,
                                    int keyframe) {
  if (inv_depth.width() != variance.width() || inv_depth.height() != variance.height())
    throw DimensionMismatch("depth and variance maps differ in size");
  DepthImage out;
  out.keyframe = keyframe;
  out.z = Image(inv_depth.width(), inv_depth.height());
  out.sigma = Image(inv_depth.width(), inv_depth.height());
  for (int y = 0; y < inv_depth.height(); ++y) {
    for (int x = 0; x < inv_depth.width(); ++x) {
      if (!inv_depth.valid(x, y) || !variance.valid(x, y)) continue;
      double d = inv_depth.at(x, y);
      if (d <= 0.0) continue;  // cannot be converted; leave invalid
      double z, sz;
      invdepth_to_depth(d, std::sqrt(std::max(0.0, variance.at(x, y))), z, sz);
      out.z.at(x, y) = z;
      out.sigma.at(x, y) = sz;
    }
  }
  return out;
}

}  // namespace vfuse
