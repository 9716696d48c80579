#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "vfuse/error.hpp"

namespace vfuse {

// Row-major 2D grid of doubles. NaN marks invalid pixels; that convention is
// shared by the on-disk f32 formats.
class Image {
 public:
  Image() = default;
  Image(int width, int height, double fill = std::nan(""))
      : width_(width), height_(height), data_(static_cast<std::size_t>(width) * height, fill) {
    if (width <= 0 || height <= 0) throw DimensionMismatch("image dimensions must be positive");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  double at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }

  bool contains(int x, int y) const { return x >= 0 && x < width_ && y >= 0 && y < height_; }
  bool valid(int x, int y) const { return contains(x, y) && !std::isnan(at(x, y)); }

  std::size_t count_valid() const {
    std::size_t n = 0;
    for (double v : data_)
      if (!std::isnan(v)) ++n;
    return n;
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

// Per-pixel inverse depth (1/m) on the solver grid.
using DepthMap = Image;
// Per-pixel marginal variance of inverse depth.
using VarianceMap = Image;

}  // namespace vfuse
