#pragma once

#include <cstdint>
#include <string>

#include "vfuse/ba.hpp"
#include "vfuse/scene.hpp"
#include "vfuse/synth.hpp"
#include "vfuse/tsdf.hpp"

namespace vfuse {

// Post-solve depth map cleanup applied before fusion.
enum class DepthFilter {
  kNone,
  kDroid,  // multi-view inverse-depth consistency voting
};

// How the convex upsampling weights are generated.
enum class UpsampleWeights {
  kNearest,   // one-hot on the parent cell: block passthrough
  kBilinear,  // bilinear-equivalent blending of the 3x3 neighborhood
};

// Every knob of the pipeline, with defaults that produce the standard
// synthetic run. Loaded from an INI-style file (see parse_config) and
// optionally overridden by command-line flags.
struct PipelineConfig {
  PipelineConfig();  // fills in the default scene, masks, and outlier level

  // [scene] room interior plus obstacles, meters.
  Scene scene;

  // [trajectory] horizontal ellipse of inward-looking keyframes.
  int keyframes = 24;
  double radius_x = 2.0;
  double radius_y = 1.5;
  double height = 1.5;
  Eigen::Vector3d target{0.0, 0.0, 1.5};

  // [camera] full-resolution pinhole camera; the solver grid is this camera
  // downscaled by `upsample_factor`, and width/height must match the grid
  // size times the factor exactly.
  Intrinsics camera{280.0, 280.0, 275.5, 175.5, 552, 352};
  int grid_width = 69;
  int grid_height = 44;
  int upsample_factor = 8;
  // Nearest keeps depth discontinuities sharp; bilinear blends across them,
  // which smears object silhouettes into phantom mid-range depths.
  UpsampleWeights upsample_weights = UpsampleWeights::kNearest;

  // [noise] measurement corruption model for the synthetic frontend.
  NoiseModel noise;

  // [ba]
  int window = 3;  // pair (i, j) gets factors when |i - j| <= window
  double damping = 1e-4;
  int max_iterations = 30;
  double update_tolerance = 1e-6;

  // [fusion]
  double voxel_size = 0.05;  // edge length, meters
  double truncation = 0.1;
  // Two voxels of padding beyond the room box: enough for the wall crossing
  // cells, while keeping spurious depth estimates behind the walls outside
  // the reconstruction domain.
  double margin = 0.1;  // volume padding beyond the room box, meters
  FusionWeightMode weight_mode = FusionWeightMode::kInverseSigma;
  DepthFilter filter = DepthFilter::kNone;
  double filter_threshold = 0.005;  // inverse-depth consistency bound
  int filter_min_support = 2;

  // [mesh]
  double umax = 0.1;  // uncertainty bound, inf disables masking

  // [eval]
  double density = 1e4;  // surface sampling, points per square meter
  double max_dist = 0.5;  // nearest-neighbor cutoff, meters
  bool use_icp = false;

  // [run]
  std::uint64_t seed = 1;
  std::string out = "out";
  bool binary_ply = false;  // write meshes as binary little-endian PLY

  // Solver-grid intrinsics implied by the camera and upsample factor.
  Intrinsics grid_intrinsics() const;

  OptimizeOptions optimize_options() const;

  // Throws ConfigError when any value is out of its documented range.
  void validate() const;
};

// Parses the INI dialect: [section] headers, key = value pairs, full-line
// comments starting with '#' or ';'. sphere, box, and mask keys repeat and
// accumulate; every other key may appear at most once. Unknown sections or
// keys and malformed values are ConfigErrors naming the line. Values "inf"
// and "1e30" style floats parse per strtod.
PipelineConfig parse_config_text(const std::string& text,
                                 const std::string& name = "<config>");
PipelineConfig parse_config(const std::string& path);

// Serializes a config as text that parse_config_text accepts and that maps
// back to the same configuration.
std::string config_text(const PipelineConfig& config);

FusionWeightMode parse_weight_mode(const std::string& name);  // inv-sigma|inv-var|constant
std::string weight_mode_name(FusionWeightMode mode);
DepthFilter parse_depth_filter(const std::string& name);  // none|droid
std::string depth_filter_name(DepthFilter filter);
UpsampleWeights parse_upsample_weights(const std::string& name);  // nearest|bilinear
std::string upsample_weights_name(UpsampleWeights weights);

}  // namespace vfuse
