#pragma once

// On-disk formats shared by the pipeline stages. Every multi-byte field is
// little-endian regardless of host order; grids and volumes are row-major.
// All readers throw IoError with the offending path in the message.

#include <Eigen/Core>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vfuse/ba.hpp"
#include "vfuse/eval.hpp"
#include "vfuse/factor_graph.hpp"
#include "vfuse/geometry.hpp"
#include "vfuse/image.hpp"
#include "vfuse/meshing.hpp"
#include "vfuse/tsdf.hpp"
#include "vfuse/upsample.hpp"

namespace vfuse {

// Scalar grid file: 4-byte magic, u32 width, u32 height, then width*height
// f32 values row-major. NaN marks invalid pixels. The magic names the
// content: "DMAP" depth or inverse depth, "VMAP" variance, "SMAP" sigma.
inline constexpr std::string_view kDepthMapMagic = "DMAP";
inline constexpr std::string_view kVarianceMapMagic = "VMAP";
inline constexpr std::string_view kSigmaMapMagic = "SMAP";

void write_grid(const std::string& path, const Image& image, std::string_view magic);
Image read_grid(const std::string& path, std::string_view expected_magic);

// Trajectory text file, one keyframe per line:
//   timestamp tx ty tz qx qy qz qw
// Timestamps are the keyframe indices. Lines starting with '#' are skipped
// on read. Quaternions are renormalized on read, so a round trip preserves
// poses to floating-point precision rather than bit-exactly.
void write_trajectory(const std::string& path, const std::vector<Pose>& poses);
std::vector<Pose> read_trajectory(const std::string& path);

// Mesh PLY with per-vertex float x/y/z and a float "uncertainty" property,
// plus int triangle indices. ASCII by default; binary_little_endian behind
// the flag. Coordinates are stored at f32 precision in both encodings, so
// writing is byte-deterministic and a round trip is exact at f32 precision.
void write_mesh_ply(const std::string& path, const TriangleMesh& mesh, bool binary = false);
TriangleMesh read_mesh_ply(const std::string& path);

// Point cloud PLY (vertex-only). `scalar` optionally attaches one extra
// per-point float property under `scalar_name` (e.g. per-point error).
void write_cloud_ply(const std::string& path, const PointCloud& cloud,
                     const std::vector<double>* scalar = nullptr,
                     const std::string& scalar_name = "error", bool binary = false);
// Reads the x/y/z vertex properties of any PLY this library writes
// (mesh files load as their vertex set).
PointCloud read_cloud_ply(const std::string& path);

// Volume snapshot: magic "TSDF", f64 origin x/y/z, f64 voxel size,
// u32 dims x/y/z, f64 truncation, then one (phi: f32, weight: f32) pair per
// voxel with the x index fastest.
void write_tsdf(const std::string& path, const TsdfVolume& volume);
TsdfVolume read_tsdf(const std::string& path);

// Factor graph snapshot: magic "FGRF", u32 version, intrinsics, grid size,
// keyframes (pose as f64 qx qy qz qw tx ty tz, then the inverse-depth grid
// as f64 with NaN preserved), gauge list, and factors. The f64 payload makes
// the round trip bit-exact, which is what the determinism tests compare.
void write_factor_graph(const std::string& path, const FactorGraph& graph);
FactorGraph read_factor_graph(const std::string& path);

// Debug dump of an assembled system: magic "HESS", u32 free pose count F,
// u64 depth count D, f64 damping, then row-major f64 blocks: C (6F x 6F),
// E (D rows of 6F, zeros where a depth couples no factor to that pose),
// P (D), v (6F), w (D).
struct HessianDump {
  int num_free = 0;
  double damping = 0.0;
  Eigen::MatrixXd C;
  Eigen::MatrixXd E;  // depth-major: row k holds depth k's pose couplings
  Eigen::VectorXd P;
  Eigen::VectorXd v;
  Eigen::VectorXd w;
};

void write_hessian_dump(const std::string& path, const BlockSparseHessian& h);
HessianDump read_hessian_dump(const std::string& path);

// Run report, written as aligned key=value text and as JSON with identical
// keys in identical order. Numbers print with round-trip precision.
void write_report(const std::string& txt_path, const std::string& json_path,
                  const std::vector<std::pair<std::string, double>>& numbers,
                  const std::vector<std::pair<std::string, std::string>>& strings = {});

// Standard report entries for a cloud evaluation, in a fixed order.
std::vector<std::pair<std::string, double>> report_numbers(const EvalReport& report);

// Parses key=value lines back into a map (values kept as text).
std::map<std::string, std::string> read_report_txt(const std::string& path);

}  // namespace vfuse
