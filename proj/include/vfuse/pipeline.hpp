#pragma once

#include <string>
#include <vector>

#include "vfuse/ba.hpp"
#include "vfuse/config.hpp"
#include "vfuse/eval.hpp"

namespace vfuse {

// Artifact names inside the configured output directory. Stages communicate
// exclusively through these files, so any stage can be rerun or swapped as
// long as its inputs exist.
struct StagePaths {
  explicit StagePaths(const std::string& out_dir);

  std::string dir;
  std::string config;      // resolved configuration echo
  std::string graph;       // factor graph snapshot
  std::string gt_traj;     // ground-truth trajectory
  std::string gt_cloud;    // sampled ground-truth surface
  std::string traj_est;    // optimized trajectory
  std::string volume;      // fused TSDF snapshot
  std::string mesh;        // extracted mesh at the configured bound
  std::string report_txt;
  std::string report_json;
  std::string error_cloud;  // estimate samples with nearest-distance scalar

  std::string gt_depth(int frame) const;   // solver-grid ground truth
  std::string ba_depth(int frame) const;   // solver-grid estimate
  std::string ba_var(int frame) const;     // solver-grid marginal variance
  std::string depth(int frame) const;      // full-resolution depth
  std::string sigma(int frame) const;      // full-resolution depth std
  std::string mesh_at(double umax) const;  // sweep output naming
};

struct SolveSummary {
  OptimizeReport report;
  int frames = 0;
  double mean_depth_sigma = 0.0;  // over valid full-resolution pixels
};

struct MeshSummary {
  double umax = 0.0;
  std::size_t vertices = 0;
  std::size_t triangles = 0;
  std::string path;
};

// Each stage loads what it needs from the output directory, writes its own
// artifacts, and throws IoError naming any missing input. All randomness
// derives from config.seed.
void run_synth(const PipelineConfig& config);
// `dump_hessian` optionally names a file receiving the system assembled at
// the converged state (see write_hessian_dump).
SolveSummary run_solve(const PipelineConfig& config, const std::string& dump_hessian = "");
void run_fuse(const PipelineConfig& config);
std::vector<MeshSummary> run_mesh(const PipelineConfig& config,
                                  const std::vector<double>& umax_values = {});
EvalReport run_eval(const PipelineConfig& config);

// synth -> solve -> fuse -> mesh -> eval on one configuration.
EvalReport run_pipeline(const PipelineConfig& config);

}  // namespace vfuse
