#include "vfuse/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "vfuse/covariance.hpp"
#include "vfuse/io.hpp"
#include "vfuse/meshing.hpp"
#include "vfuse/synth.hpp"
#include "vfuse/upsample.hpp"

namespace vfuse {

namespace {

// Stream tags for pipeline-level randomness, disjoint from the tags the
// synthesizer forks internally.
constexpr std::uint64_t kGtCloudStream = 1001;
constexpr std::uint64_t kMeshSampleStream = 1002;

std::string frame_name(const std::string& dir, const char* stem, int frame, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%03d.%s", stem, frame, ext);
  return dir + "/" + buf;
}

std::string compact_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", value);
  return buf;
}

void require_artifact(const std::string& path, const std::string& producer) {
  if (!std::filesystem::exists(path))
    throw IoError(path + ": missing artifact; run the " + producer + " stage first");
}

std::vector<Pose> load_poses(const std::string& path, const std::string& producer) {
  require_artifact(path, producer);
  return read_trajectory(path);
}

}  // namespace

StagePaths::StagePaths(const std::string& out_dir)
    : dir(out_dir),
      config(out_dir + "/config.ini"),
      graph(out_dir + "/graph.bin"),
      gt_traj(out_dir + "/gt_traj.txt"),
      gt_cloud(out_dir + "/gt_cloud.ply"),
      traj_est(out_dir + "/traj_est.txt"),
      volume(out_dir + "/volume.tsdf"),
      mesh(out_dir + "/mesh.ply"),
      report_txt(out_dir + "/report.txt"),
      report_json(out_dir + "/report.json"),
      error_cloud(out_dir + "/error_cloud.ply") {}

std::string StagePaths::gt_depth(int frame) const {
  return frame_name(dir, "gt_depth", frame, "dmap");
}
std::string StagePaths::ba_depth(int frame) const {
  return frame_name(dir, "ba_depth", frame, "dmap");
}
std::string StagePaths::ba_var(int frame) const {
  return frame_name(dir, "ba_var", frame, "vmap");
}
std::string StagePaths::depth(int frame) const {
  return frame_name(dir, "depth", frame, "dmap");
}
std::string StagePaths::sigma(int frame) const {
  return frame_name(dir, "sigma", frame, "smap");
}
std::string StagePaths::mesh_at(double umax) const {
  return dir + "/mesh_umax_" + compact_number(umax) + ".ply";
}

void run_synth(const PipelineConfig& config) {
  config.validate();
  StagePaths paths(config.out);
  std::filesystem::create_directories(paths.dir);
  {
    std::ofstream os(paths.config, std::ios::trunc);
    os << config_text(config);
    if (!os) throw IoError(paths.config + ": write failed");
  }

  std::vector<Pose> trajectory = ellipse_trajectory(config.keyframes, config.radius_x,
                                                    config.radius_y, config.height, config.target);
  Intrinsics grid = config.grid_intrinsics();

  NoiseModel noise = config.noise;
  noise.seed = config.seed;
  FactorGraph graph =
      synthesize_factor_graph(config.scene, trajectory, grid, noise, config.window);
  write_factor_graph(paths.graph, graph);
  write_trajectory(paths.gt_traj, trajectory);

  std::vector<DepthMap> gt = ground_truth_depth_maps(config.scene, trajectory, grid);
  for (int i = 0; i < static_cast<int>(gt.size()); ++i)
    write_grid(paths.gt_depth(i), gt[i], kDepthMapMagic);

  Rng rng = Rng(config.seed).fork(kGtCloudStream);
  PointCloud cloud;
  cloud.points = sample_scene_surface(config.scene, config.density, rng);
  write_cloud_ply(paths.gt_cloud, cloud);
}

SolveSummary run_solve(const PipelineConfig& config, const std::string& dump_hessian) {
  config.validate();
  StagePaths paths(config.out);
  require_artifact(paths.graph, "synth");
  FactorGraph graph = read_factor_graph(paths.graph);

  OptimizeOptions options = config.optimize_options();
  SolveSummary summary;
  summary.report = optimize(graph, options);
  summary.frames = graph.num_frames();

  std::vector<Pose> poses;
  for (const Keyframe& kf : graph.keyframes) poses.push_back(kf.pose);
  write_trajectory(paths.traj_est, poses);

  BlockSparseHessian h = assemble(graph, config.damping);
  if (!dump_hessian.empty()) write_hessian_dump(dump_hessian, h);
  ReducedSystem red = schur_reduce(h);
  Eigen::VectorXd variances = depth_marginal_variances(h, red.L);
  std::vector<VarianceMap> var_maps = variance_maps(graph, h, variances);

  // Pixels that finish on either working-range clamp are pinned by the bound,
  // not by data, so their quadratic marginal is an artifact of the active
  // constraint. Export the boundary value with an effectively infinite
  // variance: the solver asserts only "at or beyond this limit". Consumers
  // that weight by uncertainty discount such pixels on their own; consumers
  // that ignore uncertainty treat them like any other measurement.
  constexpr double kClampVariance = 1e12;
  std::vector<DepthMap> export_depth;
  for (int i = 0; i < graph.num_frames(); ++i) {
    DepthMap depth = graph.keyframes[i].inv_depth;
    for (int y = 0; y < depth.height(); ++y)
      for (int x = 0; x < depth.width(); ++x) {
        if (!depth.valid(x, y)) continue;
        if (depth.at(x, y) >= options.max_inv_depth ||
            depth.at(x, y) <= options.min_inv_depth) {
          var_maps[i].at(x, y) = kClampVariance;
        }
      }
    export_depth.push_back(std::move(depth));
  }

  ConvexWeightField field =
      config.upsample_weights == UpsampleWeights::kBilinear
          ? ConvexWeightField::bilinear(graph.grid_width, graph.grid_height,
                                        config.upsample_factor)
          : ConvexWeightField::nearest(graph.grid_width, graph.grid_height,
                                       config.upsample_factor);

  double sigma_sum = 0.0;
  std::size_t sigma_count = 0;
  for (int i = 0; i < graph.num_frames(); ++i) {
    write_grid(paths.ba_depth(i), export_depth[i], kDepthMapMagic);
    write_grid(paths.ba_var(i), var_maps[i], kVarianceMapMagic);

    auto [hi_depth, hi_var] = convex_upsample(export_depth[i], var_maps[i], field);
    DepthImage image = depth_image_from_inverse(hi_depth, hi_var, i);
    write_grid(paths.depth(i), image.z, kDepthMapMagic);
    write_grid(paths.sigma(i), image.sigma, kSigmaMapMagic);

    for (int y = 0; y < image.sigma.height(); ++y)
      for (int x = 0; x < image.sigma.width(); ++x)
        if (image.sigma.valid(x, y)) {
          sigma_sum += image.sigma.at(x, y);
          ++sigma_count;
        }
  }
  if (sigma_count > 0) summary.mean_depth_sigma = sigma_sum / static_cast<double>(sigma_count);
  return summary;
}

void run_fuse(const PipelineConfig& config) {
  config.validate();
  StagePaths paths(config.out);
  std::vector<Pose> poses = load_poses(paths.traj_est, "solve");

  std::vector<DepthImage> depths;
  for (int i = 0; i < static_cast<int>(poses.size()); ++i) {
    require_artifact(paths.depth(i), "solve");
    require_artifact(paths.sigma(i), "solve");
    DepthImage image;
    image.z = read_grid(paths.depth(i), kDepthMapMagic);
    image.sigma = read_grid(paths.sigma(i), kSigmaMapMagic);
    image.keyframe = i;
    depths.push_back(std::move(image));
  }

  if (config.filter == DepthFilter::kDroid)
    depths = depth_consistency_filter(depths, poses, config.camera, config.window,
                                      config.filter_threshold, config.filter_min_support);

  const AxisBox& room = *config.scene.room;
  Eigen::Vector3d origin = room.min - Eigen::Vector3d::Constant(config.margin);
  Eigen::Vector3d extent =
      room.max - room.min + 2.0 * Eigen::Vector3d::Constant(config.margin);
  std::array<int, 3> dims;
  for (int i = 0; i < 3; ++i)
    dims[i] = static_cast<int>(std::ceil(extent[i] / config.voxel_size)) + 1;

  TsdfVolume volume(origin, config.voxel_size, dims, config.truncation);
  for (const DepthImage& image : depths)
    volume.integrate(image, poses[image.keyframe], config.camera, config.weight_mode);
  write_tsdf(paths.volume, volume);
}

std::vector<MeshSummary> run_mesh(const PipelineConfig& config,
                                  const std::vector<double>& umax_values) {
  config.validate();
  StagePaths paths(config.out);
  require_artifact(paths.volume, "fuse");
  TsdfVolume volume = read_tsdf(paths.volume);

  const bool sweep = !umax_values.empty();
  std::vector<double> bounds = sweep ? umax_values : std::vector<double>{config.umax};

  std::vector<MeshSummary> out;
  for (double umax : bounds) {
    TriangleMesh mesh = extract_mesh(volume, umax);
    MeshSummary summary;
    summary.umax = umax;
    summary.vertices = mesh.vertices.size();
    summary.triangles = mesh.triangles.size();
    summary.path = sweep ? paths.mesh_at(umax) : paths.mesh;
    write_mesh_ply(summary.path, mesh, config.binary_ply);
    out.push_back(std::move(summary));
  }
  return out;
}

EvalReport run_eval(const PipelineConfig& config) {
  config.validate();
  StagePaths paths(config.out);
  require_artifact(paths.mesh, "mesh");
  require_artifact(paths.gt_cloud, "synth");
  TriangleMesh mesh = read_mesh_ply(paths.mesh);
  PointCloud gt = read_cloud_ply(paths.gt_cloud);

  Rng rng = Rng(config.seed).fork(kMeshSampleStream);
  PointCloud est = sample_mesh(mesh, config.density, rng);

  EvalReport report = evaluate_clouds(est, gt, config.max_dist, config.use_icp);

  PointCloud aligned = est;
  if (report.icp_applied)
    for (auto& p : aligned.points) p = report.alignment * p;
  NnStats stats = cloud_distance_stats(aligned, gt, config.max_dist);
  write_cloud_ply(paths.error_cloud, aligned, &stats.distances, "error");

  auto numbers = report_numbers(report);
  numbers.emplace_back("mesh_vertices", static_cast<double>(mesh.vertices.size()));
  numbers.emplace_back("mesh_triangles", static_cast<double>(mesh.triangles.size()));
  numbers.emplace_back("umax", config.umax);
  numbers.emplace_back("seed", static_cast<double>(config.seed));
  std::vector<std::pair<std::string, std::string>> strings = {
      {"weight_mode", weight_mode_name(config.weight_mode)},
      {"filter", depth_filter_name(config.filter)},
  };
  write_report(paths.report_txt, paths.report_json, numbers, strings);
  return report;
}

EvalReport run_pipeline(const PipelineConfig& config) {
  run_synth(config);
  run_solve(config);
  run_fuse(config);
  run_mesh(config);
  return run_eval(config);
}

}  // namespace vfuse
