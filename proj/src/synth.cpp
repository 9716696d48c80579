#include "vfuse/synth.hpp"

#include <cmath>

#include "vfuse/rng.hpp"

namespace vfuse {

namespace {
// Stream tags for the per-seed RNG tree. Keeping every draw keyed by
// (purpose, frame, pixel) makes the graph independent of loop order.
enum StreamTag : std::uint64_t {
  kPoseInit = 1,
  kDepthInit = 2,
  kOutlierPick = 3,
  kMeasurement = 4,
};
}  // namespace

double sigma_at(const NoiseModel& noise, int x, int y) {
  double inflation = 1.0;
  for (const MaskRect& m : noise.masks)
    if (m.contains(x, y)) inflation = std::max(inflation, m.inflation);
  return noise.sigma_flow * inflation;
}

std::vector<DepthMap> ground_truth_depth_maps(const Scene& scene,
                                              const std::vector<Pose>& trajectory,
                                              const Intrinsics& k) {
  std::vector<DepthMap> maps;
  maps.reserve(trajectory.size());
  for (const Pose& pose : trajectory) maps.push_back(raycast_inverse_depth(scene, pose, k));
  return maps;
}

FactorGraph synthesize_factor_graph(const Scene& scene, const std::vector<Pose>& trajectory,
                                    const Intrinsics& k, const NoiseModel& noise, int window) {
  if (trajectory.size() < 2) throw InsufficientKeyframes();
  if (window < 1) throw Error("covisibility window must be at least 1");
  if (noise.sigma_flow <= 0.0) throw Error("sigma_flow must be positive");
  k.validate();
  if (scene.room) {
    for (const Pose& p : trajectory) {
      const Eigen::Vector3d& t = p.translation();
      if ((t.array() <= scene.room->min.array()).any() ||
          (t.array() >= scene.room->max.array()).any())
        throw Error("trajectory leaves the room box");
    }
  }

  const int frames = static_cast<int>(trajectory.size());
  const int w = k.width, h = k.height;
  Rng rng(noise.seed);
  Rng pose_rng = rng.fork(kPoseInit);
  Rng depth_rng = rng.fork(kDepthInit);
  Rng outlier_rng = rng.fork(kOutlierPick);
  Rng meas_rng = rng.fork(kMeasurement);

  std::vector<DepthMap> gt = ground_truth_depth_maps(scene, trajectory, k);

  FactorGraph graph;
  graph.intrinsics = k;
  graph.grid_width = w;
  graph.grid_height = h;
  graph.gauge = {0};

  // Initial state: ground truth plus init noise. Pose 0 stays exact; it
  // anchors the gauge.
  for (int f = 0; f < frames; ++f) {
    Keyframe kf;
    if (f == 0) {
      kf.pose = trajectory[f];
    } else {
      Rng r = pose_rng.fork(f);
      Twist tw;
      for (int a = 0; a < 3; ++a) tw[a] = r.normal(0.0, noise.pose_init_rot);
      for (int a = 3; a < 6; ++a) tw[a] = r.normal(0.0, noise.pose_init_trans);
      // Exact copy when unperturbed so that noiseless graphs evaluate to
      // bitwise-zero residuals at ground truth.
      kf.pose = tw.isZero(0.0) ? trajectory[f] : trajectory[f].retract(tw);
    }
    kf.inv_depth = DepthMap(w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double d = gt[f].at(x, y);
        if (std::isnan(d)) continue;
        Rng r = depth_rng.fork(graph.depth_index(f, x, y));
        kf.inv_depth.at(x, y) = d * std::exp(noise.depth_init_sigma * r.normal());
      }
    }
    graph.keyframes.push_back(std::move(kf));
  }

  for (int i = 0; i < frames; ++i) {
    for (int j = std::max(0, i - window); j <= std::min(frames - 1, i + window); ++j) {
      if (j == i) continue;
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          double d = gt[i].at(x, y);
          if (std::isnan(d)) continue;

          // Target generation shares the exact prediction code used by the
          // solver, so a zero-noise graph has bitwise-zero residuals at
          // ground truth.
          FlowJacobians fj = flow_jacobians(trajectory[i], trajectory[j],
                                            Eigen::Vector2d(x, y), d, k);
          if (!fj.valid) continue;
          Eigen::Vector2d target = fj.prediction;
          if (target.x() < 0.0 || target.x() > w - 1.0 || target.y() < 0.0 ||
              target.y() > h - 1.0)
            continue;

          double sigma = sigma_at(noise, x, y);
          std::uint64_t fkey =
              ((static_cast<std::uint64_t>(i) * frames + j) * h + y) * w + x;
          Rng r = meas_rng.fork(fkey);
          target.x() += noise.noise_scale * sigma * r.normal();
          target.y() += noise.noise_scale * sigma * r.normal();

          Rng opick = outlier_rng.fork(static_cast<std::uint64_t>(i) * w * h +
                                       static_cast<std::uint64_t>(y) * w + x);
          if (noise.outlier_fraction > 0.0 && opick.uniform() < noise.outlier_fraction) {
            // Corrupted flow at nominal weight: only solver-derived
            // uncertainty can flag these pixels. Directions are independent
            // per factor, so a corrupted pixel's factors disagree with each
            // other as well as with the scene.
            double ang = r.uniform(0.0, 2.0 * M_PI);
            target.x() += noise.outlier_magnitude * std::cos(ang);
            target.y() += noise.outlier_magnitude * std::sin(ang);
          }

          FlowFactor factor;
          factor.frame_i = i;
          factor.frame_j = j;
          factor.px = x;
          factor.py = y;
          factor.target = target;
          factor.weight_x = factor.weight_y = 1.0 / (sigma * sigma);
          graph.factors.push_back(factor);
        }
      }
    }
  }

  graph.validate();
  return graph;
}

}  // namespace vfuse
