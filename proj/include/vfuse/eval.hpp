#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "vfuse/meshing.hpp"
#include "vfuse/rng.hpp"
#include "vfuse/upsample.hpp"

namespace vfuse {

struct PointCloud {
  std::vector<Eigen::Vector3d> points;

  void validate() const {
    for (const auto& p : points)
      if (!p.allFinite()) throw Error("point cloud contains non-finite coordinates");
  }
};

// Uniform-grid index for nearest-neighbor queries with a distance cutoff.
// Cells are sized well below the cutoff (a few points each on dense clouds),
// and the search expands cell shells outward until no closer point can exist,
// so results within the cutoff are exact.
class GridIndex {
 public:
  GridIndex(const PointCloud& cloud, double radius);

  // Index and distance of the nearest point within the radius, if any.
  std::optional<std::pair<int, double>> nearest(const Eigen::Vector3d& q) const;

 private:
  std::size_t cell_of(int cx, int cy, int cz) const;

  const PointCloud& cloud_;
  double radius_;
  double cell_ = 1.0;
  Eigen::Vector3d min_;
  std::vector<int> start_;    // per-cell offsets into entries_, plus terminator
  std::vector<int> entries_;  // point indices grouped by cell
  int nx_ = 0, ny_ = 0, nz_ = 0;
  int max_ring_ = 0;
};

// Uniform surface samples: each triangle draws round(area * density) points
// with uniform barycentric coordinates. May return an empty cloud at low
// density; throws EmptyMesh only when the mesh has no triangles.
PointCloud sample_mesh(const TriangleMesh& mesh, double density, Rng& rng);

// Point-to-point ICP aligning `source` onto `target` (returns the transform
// applied to source points). Correspondences beyond max_corr_dist are
// ignored. Throws InsufficientPoints (< 3 points on either side) or
// NoCorrespondences (first iteration finds no pair).
Pose icp_align(const PointCloud& source, const PointCloud& target, int max_iterations = 50,
               double max_corr_dist = 0.25, double tolerance = 1e-10);

// Nearest-neighbor distance statistics from every point of `from` to the
// cloud `to`. Pairs with no neighbor within max_dist are discarded from the
// statistics and counted as outliers.
struct NnStats {
  double rmse = 0.0;
  double mean = 0.0;
  std::size_t kept = 0;
  std::size_t total = 0;
  double inlier_fraction = 0.0;
  // Per-query nearest distance, +inf when beyond max_dist. Same order as
  // `from`.
  std::vector<double> distances;
};

NnStats cloud_distance_stats(const PointCloud& from, const PointCloud& to, double max_dist);
double cloud_distance_rmse(const PointCloud& from, const PointCloud& to, double max_dist);

// Reconstruction quality of an estimated cloud against ground truth under a
// distance cutoff: accuracy looks from the estimate to the ground truth
// (penalizing spurious geometry), completeness from the ground truth to the
// estimate (penalizing missing coverage).
struct EvalReport {
  double accuracy_rmse = 0.0;
  double accuracy_mean = 0.0;
  double accuracy_inliers = 0.0;
  double completeness_rmse = 0.0;
  double completeness_mean = 0.0;
  double completeness_inliers = 0.0;
  std::size_t est_points = 0;
  std::size_t gt_points = 0;
  double max_dist = 0.0;
  bool icp_applied = false;
  Pose alignment;  // transform applied to the estimate before scoring
};

EvalReport evaluate_clouds(const PointCloud& estimate, const PointCloud& ground_truth,
                           double max_dist, bool use_icp = false, int icp_max_iterations = 50,
                           double icp_max_corr_dist = 0.25);

// Multi-view consistency filter over posed depth images. A pixel's depth
// survives when at least `min_support` frames within `window` predict a
// consistent inverse depth (|1/z_predicted - 1/z_stored| < reproj_threshold
// at the reprojected pixel) and the depth is not smaller than half of the
// frame's mean depth. Survivors keep their value; filtered pixels become
// invalid. Returned sigmas are all 1 so constant-weight fusion treats
// survivors uniformly.
std::vector<DepthImage> depth_consistency_filter(const std::vector<DepthImage>& depths,
                                                 const std::vector<Pose>& poses,
                                                 const Intrinsics& k, int window,
                                                 double reproj_threshold = 0.005,
                                                 int min_support = 2);

}  // namespace vfuse
