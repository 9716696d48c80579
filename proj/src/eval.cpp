#include "vfuse/eval.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

namespace vfuse {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

GridIndex::GridIndex(const PointCloud& cloud, double radius) : cloud_(cloud), radius_(radius) {
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw Error("search radius must be positive and finite");
  cloud.validate();
  min_.setZero();
  if (cloud.points.empty()) {
    nx_ = ny_ = nz_ = 1;
    start_.assign(2, 0);
    return;
  }
  Eigen::Vector3d max = cloud.points[0];
  min_ = cloud.points[0];
  for (const auto& p : cloud.points) {
    min_ = min_.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  const Eigen::Vector3d extent = max - min_;
  const double n = static_cast<double>(cloud.points.size());

  // Start from the finer of radius/8 and the mean point spacing, then coarsen
  // until the grid stays within a few cells per point, so memory is O(n) no
  // matter how small the radius is.
  cell_ = std::max(radius / 8.0, std::cbrt(std::max(extent.prod(), 1e-30) / n));
  auto total_cells = [&extent](double cell) {
    return (std::floor(extent.x() / cell) + 1.0) * (std::floor(extent.y() / cell) + 1.0) *
           (std::floor(extent.z() / cell) + 1.0);
  };
  while (total_cells(cell_) > std::max(4.0 * n, 1024.0)) cell_ *= 2.0;

  nx_ = static_cast<int>(extent.x() / cell_) + 1;
  ny_ = static_cast<int>(extent.y() / cell_) + 1;
  nz_ = static_cast<int>(extent.z() / cell_) + 1;
  max_ring_ = static_cast<int>(std::ceil(radius / cell_)) + 1;

  const std::size_t cells = static_cast<std::size_t>(nx_) * ny_ * nz_;
  auto cell_index = [this](const Eigen::Vector3d& p) {
    int cx = std::min(static_cast<int>((p.x() - min_.x()) / cell_), nx_ - 1);
    int cy = std::min(static_cast<int>((p.y() - min_.y()) / cell_), ny_ - 1);
    int cz = std::min(static_cast<int>((p.z() - min_.z()) / cell_), nz_ - 1);
    return cell_of(cx, cy, cz);
  };
  start_.assign(cells + 1, 0);
  for (const auto& p : cloud.points) ++start_[cell_index(p) + 1];
  for (std::size_t c = 1; c <= cells; ++c) start_[c] += start_[c - 1];
  entries_.resize(cloud.points.size());
  std::vector<int> cursor(start_.begin(), start_.end() - 1);
  for (int i = 0; i < static_cast<int>(cloud.points.size()); ++i)
    entries_[cursor[cell_index(cloud.points[i])]++] = i;
}

std::size_t GridIndex::cell_of(int cx, int cy, int cz) const {
  return (static_cast<std::size_t>(cz) * ny_ + cy) * nx_ + cx;
}

std::optional<std::pair<int, double>> GridIndex::nearest(const Eigen::Vector3d& q) const {
  if (cloud_.points.empty()) return std::nullopt;
  const int cx = static_cast<int>(std::floor((q.x() - min_.x()) / cell_));
  const int cy = static_cast<int>(std::floor((q.y() - min_.y()) / cell_));
  const int cz = static_cast<int>(std::floor((q.z() - min_.z()) / cell_));
  int best = -1;
  double best_d2 = radius_ * radius_;
  for (int ring = 0; ring <= max_ring_; ++ring) {
    // Any point in this shell is at least (ring - 1) cell widths away.
    const double closest = (ring - 1) * cell_;
    if (closest > 0.0 && closest * closest > best_d2) break;
    for (int dz = -ring; dz <= ring; ++dz) {
      const int z = cz + dz;
      if (z < 0 || z >= nz_) continue;
      for (int dy = -ring; dy <= ring; ++dy) {
        const int y = cy + dy;
        if (y < 0 || y >= ny_) continue;
        // Interior (dx, dy, dz) combinations belong to earlier shells; only
        // sweep x fully on the shell's faces.
        const int step = std::max(std::abs(dz), std::abs(dy)) == ring ? 1 : 2 * ring;
        for (int dx = -ring; dx <= ring; dx += step) {
          const int x = cx + dx;
          if (x < 0 || x >= nx_) continue;
          const std::size_t c = cell_of(x, y, z);
          for (int e = start_[c]; e < start_[c + 1]; ++e) {
            const int i = entries_[e];
            const double d2 = (cloud_.points[i] - q).squaredNorm();
            if (d2 <= best_d2) {
              best_d2 = d2;
              best = i;
            }
          }
        }
      }
    }
  }
  if (best < 0) return std::nullopt;
  return std::make_pair(best, std::sqrt(best_d2));
}

PointCloud sample_mesh(const TriangleMesh& mesh, double density, Rng& rng) {
  if (mesh.triangles.empty()) throw EmptyMesh();
  if (density < 0.0) throw Error("sampling density must be non-negative");
  PointCloud cloud;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Eigen::Vector3d& a = mesh.vertices[tri[0]];
    const Eigen::Vector3d& b = mesh.vertices[tri[1]];
    const Eigen::Vector3d& c = mesh.vertices[tri[2]];
    double area = 0.5 * (b - a).cross(c - a).norm();
    long n = std::lround(area * density);
    Rng tri_rng = rng.fork(t);
    for (long i = 0; i < n; ++i) {
      double u = tri_rng.uniform();
      double v = tri_rng.uniform();
      if (u + v > 1.0) {  // reflect into the triangle
        u = 1.0 - u;
        v = 1.0 - v;
      }
      cloud.points.push_back(a + u * (b - a) + v * (c - a));
    }
  }
  return cloud;
}

Pose icp_align(const PointCloud& source, const PointCloud& target, int max_iterations,
               double max_corr_dist, double tolerance) {
  if (source.points.size() < 3 || target.points.size() < 3) throw InsufficientPoints();
  source.validate();
  GridIndex index(target, max_corr_dist);

  Pose transform;  // cumulative source -> target
  std::vector<Eigen::Vector3d> moved = source.points;

  for (int iter = 0; iter < max_iterations; ++iter) {
    Eigen::Vector3d centroid_s = Eigen::Vector3d::Zero();
    Eigen::Vector3d centroid_t = Eigen::Vector3d::Zero();
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < static_cast<int>(moved.size()); ++i) {
      auto nn = index.nearest(moved[i]);
      if (!nn) continue;
      pairs.emplace_back(i, nn->first);
      centroid_s += moved[i];
      centroid_t += target.points[nn->first];
    }
    if (pairs.size() < 3) {
      if (iter == 0) throw NoCorrespondences();
      break;
    }
    centroid_s /= static_cast<double>(pairs.size());
    centroid_t /= static_cast<double>(pairs.size());

    Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
    for (const auto& [si, ti] : pairs)
      h += (moved[si] - centroid_s) * (target.points[ti] - centroid_t).transpose();
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d r = svd.matrixV() * svd.matrixU().transpose();
    if (r.determinant() < 0.0) {
      Eigen::Matrix3d v = svd.matrixV();
      v.col(2) *= -1.0;
      r = v * svd.matrixU().transpose();
    }
    Eigen::Vector3d t = centroid_t - r * centroid_s;

    Pose step(r, t);
    transform = step * transform;
    for (auto& p : moved) p = step * p;
    if (step.log().norm() < tolerance) break;  // already aligned
  }
  return transform;
}

NnStats cloud_distance_stats(const PointCloud& from, const PointCloud& to, double max_dist) {
  if (from.points.empty() || to.points.empty()) throw EmptyCloud();
  if (max_dist <= 0.0) throw Error("distance cutoff must be positive");
  GridIndex index(to, max_dist);
  NnStats stats;
  stats.total = from.points.size();
  stats.distances.reserve(stats.total);
  double sum = 0.0, sum2 = 0.0;
  for (const auto& p : from.points) {
    auto nn = index.nearest(p);
    if (!nn) {
      stats.distances.push_back(kInf);
      continue;
    }
    stats.distances.push_back(nn->second);
    sum += nn->second;
    sum2 += nn->second * nn->second;
    ++stats.kept;
  }
  if (stats.kept > 0) {
    stats.mean = sum / static_cast<double>(stats.kept);
    stats.rmse = std::sqrt(sum2 / static_cast<double>(stats.kept));
  }
  stats.inlier_fraction = static_cast<double>(stats.kept) / static_cast<double>(stats.total);
  return stats;
}

double cloud_distance_rmse(const PointCloud& from, const PointCloud& to, double max_dist) {
  return cloud_distance_stats(from, to, max_dist).rmse;
}

EvalReport evaluate_clouds(const PointCloud& estimate, const PointCloud& ground_truth,
                           double max_dist, bool use_icp, int icp_max_iterations,
                           double icp_max_corr_dist) {
  EvalReport report;
  report.max_dist = max_dist;
  report.est_points = estimate.points.size();
  report.gt_points = ground_truth.points.size();

  PointCloud aligned = estimate;
  if (use_icp) {
    report.alignment =
        icp_align(estimate, ground_truth, icp_max_iterations, icp_max_corr_dist);
    for (auto& p : aligned.points) p = report.alignment * p;
    report.icp_applied = true;
  }

  NnStats acc = cloud_distance_stats(aligned, ground_truth, max_dist);
  NnStats comp = cloud_distance_stats(ground_truth, aligned, max_dist);
  report.accuracy_rmse = acc.rmse;
  report.accuracy_mean = acc.mean;
  report.accuracy_inliers = acc.inlier_fraction;
  report.completeness_rmse = comp.rmse;
  report.completeness_mean = comp.mean;
  report.completeness_inliers = comp.inlier_fraction;
  return report;
}

std::vector<DepthImage> depth_consistency_filter(const std::vector<DepthImage>& depths,
                                                 const std::vector<Pose>& poses,
                                                 const Intrinsics& k, int window,
                                                 double reproj_threshold, int min_support) {
  if (depths.size() != poses.size())
    throw DimensionMismatch("one pose per depth image required");
  const int frames = static_cast<int>(depths.size());
  k.validate();

  // Frame mean depths over valid pixels.
  std::vector<double> mean_depth(frames, 0.0);
  for (int f = 0; f < frames; ++f) {
    double sum = 0.0;
    std::size_t n = 0;
    for (int y = 0; y < depths[f].z.height(); ++y)
      for (int x = 0; x < depths[f].z.width(); ++x)
        if (depths[f].z.valid(x, y)) {
          sum += depths[f].z.at(x, y);
          ++n;
        }
    mean_depth[f] = n > 0 ? sum / static_cast<double>(n) : 0.0;
  }

  std::vector<DepthImage> out(frames);
  for (int f = 0; f < frames; ++f) {
    const DepthImage& src = depths[f];
    if (src.z.width() != k.width || src.z.height() != k.height)
      throw DimensionMismatch("depth image size does not match the intrinsics");
    DepthImage dst;
    dst.keyframe = src.keyframe;
    dst.z = Image(k.width, k.height);
    dst.sigma = Image(k.width, k.height);

    for (int y = 0; y < k.height; ++y) {
      for (int x = 0; x < k.width; ++x) {
        if (!src.z.valid(x, y)) continue;
        double z = src.z.at(x, y);
        if (!(z > 0.0)) continue;
        if (z < 0.5 * mean_depth[f]) continue;  // too close for its frame

        Eigen::Vector3d pw = poses[f] * backproject(Eigen::Vector2d(x, y), 1.0 / z, k);
        int support = 0;
        for (int g = std::max(0, f - window); g <= std::min(frames - 1, f + window); ++g) {
          if (g == f) continue;
          Eigen::Vector3d pc = poses[g].inverse() * pw;
          if (pc.z() <= 1e-9) continue;
          double iz = 1.0 / pc.z();
          int u = static_cast<int>(std::lround(k.fx * pc.x() * iz + k.cx));
          int v = static_cast<int>(std::lround(k.fy * pc.y() * iz + k.cy));
          if (!depths[g].z.valid(u, v)) continue;
          double zg = depths[g].z.at(u, v);
          if (!(zg > 0.0)) continue;
          // Consistency in inverse depth, matching the solver's variable.
          if (std::abs(iz - 1.0 / zg) < reproj_threshold) ++support;
        }
        if (support >= min_support) {
          dst.z.at(x, y) = z;
          dst.sigma.at(x, y) = 1.0;
        }
      }
    }
    out[f] = std::move(dst);
  }
  return out;
}

}  // namespace vfuse
