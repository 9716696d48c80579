#include "vfuse/covariance.hpp"

namespace vfuse {

Eigen::MatrixXd pose_covariance(const ReducedSystem& red) {
  const int n = static_cast<int>(red.L.rows());
  Eigen::MatrixXd y = Eigen::MatrixXd::Identity(n, n);
  red.L.triangularView<Eigen::Lower>().solveInPlace(y);  // y = L^-1
  Eigen::MatrixXd cov = y.transpose() * y;               // (L L^T)^-1
  return 0.5 * (cov + cov.transpose()).eval();
}

Eigen::VectorXd depth_marginal_variances(const BlockSparseHessian& h, const Eigen::MatrixXd& L,
                                         int batch) {
  const int n = 6 * h.num_free;
  const int nd = h.depth_count();
  if (L.rows() != n || L.cols() != n)
    throw DimensionMismatch("Cholesky factor size does not match the system");
  if (batch < 1) batch = 1;

  Eigen::VectorXd out(nd);
  Eigen::MatrixXd cols(n, batch);
  for (int k0 = 0; k0 < nd; k0 += batch) {
    int m = std::min(batch, nd - k0);
    cols.setZero(n, m);
    for (int c = 0; c < m; ++c) {
      int k = k0 + c;
      double pinv = 1.0 / h.P[k];
      for (const auto& e : h.e_cols[k]) cols.col(c).segment<6>(6 * e.pose) = e.v * pinv;
    }
    // cols becomes F = L^-1 E P^-1 for this batch.
    L.triangularView<Eigen::Lower>().solveInPlace(cols);
    for (int c = 0; c < m; ++c) out[k0 + c] = 1.0 / h.P[k0 + c] + cols.col(c).squaredNorm();
  }
  return out;
}

std::vector<VarianceMap> variance_maps(const FactorGraph& graph, const BlockSparseHessian& h,
                                       const Eigen::VectorXd& variances, double min_weight) {
  if (variances.size() != graph.depth_count())
    throw DimensionMismatch("variance vector does not match the graph");
  std::vector<VarianceMap> maps;
  maps.reserve(graph.num_frames());
  for (int f = 0; f < graph.num_frames(); ++f) {
    VarianceMap m(graph.grid_width, graph.grid_height);
    for (int y = 0; y < graph.grid_height; ++y) {
      for (int x = 0; x < graph.grid_width; ++x) {
        int k = graph.depth_index(f, x, y);
        if (h.total_weight[k] < min_weight) continue;  // stays invalid
        if (!graph.keyframes[f].inv_depth.valid(x, y)) continue;
        m.at(x, y) = variances[k];
      }
    }
    maps.push_back(std::move(m));
  }
  return maps;
}

}  // namespace vfuse
