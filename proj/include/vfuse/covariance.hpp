#pragma once

#include <Eigen/Dense>
#include <vector>

#include "vfuse/ba.hpp"

namespace vfuse {

// Dense marginal covariance of the free poses, Sigma_T = (L L^T)^-1,
// recovered by triangular solves against the identity. Never forms a general
// inverse.
Eigen::MatrixXd pose_covariance(const ReducedSystem& red);

// Marginal variance of every inverse-depth variable:
//
//   sigma_k^2 = P_kk^-1 + sum_r F_rk^2,   F = L^-1 E P^-1
//
// which follows from Sigma_d = P^-1 + P^-1 E^T Sigma_T E P^-1 and reuses the
// Cholesky factor L of the reduced camera matrix. Columns of F are obtained
// by batched triangular solves over column blocks of E P^-1, so peak memory
// stays at O(free pose dims x batch) and no dense Sigma_T * E product is ever
// materialized.
Eigen::VectorXd depth_marginal_variances(const BlockSparseHessian& h, const Eigen::MatrixXd& L,
                                         int batch = 4096);

// Reshapes per-variable variances into per-keyframe maps. Pixels whose total
// factor weight is below `min_weight` carry no real information (their
// variance is just the artificial prior) and are marked invalid.
std::vector<VarianceMap> variance_maps(const FactorGraph& graph, const BlockSparseHessian& h,
                                       const Eigen::VectorXd& variances,
                                       double min_weight = 1e-10);

}  // namespace vfuse
