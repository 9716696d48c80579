#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "vfuse/factor_graph.hpp"

namespace vfuse {

// Gauss-Newton normal equations of a FactorGraph in arrow form
//
//   [ C   E ] [ dxi ]   [ v ]
//   [ E^T P ] [ dd  ] = [ w ]
//
// C couples the free poses (6x6 blocks, stored dense), P is strictly diagonal
// over inverse-depth variables, and E holds the pose-depth coupling as sparse
// per-depth columns. Diagonals carry multiplicative Levenberg damping; depth
// variables with zero total factor weight get a 1e-6 prior so P stays
// positive.
struct BlockSparseHessian {
  struct EBlock {
    int pose = 0;  // free-pose slot
    Vector6d v = Vector6d::Zero();
  };

  int num_free = 0;
  std::vector<int> pose_slot;  // frame -> free slot, -1 if gauge-fixed
  std::vector<int> free_pose;  // free slot -> frame
  Eigen::MatrixXd C;           // 6*num_free square
  std::vector<std::vector<EBlock>> e_cols;  // one column list per depth variable
  Eigen::VectorXd P;            // damped depth diagonal, strictly positive
  Eigen::VectorXd v;            // pose right-hand side
  Eigen::VectorXd w;            // depth right-hand side
  Eigen::VectorXd total_weight;  // per-depth sum of factor weights
  double damping = 0.0;
  int skipped_factors = 0;  // factors dropped because a point fell behind a camera

  int depth_count() const { return static_cast<int>(P.size()); }
};

// Schur complement of the depth block: S = C - E P^-1 E^T with matching
// right-hand side, plus its lower Cholesky factor L (S = L L^T).
struct ReducedSystem {
  Eigen::MatrixXd S;
  Eigen::VectorXd rhs;
  Eigen::MatrixXd L;
};

// Linearizes all factors at the graph's current state. `damping` scales the
// diagonal (H += damping * diag(H)); zero diagonal entries of C get `damping`
// itself as a guard so the pose block never degenerates.
BlockSparseHessian assemble(const FactorGraph& graph, double damping = 1e-4);

// Eliminates the depth block. Throws NotPositiveDefinite when the reduced
// camera matrix has no Cholesky factorization.
ReducedSystem schur_reduce(const BlockSparseHessian& h);

// Pose update by forward then back substitution through L.
Eigen::VectorXd solve_poses(const ReducedSystem& red);

// Depth back-substitution dd = P^-1 (w - E^T dxi).
Eigen::VectorXd solve_depths(const BlockSparseHessian& h, const Eigen::VectorXd& pose_update);

// Weighted squared residual sum at the graph state. Factors whose prediction
// falls behind a camera are skipped.
double graph_cost(const FactorGraph& graph);

struct OptimizeOptions {
  int max_iterations = 30;
  double lambda_init = 1e-4;
  double lambda_min = 1e-4;
  double lambda_max = 1e8;
  double lambda_decrease = 0.5;
  double lambda_increase = 10.0;
  double update_tolerance = 1e-6;  // stop when the stacked update norm drops below
  // Inverse depth is clamped to [min_inv_depth, max_inv_depth] after each
  // update; the interval is the solver's working depth range [0.5 m, 10 km].
  // Without the ceiling, pixels with inconsistent measurements run away
  // toward infinite inverse depth, where the point collapses onto its camera,
  // the flow Jacobian vanishes quadratically, the Newton step diverges, and
  // the quadratic marginal reports absurdly confident near-camera depths.
  // Pixels that finish on the ceiling carry no trustworthy estimate; pixels
  // on the floor are honest "beyond range" statements with huge variance.
  double min_inv_depth = 1e-4;
  double max_inv_depth = 2.0;
  // Steps may grow the cost by this relative amount and still be accepted;
  // three consecutive growing accepts abort with DivergenceDetected.
  double accept_growth = 1e-9;
};

struct IterationInfo {
  double lambda = 0.0;
  double cost_before = 0.0;
  double cost_after = 0.0;
  double pose_update_norm = 0.0;
  double depth_update_norm = 0.0;
  bool accepted = false;
};

struct OptimizeReport {
  double initial_cost = 0.0;
  double final_cost = 0.0;
  int iterations = 0;  // linearization attempts, accepted or not
  bool converged = false;
  double final_lambda = 0.0;
  std::vector<IterationInfo> steps;
  std::string message;
};

struct DivergenceDetected : Error {
  explicit DivergenceDetected(const std::string& what = "cost grew for three accepted steps")
      : Error(what) {}
};

// Levenberg-Marquardt on poses and depths. Updates the graph state in place;
// accepted costs are non-increasing up to accept_growth.
OptimizeReport optimize(FactorGraph& graph, const OptimizeOptions& opts = {});

}  // namespace vfuse
