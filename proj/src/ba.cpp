#include "vfuse/ba.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>

namespace vfuse {

namespace {

double factor_cost(const FactorGraph& graph, const std::vector<Keyframe>& state,
                   const FlowFactor& f) {
  const Keyframe& ki = state[f.frame_i];
  const Keyframe& kj = state[f.frame_j];
  double d = ki.inv_depth.at(f.px, f.py);
  FlowJacobians fj =
      flow_jacobians(ki.pose, kj.pose, Eigen::Vector2d(f.px, f.py), d, graph.intrinsics);
  if (!fj.valid) return 0.0;
  Eigen::Vector2d r = fj.prediction - f.target;
  return f.weight_x * r.x() * r.x() + f.weight_y * r.y() * r.y();
}

double state_cost(const FactorGraph& graph, const std::vector<Keyframe>& state) {
  double c = 0.0;
  for (const FlowFactor& f : graph.factors) c += factor_cost(graph, state, f);
  return c;
}

std::vector<Keyframe> retract_state(const FactorGraph& graph, const Eigen::VectorXd& dxi,
                                    const Eigen::VectorXd& dd, const BlockSparseHessian& h,
                                    double min_inv_depth, double max_inv_depth) {
  std::vector<Keyframe> state = graph.keyframes;
  for (int slot = 0; slot < h.num_free; ++slot) {
    Twist tw = dxi.segment<6>(6 * slot);
    state[h.free_pose[slot]].pose = state[h.free_pose[slot]].pose.retract(tw);
  }
  const int wgrid = graph.grid_width, hgrid = graph.grid_height;
  for (int f = 0; f < graph.num_frames(); ++f) {
    DepthMap& m = state[f].inv_depth;
    for (int y = 0; y < hgrid; ++y) {
      for (int x = 0; x < wgrid; ++x) {
        double d = m.at(x, y);
        if (std::isnan(d)) continue;
        int k = graph.depth_index(f, x, y);
        m.at(x, y) = std::clamp(d + dd[k], min_inv_depth, max_inv_depth);
      }
    }
  }
  return state;
}

}  // namespace

double graph_cost(const FactorGraph& graph) { return state_cost(graph, graph.keyframes); }

BlockSparseHessian assemble(const FactorGraph& graph, double damping) {
  if (graph.keyframes.empty()) throw EmptyGraph();
  if (damping < 0.0) throw Error("damping must be non-negative");

  BlockSparseHessian h;
  h.damping = damping;
  h.pose_slot.assign(graph.num_frames(), -1);
  for (int f = 0; f < graph.num_frames(); ++f) {
    if (!graph.is_fixed(f)) {
      h.pose_slot[f] = h.num_free++;
      h.free_pose.push_back(f);
    }
  }

  const int n = 6 * h.num_free;
  const int nd = graph.depth_count();
  h.C = Eigen::MatrixXd::Zero(n, n);
  h.v = Eigen::VectorXd::Zero(n);
  h.P = Eigen::VectorXd::Zero(nd);
  h.w = Eigen::VectorXd::Zero(nd);
  h.total_weight = Eigen::VectorXd::Zero(nd);
  h.e_cols.resize(nd);

  for (const FlowFactor& f : graph.factors) {
    const Keyframe& ki = graph.keyframes[f.frame_i];
    const Keyframe& kj = graph.keyframes[f.frame_j];
    double d = ki.inv_depth.at(f.px, f.py);
    FlowJacobians fj =
        flow_jacobians(ki.pose, kj.pose, Eigen::Vector2d(f.px, f.py), d, graph.intrinsics);
    if (!fj.valid) {
      ++h.skipped_factors;
      continue;
    }
    Eigen::Vector2d r = fj.prediction - f.target;
    Eigen::Vector2d wgt(f.weight_x, f.weight_y);
    int k = graph.depth_index(f.frame_i, f.px, f.py);
    int si = h.pose_slot[f.frame_i];
    int sj = h.pose_slot[f.frame_j];

    Eigen::Matrix<double, 2, 6> jwi = wgt.asDiagonal() * fj.d_pose_i;
    Eigen::Matrix<double, 2, 6> jwj = wgt.asDiagonal() * fj.d_pose_j;
    Eigen::Vector2d jwd = wgt.asDiagonal() * fj.d_inv_depth;

    if (si >= 0) {
      h.C.block<6, 6>(6 * si, 6 * si).noalias() += fj.d_pose_i.transpose() * jwi;
      h.v.segment<6>(6 * si).noalias() -= fj.d_pose_i.transpose() * (wgt.asDiagonal() * r);
    }
    if (sj >= 0) {
      h.C.block<6, 6>(6 * sj, 6 * sj).noalias() += fj.d_pose_j.transpose() * jwj;
      h.v.segment<6>(6 * sj).noalias() -= fj.d_pose_j.transpose() * (wgt.asDiagonal() * r);
    }
    if (si >= 0 && sj >= 0) {
      Eigen::Matrix<double, 6, 6> cij = fj.d_pose_i.transpose() * jwj;
      h.C.block<6, 6>(6 * si, 6 * sj).noalias() += cij;
      h.C.block<6, 6>(6 * sj, 6 * si).noalias() += cij.transpose();
    }

    auto add_e = [&](int slot, const Vector6d& block) {
      for (BlockSparseHessian::EBlock& e : h.e_cols[k]) {
        if (e.pose == slot) {
          e.v += block;
          return;
        }
      }
      h.e_cols[k].push_back({slot, block});
    };
    if (si >= 0) add_e(si, fj.d_pose_i.transpose() * jwd);
    if (sj >= 0) add_e(sj, fj.d_pose_j.transpose() * jwd);

    h.P[k] += fj.d_inv_depth.dot(jwd);
    h.w[k] -= fj.d_inv_depth.dot(wgt.asDiagonal() * r);
    h.total_weight[k] += f.weight_x + f.weight_y;
  }

  // Symmetrize to remove rounding skew from the block accumulation.
  h.C = 0.5 * (h.C + h.C.transpose()).eval();

  for (int k = 0; k < nd; ++k) {
    if (h.total_weight[k] == 0.0) h.P[k] += 1e-6;  // prior on unobserved depths
    h.P[k] *= 1.0 + damping;
  }
  for (int i = 0; i < n; ++i) {
    h.C(i, i) *= 1.0 + damping;
    if (h.C(i, i) == 0.0) h.C(i, i) = damping;  // zero-guard for unobserved pose dims
  }
  return h;
}

ReducedSystem schur_reduce(const BlockSparseHessian& h) {
  const int nd = h.depth_count();
  for (int k = 0; k < nd; ++k)
    if (!(h.P[k] > 0.0)) throw NotPositiveDefinite("depth diagonal entry is not positive");

  ReducedSystem red;
  red.S = h.C;
  red.rhs = h.v;
  for (int k = 0; k < nd; ++k) {
    if (h.e_cols[k].empty()) continue;
    double pinv = 1.0 / h.P[k];
    for (const auto& ea : h.e_cols[k]) {
      red.rhs.segment<6>(6 * ea.pose).noalias() -= ea.v * (pinv * h.w[k]);
      for (const auto& eb : h.e_cols[k]) {
        red.S.block<6, 6>(6 * ea.pose, 6 * eb.pose).noalias() -= (ea.v * pinv) * eb.v.transpose();
      }
    }
  }
  red.S = 0.5 * (red.S + red.S.transpose()).eval();

  Eigen::LLT<Eigen::MatrixXd> llt(red.S);
  if (llt.info() != Eigen::Success)
    throw NotPositiveDefinite("reduced camera matrix is not positive definite; raise damping");
  red.L = llt.matrixL();
  return red;
}

Eigen::VectorXd solve_poses(const ReducedSystem& red) {
  Eigen::VectorXd y = red.L.triangularView<Eigen::Lower>().solve(red.rhs);
  return red.L.transpose().triangularView<Eigen::Upper>().solve(y);
}

Eigen::VectorXd solve_depths(const BlockSparseHessian& h, const Eigen::VectorXd& pose_update) {
  if (pose_update.size() != 6 * h.num_free)
    throw DimensionMismatch("pose update size does not match the system");
  const int nd = h.depth_count();
  Eigen::VectorXd dd(nd);
  for (int k = 0; k < nd; ++k) {
    double et_dxi = 0.0;
    for (const auto& e : h.e_cols[k]) et_dxi += e.v.dot(pose_update.segment<6>(6 * e.pose));
    dd[k] = (h.w[k] - et_dxi) / h.P[k];
  }
  return dd;
}

OptimizeReport optimize(FactorGraph& graph, const OptimizeOptions& opts) {
  graph.validate();
  OptimizeReport report;
  double cost = graph_cost(graph);
  report.initial_cost = cost;
  report.final_cost = cost;

  double lambda = opts.lambda_init;
  int growing_accepts = 0;
  double growth_run_start = cost;

  for (int it = 0; it < opts.max_iterations; ++it) {
    BlockSparseHessian h = assemble(graph, lambda);

    IterationInfo info;
    info.lambda = lambda;
    info.cost_before = cost;

    Eigen::VectorXd dxi, dd;
    try {
      ReducedSystem red = schur_reduce(h);
      dxi = solve_poses(red);
      dd = solve_depths(h, dxi);
    } catch (const NotPositiveDefinite&) {
      ++report.iterations;
      info.accepted = false;
      info.cost_after = cost;
      report.steps.push_back(info);
      lambda *= opts.lambda_increase;
      if (lambda > opts.lambda_max) {
        report.message = "damping limit reached on an indefinite system";
        break;
      }
      continue;
    }

    info.pose_update_norm = dxi.norm();
    info.depth_update_norm = dd.norm();
    double update_norm = std::sqrt(dxi.squaredNorm() + dd.squaredNorm());

    std::vector<Keyframe> candidate =
        retract_state(graph, dxi, dd, h, opts.min_inv_depth, opts.max_inv_depth);
    double new_cost = state_cost(graph, candidate);
    ++report.iterations;

    if (new_cost <= cost * (1.0 + opts.accept_growth)) {
      info.accepted = true;
      if (new_cost > cost) {
        if (growing_accepts == 0) growth_run_start = cost;
        ++growing_accepts;
      } else {
        growing_accepts = 0;
      }
      graph.keyframes = std::move(candidate);
      info.cost_after = new_cost;
      report.steps.push_back(info);
      cost = new_cost;
      report.final_cost = cost;
      if (growing_accepts >= 3) {
        // Three consecutive uphill accepts at rounding scale is a plateau;
        // meaningful cumulative growth is genuine divergence.
        if (cost > growth_run_start * (1.0 + 1e-6)) throw DivergenceDetected();
        report.converged = true;
        report.message = "cost plateau";
        break;
      }
      lambda = std::max(lambda * opts.lambda_decrease, opts.lambda_min);
      if (update_norm < opts.update_tolerance) {
        report.converged = true;
        report.message = "update norm below tolerance";
        break;
      }
    } else {
      info.accepted = false;
      info.cost_after = cost;
      report.steps.push_back(info);
      lambda *= opts.lambda_increase;
      if (lambda > opts.lambda_max) {
        report.message = "no cost-reducing step within the damping limit";
        break;
      }
    }
    report.final_lambda = lambda;
  }

  report.final_lambda = lambda;
  if (report.message.empty())
    report.message = report.converged ? "converged" : "iteration limit reached";
  return report;
}

}  // namespace vfuse
