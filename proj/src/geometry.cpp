#include "vfuse/geometry.hpp"

#include <cmath>

namespace vfuse {

namespace {
constexpr double kMinZ = 1e-12;
}

Pose Pose::exp(const Twist& tw) {
  Eigen::Vector3d omega = tw.head<3>();
  Eigen::Vector3d rho = tw.tail<3>();
  double theta2 = omega.squaredNorm();
  double theta = std::sqrt(theta2);

  // a = sin t / t, b = (1 - cos t) / t^2, c = (t - sin t) / t^3
  double a, b, c;
  if (theta < 1e-8) {
    a = 1.0 - theta2 / 6.0;
    b = 0.5 - theta2 / 24.0;
    c = 1.0 / 6.0 - theta2 / 120.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
    c = (1.0 - a) / theta2;
  }

  Eigen::Matrix3d w = skew(omega);
  Eigen::Matrix3d w2 = w * w;
  Eigen::Matrix3d r = Eigen::Matrix3d::Identity() + a * w + b * w2;
  Eigen::Matrix3d v = Eigen::Matrix3d::Identity() + b * w + c * w2;
  return Pose(Eigen::Quaterniond(r), v * rho);
}

Twist Pose::log() const {
  Eigen::AngleAxisd aa(q_);
  double theta = aa.angle();
  // AngleAxis may report angles in (pi, 2*pi); map back to the principal
  // branch so that exp(log(T)) == T with the shortest rotation.
  Eigen::Vector3d axis = aa.axis();
  if (theta > M_PI) {
    theta = 2.0 * M_PI - theta;
    axis = -axis;
  }
  Eigen::Vector3d omega = theta * axis;

  double theta2 = theta * theta;
  double cinv;  // V^{-1} = I - w/2 + cinv * w^2
  if (theta < 1e-8) {
    cinv = 1.0 / 12.0 + theta2 / 720.0;
  } else {
    double a = std::sin(theta) / theta;
    double b = (1.0 - std::cos(theta)) / theta2;
    cinv = (1.0 - a / (2.0 * b)) / theta2;
  }
  Eigen::Matrix3d w = skew(omega);
  Eigen::Matrix3d vinv = Eigen::Matrix3d::Identity() - 0.5 * w + cinv * (w * w);

  Twist tw;
  tw.head<3>() = omega;
  tw.tail<3>() = vinv * t_;
  return tw;
}

Eigen::Vector2d project(const Eigen::Vector3d& pc, const Intrinsics& k) {
  if (pc.z() <= kMinZ) throw NonPositiveDepth();
  double iz = 1.0 / pc.z();
  return {k.fx * pc.x() * iz + k.cx, k.fy * pc.y() * iz + k.cy};
}

Eigen::Vector3d backproject(const Eigen::Vector2d& px, double inv_depth, const Intrinsics& k) {
  if (inv_depth <= 0.0) throw NonPositiveInverseDepth();
  double z = 1.0 / inv_depth;
  return {(px.x() - k.cx) / k.fx * z, (px.y() - k.cy) / k.fy * z, z};
}

Eigen::Matrix<double, 2, 3> project_jacobian(const Eigen::Vector3d& pc, const Intrinsics& k) {
  if (pc.z() <= kMinZ) throw NonPositiveDepth();
  double iz = 1.0 / pc.z();
  double iz2 = iz * iz;
  Eigen::Matrix<double, 2, 3> j;
  j << k.fx * iz, 0.0, -k.fx * pc.x() * iz2, 0.0, k.fy * iz, -k.fy * pc.y() * iz2;
  return j;
}

FlowJacobians flow_jacobians(const Pose& t_i, const Pose& t_j, const Eigen::Vector2d& px,
                             double inv_depth, const Intrinsics& k) {
  FlowJacobians out;
  if (inv_depth <= 0.0) throw NonPositiveInverseDepth();

  Eigen::Vector3d xi = backproject(px, inv_depth, k);
  Pose t_rel = t_j.inverse() * t_i;  // frame i -> frame j
  Eigen::Vector3d xj = t_rel * xi;
  if (xj.z() <= kMinZ) return out;

  Eigen::Matrix<double, 2, 3> a = project_jacobian(xj, k);
  Eigen::Matrix3d r_rel = t_rel.rotation();

  out.valid = true;
  out.prediction = project(xj, k);

  // Right perturbation of T_i: X_j(d) = T_rel (X_i + dw x X_i + dv).
  Eigen::Matrix<double, 2, 3> ar = a * r_rel;
  out.d_pose_i.leftCols<3>() = -ar * skew(xi);
  out.d_pose_i.rightCols<3>() = ar;

  // Right perturbation of T_j: X_j(d) = exp(-d) X_j = X_j - dw x X_j - dv.
  out.d_pose_j.leftCols<3>() = a * skew(xj);
  out.d_pose_j.rightCols<3>() = -a;

  // X_i = (normalized pixel ray) / d, so dX_i/dd = -X_i / d.
  out.d_inv_depth = ar * (-xi / inv_depth);
  return out;
}

}  // namespace vfuse
