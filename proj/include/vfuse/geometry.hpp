#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "vfuse/error.hpp"

namespace vfuse {

using Vector6d = Eigen::Matrix<double, 6, 1>;

// se(3) tangent vector: first three components rotational, last three
// translational.
using Twist = Vector6d;

inline Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

// Rigid transform stored as unit quaternion + translation. Acts on points as
// X' = R X + t. Updates are right-multiplicative: retract(d) = T * exp(d).
class Pose {
 public:
  Pose() : q_(Eigen::Quaterniond::Identity()), t_(Eigen::Vector3d::Zero()) {}
  Pose(const Eigen::Quaterniond& q, const Eigen::Vector3d& t) : q_(q.normalized()), t_(t) {}
  Pose(const Eigen::Matrix3d& r, const Eigen::Vector3d& t) : q_(r), t_(t) { q_.normalize(); }

  static Pose exp(const Twist& tw);
  Twist log() const;

  Pose inverse() const {
    Eigen::Quaterniond qi = q_.conjugate();
    return Pose(qi, qi * (-t_));
  }

  Pose operator*(const Pose& rhs) const { return Pose(q_ * rhs.q_, t_ + q_ * rhs.t_); }
  Eigen::Vector3d operator*(const Eigen::Vector3d& p) const { return q_ * p + t_; }

  // Right-multiplicative update; renormalizes the quaternion.
  Pose retract(const Twist& d) const { return *this * exp(d); }

  Eigen::Matrix3d rotation() const { return q_.toRotationMatrix(); }
  const Eigen::Quaterniond& quaternion() const { return q_; }
  const Eigen::Vector3d& translation() const { return t_; }

  bool finite() const { return q_.coeffs().allFinite() && t_.allFinite(); }
  void check_finite() const {
    if (!finite()) throw InvalidPose();
  }

 private:
  Eigen::Quaterniond q_;
  Eigen::Vector3d t_;
};

// Pinhole camera. (cx, cy) live in pixel-center coordinates: integer pixel
// (u, v) samples the ray through (u, v).
struct Intrinsics {
  double fx = 0, fy = 0, cx = 0, cy = 0;
  int width = 0, height = 0;

  void validate() const {
    if (width <= 0 || height <= 0) throw InvalidIntrinsics("image size must be positive");
    if (fx <= 0 || fy <= 0) throw InvalidIntrinsics("focal lengths must be positive");
    if (cx <= 0 || cx >= width || cy <= 0 || cy >= height)
      throw InvalidIntrinsics("principal point must lie inside the image");
  }

  // Camera for a grid downsampled by an integer factor. Pixel centers of the
  // coarse grid sit at fine coordinate factor*i + (factor-1)/2.
  Intrinsics downscaled(int factor) const {
    Intrinsics k;
    k.fx = fx / factor;
    k.fy = fy / factor;
    double off = (factor - 1) * 0.5;
    k.cx = (cx - off) / factor;
    k.cy = (cy - off) / factor;
    k.width = width / factor;
    k.height = height / factor;
    return k;
  }
  Intrinsics upscaled(int factor) const {
    Intrinsics k;
    k.fx = fx * factor;
    k.fy = fy * factor;
    double off = (factor - 1) * 0.5;
    k.cx = cx * factor + off;
    k.cy = cy * factor + off;
    k.width = width * factor;
    k.height = height * factor;
    return k;
  }
};

// Projects a camera-frame point to pixel coordinates. Throws NonPositiveDepth
// if the point is not strictly in front of the camera.
Eigen::Vector2d project(const Eigen::Vector3d& pc, const Intrinsics& k);

// Lifts pixel coordinates and inverse depth d to a camera-frame point
// (z = 1/d). Throws NonPositiveInverseDepth for d <= 0.
Eigen::Vector3d backproject(const Eigen::Vector2d& px, double inv_depth, const Intrinsics& k);

// d(project)/d(point), 2x3, at a camera-frame point with z > 0.
Eigen::Matrix<double, 2, 3> project_jacobian(const Eigen::Vector3d& pc, const Intrinsics& k);

// Prediction and analytic derivatives of the reprojection of pixel `px` of
// frame i (camera-to-world pose t_i, inverse depth d) into frame j. Pose
// derivatives are taken w.r.t. right-multiplicative twists. `valid` is false
// when the point lies behind either camera; all other fields are then
// undefined.
struct FlowJacobians {
  bool valid = false;
  Eigen::Vector2d prediction = Eigen::Vector2d::Zero();
  Eigen::Matrix<double, 2, 6> d_pose_i = Eigen::Matrix<double, 2, 6>::Zero();
  Eigen::Matrix<double, 2, 6> d_pose_j = Eigen::Matrix<double, 2, 6>::Zero();
  Eigen::Vector2d d_inv_depth = Eigen::Vector2d::Zero();
};

FlowJacobians flow_jacobians(const Pose& t_i, const Pose& t_j, const Eigen::Vector2d& px,
                             double inv_depth, const Intrinsics& k);

}  // namespace vfuse
