#include "vfuse/scene.hpp"

#include <cmath>
#include <limits>

namespace vfuse {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMinT = 1e-9;

// Entry parameter for a ray hitting the box from outside; exit parameter if
// the origin is inside. +inf on miss.
double intersect_box_outside(const AxisBox& b, const Eigen::Vector3d& o,
                             const Eigen::Vector3d& d) {
  double tmin = -kInf, tmax = kInf;
  for (int a = 0; a < 3; ++a) {
    if (d[a] == 0.0) {
      if (o[a] < b.min[a] || o[a] > b.max[a]) return kInf;
      continue;
    }
    double t0 = (b.min[a] - o[a]) / d[a];
    double t1 = (b.max[a] - o[a]) / d[a];
    if (t0 > t1) std::swap(t0, t1);
    tmin = std::max(tmin, t0);
    tmax = std::min(tmax, t1);
    if (tmin > tmax) return kInf;
  }
  if (tmax < kMinT) return kInf;
  return tmin > kMinT ? tmin : tmax;
}

// Exit parameter for a ray starting inside the box (the room case).
double intersect_box_inside(const AxisBox& b, const Eigen::Vector3d& o, const Eigen::Vector3d& d) {
  double tmax = kInf;
  for (int a = 0; a < 3; ++a) {
    if (d[a] == 0.0) continue;
    double tfar = ((d[a] > 0.0 ? b.max[a] : b.min[a]) - o[a]) / d[a];
    tmax = std::min(tmax, tfar);
  }
  return tmax > kMinT ? tmax : kInf;
}

double intersect_sphere(const Sphere& s, const Eigen::Vector3d& o, const Eigen::Vector3d& d) {
  Eigen::Vector3d oc = o - s.center;
  double a = d.squaredNorm();
  double b = 2.0 * oc.dot(d);
  double c = oc.squaredNorm() - s.radius * s.radius;
  double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return kInf;
  double sq = std::sqrt(disc);
  double t0 = (-b - sq) / (2.0 * a);
  double t1 = (-b + sq) / (2.0 * a);
  if (t0 > kMinT) return t0;
  if (t1 > kMinT) return t1;
  return kInf;
}

}  // namespace

double Scene::raycast(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir) const {
  double t = kInf;
  if (room) t = std::min(t, intersect_box_inside(*room, origin, dir));
  for (const Sphere& s : spheres) t = std::min(t, intersect_sphere(s, origin, dir));
  for (const AxisBox& b : boxes) t = std::min(t, intersect_box_outside(b, origin, dir));
  return t;
}

double Scene::surface_area() const {
  auto box_area = [](const AxisBox& b) {
    Eigen::Vector3d e = b.max - b.min;
    return 2.0 * (e.x() * e.y() + e.y() * e.z() + e.z() * e.x());
  };
  double a = 0.0;
  if (room) a += box_area(*room);
  for (const Sphere& s : spheres) a += 4.0 * M_PI * s.radius * s.radius;
  for (const AxisBox& b : boxes) a += box_area(b);
  return a;
}

DepthMap raycast_inverse_depth(const Scene& scene, const Pose& cam_to_world,
                               const Intrinsics& k) {
  k.validate();
  cam_to_world.check_finite();
  DepthMap map(k.width, k.height);
  Eigen::Matrix3d r = cam_to_world.rotation();
  const Eigen::Vector3d& origin = cam_to_world.translation();
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      // Unnormalized ray with unit camera-frame z, so t equals depth.
      Eigen::Vector3d dir_cam((x - k.cx) / k.fx, (y - k.cy) / k.fy, 1.0);
      double t = scene.raycast(origin, r * dir_cam);
      if (std::isfinite(t)) map.at(x, y) = 1.0 / t;
    }
  }
  return map;
}

namespace {

void sample_rect(const Eigen::Vector3d& corner, const Eigen::Vector3d& eu,
                 const Eigen::Vector3d& ev, double density, Rng& rng,
                 std::vector<Eigen::Vector3d>& out) {
  double area = eu.norm() * ev.norm();
  long n = std::lround(area * density);
  for (long i = 0; i < n; ++i) {
    double u = rng.uniform(), v = rng.uniform();
    out.push_back(corner + u * eu + v * ev);
  }
}

void sample_box(const AxisBox& b, double density, Rng& rng, std::vector<Eigen::Vector3d>& out) {
  Eigen::Vector3d e = b.max - b.min;
  Eigen::Vector3d ex(e.x(), 0, 0), ey(0, e.y(), 0), ez(0, 0, e.z());
  sample_rect(b.min, ex, ey, density, rng, out);
  sample_rect(b.min + ez, ex, ey, density, rng, out);
  sample_rect(b.min, ex, ez, density, rng, out);
  sample_rect(b.min + ey, ex, ez, density, rng, out);
  sample_rect(b.min, ey, ez, density, rng, out);
  sample_rect(b.min + ex, ey, ez, density, rng, out);
}

}  // namespace

std::vector<Eigen::Vector3d> sample_scene_surface(const Scene& scene, double density, Rng& rng) {
  std::vector<Eigen::Vector3d> out;
  if (scene.room) sample_box(*scene.room, density, rng, out);
  for (const AxisBox& b : scene.boxes) sample_box(b, density, rng, out);
  for (const Sphere& s : scene.spheres) {
    double area = 4.0 * M_PI * s.radius * s.radius;
    long n = std::lround(area * density);
    for (long i = 0; i < n; ++i) {
      // Uniform on the sphere via uniform z and azimuth.
      double z = rng.uniform(-1.0, 1.0);
      double phi = rng.uniform(0.0, 2.0 * M_PI);
      double rxy = std::sqrt(std::max(0.0, 1.0 - z * z));
      Eigen::Vector3d dir(rxy * std::cos(phi), rxy * std::sin(phi), z);
      out.push_back(s.center + s.radius * dir);
    }
  }
  return out;
}

Pose look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target) {
  Eigen::Vector3d forward = (target - eye).normalized();
  Eigen::Vector3d up(0, 0, 1);
  if (std::abs(forward.dot(up)) > 0.999) up = Eigen::Vector3d(0, 1, 0);
  Eigen::Vector3d right = forward.cross(up).normalized();
  Eigen::Vector3d down = forward.cross(right).normalized();
  Eigen::Matrix3d r;
  r.col(0) = right;
  r.col(1) = down;
  r.col(2) = forward;
  return Pose(r, eye);
}

std::vector<Pose> ellipse_trajectory(int count, double rx, double ry, double height,
                                     const Eigen::Vector3d& target) {
  std::vector<Pose> poses;
  poses.reserve(count);
  for (int i = 0; i < count; ++i) {
    double ang = 2.0 * M_PI * i / count;
    Eigen::Vector3d eye(rx * std::cos(ang), ry * std::sin(ang), height);
    poses.push_back(look_at(eye, target));
  }
  return poses;
}

}  // namespace vfuse
