#pragma once

#include <stdexcept>
#include <string>

namespace vfuse {

// Base type for all library errors. Catch this to handle anything thrown here.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct NonPositiveDepth : Error {
  explicit NonPositiveDepth(const std::string& what = "depth must be positive") : Error(what) {}
};

struct NonPositiveInverseDepth : Error {
  explicit NonPositiveInverseDepth(const std::string& what = "inverse depth must be positive")
      : Error(what) {}
};

struct InvalidPose : Error {
  explicit InvalidPose(const std::string& what = "pose is not a finite rigid transform")
      : Error(what) {}
};

struct InvalidIntrinsics : Error {
  explicit InvalidIntrinsics(const std::string& what = "intrinsics out of range") : Error(what) {}
};

struct EmptyGraph : Error {
  explicit EmptyGraph(const std::string& what = "factor graph has no keyframes") : Error(what) {}
};

struct InsufficientKeyframes : Error {
  explicit InsufficientKeyframes(const std::string& what = "need at least two keyframes")
      : Error(what) {}
};

struct DimensionMismatch : Error {
  explicit DimensionMismatch(const std::string& what = "operand dimensions do not match")
      : Error(what) {}
};

struct NotPositiveDefinite : Error {
  explicit NotPositiveDefinite(const std::string& what =
                                   "system is not positive definite; raise damping")
      : Error(what) {}
};

struct AllZeroWeights : Error {
  explicit AllZeroWeights(const std::string& what = "all observation weights are zero")
      : Error(what) {}
};

struct EmptyMesh : Error {
  explicit EmptyMesh(const std::string& what = "mesh has no triangles") : Error(what) {}
};

struct EmptyCloud : Error {
  explicit EmptyCloud(const std::string& what = "point cloud is empty") : Error(what) {}
};

struct InsufficientPoints : Error {
  explicit InsufficientPoints(const std::string& what = "not enough points") : Error(what) {}
};

struct NoCorrespondences : Error {
  explicit NoCorrespondences(const std::string& what =
                                 "no correspondences within the search radius")
      : Error(what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(what) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(what) {}
};

}  // namespace vfuse
