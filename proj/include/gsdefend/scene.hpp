#pragma once

// Domain types: Gaussian splats, clouds, cameras, dataset bundles, and the
// covariance algebra that turns factored parameters into Sigma.

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "gsdefend/image.hpp"

namespace gsd {

// One anisotropic 3D Gaussian. Covariance is stored factored as
// log per-axis standard deviations + a unit quaternion (w,x,y,z), which keeps
// Sigma = R diag(exp(ls))^2 R^T positive definite by construction.
struct GaussianSplat {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d log_scales = Eigen::Vector3d::Zero();
  Eigen::Vector4d rotation = Eigen::Vector4d(1, 0, 0, 0);  // (w,x,y,z)
  Eigen::Vector3d color = Eigen::Vector3d::Zero();
  double opacity_logit = 0.0;
};

struct GaussianCloud {
  std::vector<GaussianSplat> splats;
  std::vector<int> creation_iteration;  // telemetry, aligned with splats

  std::size_t size() const { return splats.size(); }
  void push(const GaussianSplat& s, int iter = 0) {
    splats.push_back(s);
    creation_iteration.push_back(iter);
  }
};

// Pinhole camera, world-to-camera rigid pose. Camera frame: x right, y down,
// z forward; a point is visible when its camera z (depth) is positive.
struct Camera {
  double fx = 0, fy = 0, cx = 0, cy = 0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();  // world -> camera
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  int width = 0, height = 0;

  Eigen::Vector3d to_camera(const Eigen::Vector3d& p_world) const {
    return rotation * p_world + translation;
  }
};

struct DatasetBundle {
  std::vector<Camera> train_cameras;
  std::vector<ImageBuffer> train_images;
  std::vector<Camera> test_cameras;
  std::vector<ImageBuffer> test_images;
  uint64_t seed = 0;
  std::string descriptor;
};

// Rotation matrix from a quaternion (w,x,y,z). The quaternion is normalized
// internally, so slightly off-unit inputs (e.g. mid-optimization) are fine.
Eigen::Matrix3d rotation_from_quat(const Eigen::Vector4d& q);

// Sigma = R diag(exp(log_scales))^2 R^T.
// Preconditions per contract: all inputs finite, |norm(q) - 1| <= 1e-6;
// violations raise std::invalid_argument.
Eigen::Matrix3d covariance_from_params(const Eigen::Vector3d& log_scales,
                                       const Eigen::Vector4d& rotation);

// Smallest per-axis standard deviation, min(exp(log_scales)). Its square is
// the smallest eigenvalue of the covariance; rotation-invariant.
double min_sigma(const GaussianSplat& splat);

inline double opacity_of(const GaussianSplat& s) {
  return 1.0 / (1.0 + std::exp(-s.opacity_logit));
}

}  // namespace gsd
