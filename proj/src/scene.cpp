#include "gsdefend/scene.hpp"

#include <cmath>
#include <stdexcept>

namespace gsd {

Eigen::Matrix3d rotation_from_quat(const Eigen::Vector4d& q) {
  double n = q.norm();
  double w = q[0] / n, x = q[1] / n, y = q[2] / n, z = q[3] / n;
  Eigen::Matrix3d r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

Eigen::Matrix3d covariance_from_params(const Eigen::Vector3d& log_scales,
                                       const Eigen::Vector4d& rotation) {
  if (!log_scales.allFinite() || !rotation.allFinite())
    throw std::invalid_argument("covariance_from_params: non-finite input");
  if (std::fabs(rotation.norm() - 1.0) > 1e-6)
    throw std::invalid_argument("covariance_from_params: quaternion not unit");
  Eigen::Matrix3d r = rotation_from_quat(rotation);
  Eigen::Vector3d var = (2.0 * log_scales).array().exp();
  return r * var.asDiagonal() * r.transpose();
}

double min_sigma(const GaussianSplat& splat) {
  return std::exp(splat.log_scales.minCoeff());
}

}  // namespace gsd
