#include "gsdefend/spectral3d.hpp"

#include <cmath>
#include <stdexcept>

#include "gsdefend/common.hpp"

namespace gsd {

double gaussian_amplitude(const Eigen::Matrix3d& sigma, const Eigen::Vector3d& t_vec) {
  double det = sigma.determinant();
  if (!(det > 0.0))
    throw std::invalid_argument("gaussian_amplitude: covariance is not SPD");
  double quad = t_vec.dot(sigma * t_vec);
  return std::pow(kTwoPi, 1.5) * std::sqrt(det) * std::exp(-2.0 * kPi * kPi * quad);
}

double gaussian_phase(const Eigen::Vector3d& mu, const Eigen::Vector3d& t_vec) {
  return -kTwoPi * t_vec.dot(mu);
}

double hf_attenuation_score(const GaussianSplat& splat, double t_ref) {
  if (!(t_ref > 0.0)) throw std::invalid_argument("hf_attenuation_score: t_ref must be > 0");
  double s = min_sigma(splat);
  double score = std::exp(-2.0 * kPi * kPi * t_ref * t_ref * s * s);
  return std::max(score, 1e-300);
}

double hf_importance(const GaussianSplat& splat, const FreqFilterConfig& config) {
  if (!(config.t_ref > 0.0) || !(config.alpha > 0.0))
    throw std::invalid_argument("hf_importance: t_ref and alpha must be > 0");
  double s = min_sigma(splat);
  double arg = 2.0 * kPi * kPi * config.t_ref * config.t_ref * s * s;
  double one_minus_s = -std::expm1(-arg);  // 1 - exp(-arg) without cancellation
  return std::pow(one_minus_s, config.alpha);
}

}  // namespace gsd
