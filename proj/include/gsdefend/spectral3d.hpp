#pragma once

// Closed-form Fourier response of a 3D Gaussian and the derived per-splat
// frequency-importance scores used by pruning.

#include <Eigen/Dense>

#include "gsdefend/scene.hpp"

namespace gsd {

struct FreqFilterConfig {
  double t_ref = 8.0;  // cutoff frequency, cycles per scene unit
  double alpha = 2.0;  // importance exponent
};

// Amplitude of the continuous Fourier transform of an unnormalized Gaussian
// with covariance sigma at frequency t_vec:
//   (2*pi)^{3/2} * |sigma|^{1/2} * exp(-2*pi^2 * t' * sigma * t).
double gaussian_amplitude(const Eigen::Matrix3d& sigma, const Eigen::Vector3d& t_vec);

// Phase shift contributed by the mean: -2*pi * t' * mu.
double gaussian_phase(const Eigen::Vector3d& mu, const Eigen::Vector3d& t_vec);

// Attenuation along the splat's narrowest axis at scalar cutoff t_ref:
// exp(-2*pi^2 * t_ref^2 * min_sigma^2), floored at 1e-300 to keep ordering
// total under extreme scales.
double hf_attenuation_score(const GaussianSplat& splat, double t_ref);

// Importance weight (1 - S)^alpha: near zero for splats whose spectrum dies
// before the cutoff, near one for needle-thin high-frequency splats.
double hf_importance(const GaussianSplat& splat, const FreqFilterConfig& config);

}  // namespace gsd
