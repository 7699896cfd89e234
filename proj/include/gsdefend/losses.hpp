#pragma once

// Image losses with analytic gradients, plus scalar quality metrics.

#include <vector>

#include "gsdefend/image.hpp"
#include "gsdefend/scene.hpp"

namespace gsd {

struct LossResult {
  double value = 0.0;
  ImageBuffer grad{0, 0};  // d value / d first argument
};

// Mean absolute error over all channel samples; subgradient 0 at exact ties.
LossResult loss_l1(const ImageBuffer& a, const ImageBuffer& b);

// (1 - SSIM)/2 with an 11x11 Gaussian window (sigma 1.5), C1=0.01^2,
// C2=0.03^2, valid-region convolution, channels averaged. On images smaller
// than the window the largest odd size that fits is used instead.
LossResult loss_dssim(const ImageBuffer& a, const ImageBuffer& b);

// Anisotropic total variation: sum of |horizontal diff| + |vertical diff|
// normalized by the number of channel samples; subgradient 0 at ties.
LossResult loss_tv(const ImageBuffer& img);

double metric_psnr(const ImageBuffer& a, const ImageBuffer& b);  // capped at 99 dB
double metric_ssim(const ImageBuffer& a, const ImageBuffer& b);

// Median over 3 timed runs of (repeats * |cameras|) / wall seconds.
double metric_fps(const GaussianCloud& cloud, const std::vector<Camera>& cameras,
                  int repeats);

}  // namespace gsd
