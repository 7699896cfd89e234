#include "gsdefend/attack.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gsdefend/common.hpp"
#include "gsdefend/losses.hpp"
#include "gsdefend/spectral2d.hpp"

namespace gsd {

namespace {

ImageBuffer attack_one(const ImageBuffer& clean, const AttackConfig& cfg) {
  if (!cfg.unconstrained && cfg.epsilon == 0.0) return clean;  // identity, bit for bit
  double step = cfg.step_size > 0.0
                    ? cfg.step_size
                    : (cfg.unconstrained ? 2.0 / 255.0 : cfg.epsilon / 10.0);
  ImageBuffer x = clean;
  if (step > 0.0) {
    for (int it = 0; it < cfg.steps; ++it) {
      LossResult tv = loss_tv(x);
      for (std::size_t i = 0; i < x.pix.size(); ++i) {
        double g = tv.grad.pix[i];
        if (g > 0.0)
          x.pix[i] += step;
        else if (g < 0.0)
          x.pix[i] -= step;
        if (!cfg.unconstrained) {
          double lo = clean.pix[i] - cfg.epsilon, hi = clean.pix[i] + cfg.epsilon;
          x.pix[i] = std::min(hi, std::max(lo, x.pix[i]));
        }
        x.pix[i] = std::min(1.0, std::max(0.0, x.pix[i]));
      }
    }
  }
  // Snap to the 8-bit grid and enforce the budget on integer levels, so the
  // constraint holds exactly on what a PNG round trip preserves.
  for (std::size_t i = 0; i < x.pix.size(); ++i) {
    long v = std::lround(x.pix[i] * 255.0);
    if (!cfg.unconstrained) {
      long k = std::lround(clean.pix[i] * 255.0);
      long n = long(std::floor(cfg.epsilon * 255.0 + 1e-9));
      v = std::min(k + n, std::max(k - n, v));
    }
    v = std::min(255L, std::max(0L, v));
    x.pix[i] = double(v) / 255.0;
  }
  return x;
}

}  // namespace

DatasetBundle poison_images(const DatasetBundle& bundle, const AttackConfig& config) {
  if (config.epsilon < 0.0)
    throw std::invalid_argument("poison_images: epsilon must be >= 0");
  if (config.steps < 1)
    throw std::invalid_argument("poison_images: steps must be >= 1");

  DatasetBundle out = bundle;
  parallel_chunks(out.train_images.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      out.train_images[i] = attack_one(bundle.train_images[i], config);
  });
  return out;
}

PoisonReport poison_report(const DatasetBundle& clean, const DatasetBundle& poisoned) {
  if (clean.train_images.size() != poisoned.train_images.size())
    throw std::invalid_argument("poison_report: train view count mismatch");

  PoisonReport rep;
  SpectralConfig spectral;
  double ratio_sum = 0.0, delta_sum = 0.0;
  for (std::size_t i = 0; i < clean.train_images.size(); ++i) {
    const ImageBuffer& a = clean.train_images[i];
    const ImageBuffer& b = poisoned.train_images[i];
    if (!a.same_size(b))
      throw std::invalid_argument("poison_report: image size mismatch");

    PoisonImageStats s;
    s.tv_clean = loss_tv(a).value;
    s.tv_poisoned = loss_tv(b).value;
    s.tv_ratio = s.tv_clean > 0.0
                     ? s.tv_poisoned / s.tv_clean
                     : (s.tv_poisoned > 0.0
                            ? std::numeric_limits<double>::infinity()
                            : 1.0);
    s.linf_deviation = max_abs_diff(a, b);
    s.anisotropy_clean = anisotropy_loss(a, spectral).value;
    s.anisotropy_poisoned = anisotropy_loss(b, spectral).value;
    s.anisotropy_delta = s.anisotropy_poisoned - s.anisotropy_clean;
    s.psnr = metric_psnr(a, b);
    ratio_sum += s.tv_ratio;
    delta_sum += s.anisotropy_delta;
    rep.max_linf_deviation = std::max(rep.max_linf_deviation, s.linf_deviation);
    rep.images.push_back(s);
  }
  if (!rep.images.empty()) {
    rep.mean_tv_ratio = ratio_sum / double(rep.images.size());
    rep.mean_anisotropy_delta = delta_sum / double(rep.images.size());
  }
  return rep;
}

}  // namespace gsd
