#pragma once

// Training-image poisoning: projected sign-gradient ascent on total
// variation inside an L-infinity ball, plus the comparison report between a
// clean bundle and its poisoned counterpart.

#include <vector>

#include "gsdefend/scene.hpp"

namespace gsd {

struct AttackConfig {
  double epsilon = 16.0 / 255.0;  // L-infinity budget in [0,1]
  int steps = 100;
  double step_size = 0.0;  // <= 0 picks the default: epsilon/10, or 2/255 when unconstrained
  bool unconstrained = false;  // drop the ball constraint, keep only [0,1]
};

// Ascends TV on every train image for config.steps sign-gradient steps, each
// followed by the ball projection (unless unconstrained) and a [0,1] clamp.
// The result is snapped to the 8-bit grid with the budget enforced on integer
// values, so the bound survives a PNG round trip exactly. Test images and
// cameras pass through untouched. Deterministic: no randomness anywhere.
DatasetBundle poison_images(const DatasetBundle& bundle, const AttackConfig& config);

struct PoisonImageStats {
  double tv_clean = 0.0;
  double tv_poisoned = 0.0;
  double tv_ratio = 1.0;
  double linf_deviation = 0.0;
  double anisotropy_clean = 0.0;
  double anisotropy_poisoned = 0.0;
  double anisotropy_delta = 0.0;
  double psnr = 0.0;  // clean vs poisoned
};

struct PoisonReport {
  std::vector<PoisonImageStats> images;  // one per train view, bundle order
  double mean_tv_ratio = 1.0;
  double max_linf_deviation = 0.0;
  double mean_anisotropy_delta = 0.0;
};

// Per-train-view damage statistics; throws std::invalid_argument when the
// bundles disagree on view count or image size.
PoisonReport poison_report(const DatasetBundle& clean, const DatasetBundle& poisoned);

}  // namespace gsd
