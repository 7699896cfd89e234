#pragma once

// Synthetic scene generation: random ground-truth clouds, a camera ring with
// golden-ratio elevation stagger, rendered dataset bundles, and the
// downsampled jittered cloud used to initialize training.

#include <cstdint>

#include "gsdefend/scene.hpp"

namespace gsd {

// Sampling ranges for the ground truth plus camera-rig geometry. The defaults
// are the desk-scale benchmark values.
struct SceneGenParams {
  double scale_lo = 0.035;  // per-axis standard deviation bounds
  double scale_hi = 0.16;
  double color_lo = 0.05;
  double color_hi = 0.95;
  double opacity_lo = 0.35;
  double opacity_hi = 0.95;
  double position_radius = 0.75;  // splat centers drawn in a ball this big
  double ring_radius = 3.2;
  double half_fov_deg = 35.0;  // horizontal half field of view
};

struct SyntheticScene {
  GaussianCloud ground_truth;
  DatasetBundle bundle;
};

// Ground truth sampled uniformly inside a centered ball (position_radius),
// cameras on a ring looking at the origin, images rendered from the ground
// truth over a black background. The ball keeps every view's borders dark so
// image statistics reflect scene content rather than frame clipping.
// Every eighth camera (and the last one when there are fewer than eight)
// becomes a test view. Pure function of (seed, arguments).
// image_size < 8 -> ConfigError; n_splats < 1 or n_cameras < 2 ->
// std::invalid_argument.
SyntheticScene generate_synthetic_scene(uint64_t seed, int n_splats, int n_cameras,
                                        int image_size,
                                        const SceneGenParams& params = {});

// Training start point: 10% of the ground-truth splats (at least one),
// sampled without replacement, positions jittered, painted mid-gray with
// small isotropic scales and low opacity.
GaussianCloud make_training_init(const GaussianCloud& ground_truth, uint64_t seed);

}  // namespace gsd
