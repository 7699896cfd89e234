#pragma once

// Forward rasterizer (EWA-style projection + depth-sorted alpha blending) and
// the matching analytic backward pass.

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "gsdefend/image.hpp"
#include "gsdefend/scene.hpp"

namespace gsd {

// Numerical guards, shared with the tests so scene validators can reason about
// the same thresholds the rasterizer applies.
inline constexpr double kNearPlane = 0.01;        // cull at or before this depth
inline constexpr double kCovDilation = 0.3;       // px^2 added to cov2d diagonal
inline constexpr double kWeightClamp = 0.99;      // per-splat blending weight cap
inline constexpr double kWeightFloor = 1.0 / 255.0;
inline constexpr double kContribFloor = 1e-4;     // below this, a splat is skipped
inline constexpr double kTransmitFloor = 1e-4;    // pixel terminates below this

struct Projected2D {
  Eigen::Vector2d mean2d;    // pixel coordinates
  Eigen::Matrix2d cov2d;     // includes the diagonal dilation
  double depth = 0.0;        // camera-space z
  int splat_index = -1;

  // rasterization cache
  double inv_a = 0.0, inv_b = 0.0, inv_c = 0.0;  // cov2d^{-1} entries
  double alpha = 0.0;                            // sigmoid(opacity_logit)
  double q_skip = 0.0;   // Mahalanobis^2 beyond which weight < floor for sure
  Eigen::Vector3d color = Eigen::Vector3d::Zero();
  int x0 = 0, x1 = -1, y0 = 0, y1 = -1;          // inclusive pixel bbox
};

// Projects one splat; nullopt when culled (behind the near plane or 3-sigma
// footprint off-screen).
std::optional<Projected2D> project(const GaussianSplat& splat, const Camera& camera,
                                   int splat_index = 0);

struct RenderOutput {
  ImageBuffer image{0, 0};
  std::vector<int64_t> per_splat_hits;        // pixels where the splat blended
  std::vector<int> per_pixel_contributor_count;
};

RenderOutput render(const GaussianCloud& cloud, const Camera& camera,
                    const Eigen::Vector3d& background = Eigen::Vector3d::Zero());

struct GradientBundle {
  std::vector<Eigen::Vector3d> d_position;
  std::vector<Eigen::Vector3d> d_log_scales;
  std::vector<Eigen::Vector4d> d_rotation;
  std::vector<Eigen::Vector3d> d_color;
  std::vector<double> d_opacity_logit;
  // screen-space positional gradient + visibility, consumed by densification
  std::vector<Eigen::Vector2d> d_mean2d;
  std::vector<uint8_t> visible;

  void resize(std::size_t n);        // resizes and zeroes everything
  void add(const GradientBundle& other);
  std::size_t size() const { return d_position.size(); }
};

// Gradients of sum(d_loss_d_image .* rendered_image) w.r.t. every splat
// parameter. Splats that never blended anywhere get exactly zero gradients.
GradientBundle render_backward(const GaussianCloud& cloud, const Camera& camera,
                               const ImageBuffer& d_loss_d_image,
                               const Eigen::Vector3d& background = Eigen::Vector3d::Zero());

}  // namespace gsd
