#include "gsdefend/synth.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "gsdefend/common.hpp"
#include "gsdefend/render.hpp"

namespace gsd {

namespace {

constexpr double kGoldenFraction = 0.6180339887498949;

Camera ring_camera(int index, int n_cameras, int image_size,
                   const SceneGenParams& p) {
  double azimuth = kTwoPi * double(index) / double(n_cameras);
  double elevation =
      0.15 + 0.3 * std::fmod(double(index) * kGoldenFraction, 1.0);
  Eigen::Vector3d pos(p.ring_radius * std::cos(azimuth) * std::cos(elevation),
                      p.ring_radius * std::sin(azimuth) * std::cos(elevation),
                      p.ring_radius * std::sin(elevation));

  Camera cam;
  cam.width = cam.height = image_size;
  cam.fx = cam.fy = (image_size / 2.0) / std::tan(p.half_fov_deg * kPi / 180.0);
  cam.cx = (image_size - 1) / 2.0;
  cam.cy = (image_size - 1) / 2.0;
  Eigen::Vector3d forward = (-pos).normalized();
  Eigen::Vector3d up(0, 0, 1);
  Eigen::Vector3d right = forward.cross(up).normalized();
  Eigen::Vector3d down = forward.cross(right).normalized();
  cam.rotation.row(0) = right;
  cam.rotation.row(1) = down;
  cam.rotation.row(2) = forward;
  cam.translation = -cam.rotation * pos;
  return cam;
}

}  // namespace

SyntheticScene generate_synthetic_scene(uint64_t seed, int n_splats, int n_cameras,
                                        int image_size,
                                        const SceneGenParams& params) {
  if (image_size < 8)
    throw ConfigError("generate_synthetic_scene: image_size must be >= 8");
  if (n_splats < 1)
    throw std::invalid_argument("generate_synthetic_scene: n_splats must be >= 1");
  if (n_cameras < 2)
    throw std::invalid_argument("generate_synthetic_scene: n_cameras must be >= 2");

  SyntheticScene scene;
  Rng rng(mix_seed(seed, kTagScene));
  for (int i = 0; i < n_splats; ++i) {
    GaussianSplat s;
    // uniform in the ball: rejection-sample the unit cube
    Eigen::Vector3d p;
    do {
      for (int k = 0; k < 3; ++k) p[k] = rng.uniform(-1.0, 1.0);
    } while (p.squaredNorm() > 1.0);
    s.position = p * params.position_radius;
    for (int k = 0; k < 3; ++k)
      s.log_scales[k] =
          rng.uniform(std::log(params.scale_lo), std::log(params.scale_hi));
    for (int k = 0; k < 3; ++k)
      s.color[k] = rng.uniform(params.color_lo, params.color_hi);
    Eigen::Vector4d q;
    for (int k = 0; k < 4; ++k) q[k] = rng.normal();
    s.rotation = q / q.norm();
    s.opacity_logit = logit(rng.uniform(params.opacity_lo, params.opacity_hi));
    scene.ground_truth.push(s);
  }

  DatasetBundle& bundle = scene.bundle;
  for (int i = 0; i < n_cameras; ++i) {
    Camera cam = ring_camera(i, n_cameras, image_size, params);
    bool is_test = (i % 8 == 7) || (n_cameras < 8 && i == n_cameras - 1);
    ImageBuffer img = render(scene.ground_truth, cam).image;
    if (is_test) {
      bundle.test_cameras.push_back(cam);
      bundle.test_images.push_back(std::move(img));
    } else {
      bundle.train_cameras.push_back(cam);
      bundle.train_images.push_back(std::move(img));
    }
  }
  bundle.seed = seed;
  char desc[96];
  std::snprintf(desc, sizeof desc, "synthetic splats=%d cameras=%d px=%d",
                n_splats, n_cameras, image_size);
  bundle.descriptor = desc;
  return scene;
}

GaussianCloud make_training_init(const GaussianCloud& ground_truth, uint64_t seed) {
  if (ground_truth.size() == 0)
    throw std::invalid_argument("make_training_init: empty ground truth");
  std::size_t want = std::max<std::size_t>(1, ground_truth.size() / 10);

  Rng rng(mix_seed(seed, kTagInitCloud));
  std::vector<std::size_t> idx(ground_truth.size());
  std::iota(idx.begin(), idx.end(), std::size_t(0));
  for (std::size_t j = 0; j < want; ++j) {
    std::size_t pick = j + rng.uniform_index(uint64_t(idx.size() - j));
    std::swap(idx[j], idx[pick]);
  }

  GaussianCloud init;
  for (std::size_t j = 0; j < want; ++j) {
    GaussianSplat s;
    const GaussianSplat& src = ground_truth.splats[idx[j]];
    for (int k = 0; k < 3; ++k) s.position[k] = src.position[k] + 0.05 * rng.normal();
    s.log_scales = Eigen::Vector3d::Constant(std::log(0.07));
    s.rotation = Eigen::Vector4d(1, 0, 0, 0);
    s.color = Eigen::Vector3d::Constant(0.5);
    s.opacity_logit = logit(0.1);
    init.push(s);
  }
  return init;
}

}  // namespace gsd
