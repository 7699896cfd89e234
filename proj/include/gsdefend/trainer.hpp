#pragma once

// Training loop: per-view photometric + spectral objective, Adam updates,
// adaptive densification, and frequency-aware pruning of splats whose Fourier
// response concentrates above the reference cutoff.

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gsdefend/image.hpp"
#include "gsdefend/scene.hpp"
#include "gsdefend/spectral2d.hpp"
#include "gsdefend/spectral3d.hpp"

namespace gsd {

enum class TrainMode { kClean, kPoisoned, kDefended, kBaselineUt, kBaselineScore };

const char* train_mode_name(TrainMode mode);
TrainMode train_mode_from_name(const std::string& name);  // ConfigError on unknown

struct TrainConfig {
  int iterations = 2000;

  // objective
  double lambda_ssim = 0.2;  // photometric mix: (1-l)*L1 + l*DSSIM
  double lambda_freq = 4.0;  // weight of the spectral terms (defended mode only)
  FreqFilterConfig freq_filter;
  SpectralConfig spectral;
  bool regularizer_enabled = true;

  // frequency-aware pruning
  double prune_ratio = 0.03;
  int prune_interval = 100;
  int view_samples = 48;  // capped at the train-view count
  int prune_warmup = 500;
  bool prune_enabled = true;

  // densification
  int densify_interval = 100;
  double densify_grad_threshold = 2e-4;  // mean per-view half-image-unit gradient
  double opacity_prune_threshold = 0.005;
  double densify_until_fraction = 0.6;
  double split_scale_threshold = 0.02;  // larger splats split, smaller clone

  TrainMode mode = TrainMode::kClean;
  long ut_cap = 0;  // baseline_ut: stop densifying above this count; <=0 = never
  int min_splats = 16;
  Eigen::Vector3d background = Eigen::Vector3d::Zero();

  // learning rates (position decays exponentially to its final value)
  double lr_position_init = 5e-4;
  double lr_position_final = 5e-6;
  double lr_log_scales = 5e-3;
  double lr_rotation = 1e-3;
  double lr_color = 5e-3;
  double lr_opacity = 0.05;
};

// Spectral terms participate only when the mode trains a defense and the
// regularizer is switched on; everything else runs the plain photometric loop.
double effective_lambda_freq(const TrainConfig& config);

struct TrainIterationRow {
  std::size_t gaussian_count = 0;  // after this iteration's mutations
  double loss_total = 0.0;
  double loss_recon = 0.0;
  double loss_freq = 0.0;  // weighted contribution, 0 when the term is off
  double loss_tv = 0.0;    // weighted contribution, 0 when the term is off
};

struct TrainEvent {
  int iteration = 0;
  std::string type;  // densify | densify_floor_skip | freq_prune | freq_prune_skipped
  int added = 0;
  int removed = 0;
};

struct TrainReport {
  std::vector<TrainIterationRow> iterations;
  std::vector<TrainEvent> events;
  std::size_t max_gaussian_count = 0;
  uint64_t peak_memory_proxy_bytes = 0;  // max count x 112 bytes/splat
  double wall_time_sec = 0.0;            // volatile; excluded from byte compares
  double final_psnr = 0.0;
  double final_ssim = 0.0;
  double fps = 0.0;  // volatile; excluded from byte compares
};

// Loss over a set of views. total = recon + weighted freq + weighted tv,
// exactly; grads[v] is d(total)/d(renders[v]). Per-view vectors are kept for
// divergence diagnostics.
struct TotalLoss {
  double total = 0.0;
  double recon = 0.0;
  double freq = 0.0;
  double tv = 0.0;
  std::vector<ImageBuffer> grads;
  std::vector<double> per_view_recon;
  std::vector<double> per_view_freq;  // unweighted
  std::vector<double> per_view_tv;    // unweighted
};

TotalLoss total_loss(const std::vector<ImageBuffer>& renders,
                     const std::vector<ImageBuffer>& targets,
                     const TrainConfig& config);

// Optimizer + telemetry state kept aligned with the cloud across mutations.
struct TrainerState {
  GaussianCloud cloud;
  // Adam moments, one row per splat, packed as
  // [position(3), log_scales(3), color(3), rotation(4), opacity(1)].
  std::vector<std::array<double, 14>> adam_m;
  std::vector<std::array<double, 14>> adam_v;
  // view-space positional gradient accumulators for densification
  std::vector<double> grad_accum;
  std::vector<int> grad_denom;

  explicit TrainerState(const GaussianCloud& init = {});
  std::size_t size() const { return cloud.size(); }
  void append_row(const GaussianSplat& s, int iteration);  // zeroed moments
  void compact(const std::vector<uint8_t>& keep);
  void reset_densify_stats();
};

// Clone/split splats whose mean accumulated view-space gradient exceeds the
// threshold, then drop near-transparent ones. Returns the logged events
// (the densify event, plus a floor-skip marker when the opacity sweep would
// sink the cloud below min_splats).
std::vector<TrainEvent> densify_and_prune(TrainerState& state, const TrainConfig& config,
                                          int iteration, uint64_t seed);

// Removes the floor(ratio * count) lowest-scoring splats. Score is
// hf_importance x hits (defended) or opacity x hits (baseline_score); ties
// prefer pruning fewer hits, then lower index. Skips (with an event) when the
// cut would drop the cloud below min_splats.
TrainEvent frequency_prune(TrainerState& state, const std::vector<int64_t>& hit_counts,
                           const TrainConfig& config, int iteration);

// Sum of per-splat blended-pixel counts over a seeded sample of
// min(view_samples, |cameras|) distinct views.
std::vector<int64_t> sample_prune_hits(const GaussianCloud& cloud,
                                       const std::vector<Camera>& cameras,
                                       const TrainConfig& config, uint64_t seed,
                                       int iteration);

// Full optimization loop. The initial cloud comes from the caller (bundles
// store it on disk next to the views). Throws std::runtime_error with a
// per-view diagnostic if the loss ever leaves the finite range.
std::pair<GaussianCloud, TrainReport> train(const DatasetBundle& bundle,
                                            const GaussianCloud& init_cloud,
                                            const TrainConfig& config, uint64_t seed);

}  // namespace gsd
