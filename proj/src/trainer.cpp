#include "gsdefend/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "gsdefend/common.hpp"
#include "gsdefend/losses.hpp"
#include "gsdefend/render.hpp"

namespace gsd {

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-15;
constexpr double kSplitScaleShrink = 1.6;
constexpr int kBytesPerSplat = 112;  // 14 float64 parameters

void validate_train_config(const TrainConfig& c) {
  if (c.iterations < 1)
    throw std::invalid_argument("train: iterations must be >= 1");
  if (!(c.prune_ratio > 0.0) || !(c.prune_ratio < 1.0))
    throw std::invalid_argument("train: prune_ratio must be in (0, 1)");
  if (c.prune_interval < 1)
    throw std::invalid_argument("train: prune_interval must be >= 1");
  if (c.lambda_freq < 0.0)
    throw std::invalid_argument("train: lambda_freq must be >= 0");
  if (c.view_samples < 1)
    throw std::invalid_argument("train: view_samples must be >= 1");
  if (c.densify_interval < 1)
    throw std::invalid_argument("train: densify_interval must be >= 1");
  if (c.min_splats < 1)
    throw std::invalid_argument("train: min_splats must be >= 1");
  if (!(c.densify_until_fraction >= 0.0) || !(c.densify_until_fraction <= 1.0))
    throw std::invalid_argument("train: densify_until_fraction must be in [0, 1]");
  if (!(c.lr_position_init > 0.0) || !(c.lr_position_final > 0.0))
    throw std::invalid_argument("train: position learning rates must be > 0");
}

double position_lr(const TrainConfig& c, int iteration) {
  double frac = double(iteration) / double(c.iterations);
  return c.lr_position_init *
         std::pow(c.lr_position_final / c.lr_position_init, frac);
}

// Packed parameter layout shared by the Adam slabs:
// [position(3), log_scales(3), color(3), rotation(4), opacity(1)].
std::array<double*, 14> param_ptrs(GaussianSplat& s) {
  return {&s.position.x(),   &s.position.y(),   &s.position.z(),
          &s.log_scales.x(), &s.log_scales.y(), &s.log_scales.z(),
          &s.color.x(),      &s.color.y(),      &s.color.z(),
          &s.rotation.x(),   &s.rotation.y(),   &s.rotation.z(),
          &s.rotation.w(),   &s.opacity_logit};
}

std::array<double, 14> pack_gradient(const GradientBundle& g, std::size_t i) {
  return {g.d_position[i].x(),   g.d_position[i].y(),   g.d_position[i].z(),
          g.d_log_scales[i].x(), g.d_log_scales[i].y(), g.d_log_scales[i].z(),
          g.d_color[i].x(),      g.d_color[i].y(),      g.d_color[i].z(),
          g.d_rotation[i].x(),   g.d_rotation[i].y(),   g.d_rotation[i].z(),
          g.d_rotation[i].w(),   g.d_opacity_logit[i]};
}

struct PixelStats {
  double lo = 0.0, hi = 0.0, mean = 0.0;
};

PixelStats pixel_stats(const ImageBuffer& img) {
  PixelStats st;
  if (img.pix.empty()) return st;
  st.lo = st.hi = img.pix[0];
  double sum = 0.0;
  for (double v : img.pix) {
    st.lo = std::min(st.lo, v);
    st.hi = std::max(st.hi, v);
    sum += v;
  }
  st.mean = sum / double(img.pix.size());
  return st;
}

}  // namespace

const char* train_mode_name(TrainMode mode) {
  switch (mode) {
    case TrainMode::kClean: return "clean";
    case TrainMode::kPoisoned: return "poisoned";
    case TrainMode::kDefended: return "defended";
    case TrainMode::kBaselineUt: return "baseline_ut";
    case TrainMode::kBaselineScore: return "baseline_score";
  }
  return "clean";
}

TrainMode train_mode_from_name(const std::string& name) {
  if (name == "clean") return TrainMode::kClean;
  if (name == "poisoned") return TrainMode::kPoisoned;
  if (name == "defended") return TrainMode::kDefended;
  if (name == "baseline_ut") return TrainMode::kBaselineUt;
  if (name == "baseline_score") return TrainMode::kBaselineScore;
  throw ConfigError("unknown train mode: " + name);
}

double effective_lambda_freq(const TrainConfig& config) {
  if (config.mode != TrainMode::kDefended) return 0.0;
  if (!config.regularizer_enabled) return 0.0;
  return config.lambda_freq;
}

TotalLoss total_loss(const std::vector<ImageBuffer>& renders,
                     const std::vector<ImageBuffer>& targets,
                     const TrainConfig& config) {
  if (renders.empty() || renders.size() != targets.size())
    throw std::invalid_argument("total_loss: renders/targets misaligned");
  const int n_views = int(renders.size());
  for (int v = 0; v < n_views; ++v)
    if (!renders[v].same_size(targets[v]))
      throw std::invalid_argument("total_loss: view " + std::to_string(v) +
                                  " render/target size mismatch");

  const double lambda_f = effective_lambda_freq(config);
  const double inv_k = 1.0 / double(n_views);

  TotalLoss out;
  out.grads.resize(n_views);
  out.per_view_recon.resize(n_views);
  out.per_view_freq.assign(n_views, 0.0);
  out.per_view_tv.assign(n_views, 0.0);

  parallel_chunks(n_views, [&](int begin, int end) {
    for (int v = begin; v < end; ++v) {
      LossResult l1 = loss_l1(renders[v], targets[v]);
      LossResult dssim = loss_dssim(renders[v], targets[v]);
      out.per_view_recon[v] =
          (1.0 - config.lambda_ssim) * l1.value + config.lambda_ssim * dssim.value;

      ImageBuffer grad(renders[v].width, renders[v].height);
      const double wl1 = (1.0 - config.lambda_ssim) * inv_k;
      const double wds = config.lambda_ssim * inv_k;
      for (std::size_t p = 0; p < grad.pix.size(); ++p)
        grad.pix[p] = wl1 * l1.grad.pix[p] + wds * dssim.grad.pix[p];

      if (lambda_f > 0.0) {
        LossResult ani = anisotropy_loss(renders[v], config.spectral);
        LossResult tv = loss_tv(renders[v]);
        out.per_view_freq[v] = ani.value;
        out.per_view_tv[v] = tv.value;
        const double wf = lambda_f * inv_k;
        for (std::size_t p = 0; p < grad.pix.size(); ++p)
          grad.pix[p] += wf * (ani.grad.pix[p] + tv.grad.pix[p]);
      }
      out.grads[v] = std::move(grad);
    }
  });

  double recon = 0.0, freq = 0.0, tv = 0.0;
  for (int v = 0; v < n_views; ++v) {
    recon += out.per_view_recon[v];
    freq += out.per_view_freq[v];
    tv += out.per_view_tv[v];
  }
  out.recon = recon * inv_k;
  out.freq = lambda_f * freq * inv_k;
  out.tv = lambda_f * tv * inv_k;
  out.total = out.recon + out.freq + out.tv;
  return out;
}

TrainerState::TrainerState(const GaussianCloud& init) : cloud(init) {
  if (cloud.creation_iteration.size() != cloud.splats.size())
    cloud.creation_iteration.assign(cloud.splats.size(), 0);
  adam_m.assign(cloud.size(), {});
  adam_v.assign(cloud.size(), {});
  grad_accum.assign(cloud.size(), 0.0);
  grad_denom.assign(cloud.size(), 0);
}

void TrainerState::append_row(const GaussianSplat& s, int iteration) {
  GaussianSplat copy = s;  // source may live inside cloud.splats
  cloud.push(copy, iteration);
  adam_m.push_back({});
  adam_v.push_back({});
  grad_accum.push_back(0.0);
  grad_denom.push_back(0);
}

void TrainerState::compact(const std::vector<uint8_t>& keep) {
  std::size_t w = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (!keep[i]) continue;
    if (w != i) {
      cloud.splats[w] = cloud.splats[i];
      cloud.creation_iteration[w] = cloud.creation_iteration[i];
      adam_m[w] = adam_m[i];
      adam_v[w] = adam_v[i];
      grad_accum[w] = grad_accum[i];
      grad_denom[w] = grad_denom[i];
    }
    ++w;
  }
  cloud.splats.resize(w);
  cloud.creation_iteration.resize(w);
  adam_m.resize(w);
  adam_v.resize(w);
  grad_accum.resize(w);
  grad_denom.resize(w);
}

void TrainerState::reset_densify_stats() {
  std::fill(grad_accum.begin(), grad_accum.end(), 0.0);
  std::fill(grad_denom.begin(), grad_denom.end(), 0);
}

std::vector<TrainEvent> densify_and_prune(TrainerState& state, const TrainConfig& config,
                                          int iteration, uint64_t seed) {
  const std::size_t n0 = state.size();
  bool allow_additions = true;
  if (config.mode == TrainMode::kBaselineUt && config.ut_cap > 0 &&
      long(n0) > config.ut_cap)
    allow_additions = false;

  std::vector<uint8_t> keep(n0, 1);
  int clones = 0, splits = 0;
  if (allow_additions) {
    for (std::size_t i = 0; i < n0; ++i) {
      if (state.grad_denom[i] == 0) continue;
      double avg = state.grad_accum[i] / double(state.grad_denom[i]);
      if (!(avg > config.densify_grad_threshold)) continue;
      GaussianSplat parent = state.cloud.splats[i];
      double widest = parent.log_scales.array().exp().maxCoeff();
      if (widest <= config.split_scale_threshold) {
        state.append_row(parent, iteration);
        ++clones;
      } else {
        Eigen::Matrix3d rot = rotation_from_quat(parent.rotation);
        Eigen::Vector3d sigma = parent.log_scales.array().exp();
        Rng rng(mix_seed(seed, kTagSplit,
                         (uint64_t(uint32_t(iteration)) << 32) | uint64_t(uint32_t(i))));
        for (int c = 0; c < 2; ++c) {
          GaussianSplat child = parent;
          Eigen::Vector3d z(rng.normal(), rng.normal(), rng.normal());
          child.position = parent.position + rot * sigma.cwiseProduct(z);
          child.log_scales =
              parent.log_scales - Eigen::Vector3d::Constant(std::log(kSplitScaleShrink));
          state.append_row(child, iteration);
        }
        keep[i] = 0;
        ++splits;
      }
    }
  }

  keep.resize(state.size(), 1);  // fresh appends survive the split sweep
  std::vector<uint8_t> keep_opaque = keep;
  int faded = 0;
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (!keep_opaque[i]) continue;
    if (opacity_of(state.cloud.splats[i]) < config.opacity_prune_threshold) {
      keep_opaque[i] = 0;
      ++faded;
    }
  }
  std::size_t kept = 0;
  for (uint8_t k : keep_opaque) kept += k;

  std::vector<TrainEvent> events;
  TrainEvent ev;
  ev.iteration = iteration;
  ev.type = "densify";
  ev.added = clones + 2 * splits;
  if (faded > 0 && kept < std::size_t(config.min_splats)) {
    // dropping the faded splats would sink the cloud below the floor
    ev.removed = splits;
    state.compact(keep);
    events.push_back(ev);
    events.push_back({iteration, "densify_floor_skip", 0, 0});
  } else {
    ev.removed = splits + faded;
    state.compact(keep_opaque);
    events.push_back(ev);
  }
  state.reset_densify_stats();
  return events;
}

TrainEvent frequency_prune(TrainerState& state, const std::vector<int64_t>& hit_counts,
                           const TrainConfig& config, int iteration) {
  const std::size_t n = state.size();
  if (hit_counts.size() != n)
    throw std::invalid_argument("frequency_prune: hit counts misaligned with cloud");

  TrainEvent ev;
  ev.iteration = iteration;
  ev.type = "freq_prune";
  std::size_t k = std::size_t(std::floor(config.prune_ratio * double(n)));
  if (k == 0) return ev;  // no-op, still logged
  if (n - k < std::size_t(config.min_splats)) {
    ev.type = "freq_prune_skipped";
    return ev;
  }

  std::vector<double> score(n);
  for (std::size_t i = 0; i < n; ++i) {
    const GaussianSplat& s = state.cloud.splats[i];
    double weight = (config.mode == TrainMode::kBaselineScore)
                        ? opacity_of(s)
                        : hf_importance(s, config.freq_filter);
    score[i] = weight * double(hit_counts[i]);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t(0));
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (score[a] != score[b]) return score[a] < score[b];
    if (hit_counts[a] != hit_counts[b]) return hit_counts[a] < hit_counts[b];
    return a < b;
  });

  std::vector<uint8_t> keep(n, 1);
  for (std::size_t j = 0; j < k; ++j) keep[order[j]] = 0;
  state.compact(keep);
  ev.removed = int(k);
  return ev;
}

std::vector<int64_t> sample_prune_hits(const GaussianCloud& cloud,
                                       const std::vector<Camera>& cameras,
                                       const TrainConfig& config, uint64_t seed,
                                       int iteration) {
  if (cameras.empty())
    throw std::invalid_argument("sample_prune_hits: no cameras");
  const std::size_t n_views = cameras.size();
  const std::size_t want = std::min<std::size_t>(config.view_samples, n_views);

  std::vector<std::size_t> idx(n_views);
  std::iota(idx.begin(), idx.end(), std::size_t(0));
  Rng rng(mix_seed(seed, kTagPruneViews, uint64_t(iteration)));
  for (std::size_t j = 0; j < want; ++j) {
    std::size_t pick = j + rng.uniform_index(uint64_t(n_views - j));
    std::swap(idx[j], idx[pick]);
  }

  std::vector<std::vector<int64_t>> per_view(want);
  parallel_chunks(int(want), [&](int begin, int end) {
    for (int v = begin; v < end; ++v)
      per_view[v] = render(cloud, cameras[idx[v]], config.background).per_splat_hits;
  });

  std::vector<int64_t> hits(cloud.size(), 0);
  for (std::size_t v = 0; v < want; ++v)
    for (std::size_t i = 0; i < hits.size(); ++i) hits[i] += per_view[v][i];
  return hits;
}

std::pair<GaussianCloud, TrainReport> train(const DatasetBundle& bundle,
                                            const GaussianCloud& init_cloud,
                                            const TrainConfig& config, uint64_t seed) {
  validate_train_config(config);
  const std::size_t n_views = bundle.train_cameras.size();
  if (n_views == 0 || bundle.train_images.size() != n_views)
    throw std::invalid_argument("train: bundle needs aligned train views");
  for (std::size_t v = 0; v < n_views; ++v)
    if (bundle.train_images[v].width != bundle.train_cameras[v].width ||
        bundle.train_images[v].height != bundle.train_cameras[v].height)
      throw std::invalid_argument("train: view " + std::to_string(v) +
                                  " image/camera size mismatch");
  if (init_cloud.size() == 0)
    throw std::invalid_argument("train: initial cloud is empty");

  auto t_start = std::chrono::steady_clock::now();
  TrainerState state(init_cloud);
  TrainReport report;
  report.iterations.reserve(config.iterations);

  const int densify_until = int(config.densify_until_fraction * config.iterations);
  const bool prune_active = config.prune_enabled &&
                            (config.mode == TrainMode::kDefended ||
                             config.mode == TrainMode::kBaselineScore);

  std::vector<ImageBuffer> renders(n_views);
  std::vector<GradientBundle> view_grads(n_views);

  for (int iter = 1; iter <= config.iterations; ++iter) {
    const std::size_t n = state.size();

    parallel_chunks(int(n_views), [&](int begin, int end) {
      for (int v = begin; v < end; ++v)
        renders[v] = render(state.cloud, bundle.train_cameras[v], config.background).image;
    });

    TotalLoss loss = total_loss(renders, bundle.train_images, config);
    for (std::size_t v = 0; v < n_views; ++v) {
      bool bad = !std::isfinite(loss.per_view_recon[v]) ||
                 !std::isfinite(loss.per_view_freq[v]) ||
                 !std::isfinite(loss.per_view_tv[v]);
      if (!bad) continue;
      PixelStats rs = pixel_stats(renders[v]);
      PixelStats ts = pixel_stats(bundle.train_images[v]);
      char msg[384];
      std::snprintf(msg, sizeof msg,
                    "training loss diverged at iteration %d, view %zu: recon=%g "
                    "freq=%g tv=%g; render[min=%g max=%g mean=%g] "
                    "target[min=%g max=%g mean=%g], %zu splats",
                    iter, v, loss.per_view_recon[v], loss.per_view_freq[v],
                    loss.per_view_tv[v], rs.lo, rs.hi, rs.mean, ts.lo, ts.hi,
                    ts.mean, n);
      throw std::runtime_error(msg);
    }
    if (!std::isfinite(loss.total))
      throw std::runtime_error("training loss diverged at iteration " +
                               std::to_string(iter) + ": total is not finite");

    parallel_chunks(int(n_views), [&](int begin, int end) {
      for (int v = begin; v < end; ++v)
        view_grads[v] = render_backward(state.cloud, bundle.train_cameras[v],
                                        loss.grads[v], config.background);
    });

    // merge per-view gradients in view order; densification statistics are
    // kept in per-view half-image units so thresholds track the single-view
    // convention rather than the view count
    std::vector<std::array<double, 14>> grad(n, std::array<double, 14>{});
    for (std::size_t v = 0; v < n_views; ++v) {
      const GradientBundle& gb = view_grads[v];
      const double to_half_image =
          0.25 * (bundle.train_cameras[v].width + bundle.train_cameras[v].height) *
          double(n_views);
      for (std::size_t i = 0; i < n; ++i) {
        std::array<double, 14> g = pack_gradient(gb, i);
        for (int p = 0; p < 14; ++p) grad[i][p] += g[p];
        if (gb.visible[i]) {
          state.grad_accum[i] += gb.d_mean2d[i].norm() * to_half_image;
          state.grad_denom[i] += 1;
        }
      }
    }

    // Adam step, shared global timestep, per-group learning rates
    std::array<double, 14> lr;
    double lp = position_lr(config, iter);
    lr[0] = lr[1] = lr[2] = lp;
    lr[3] = lr[4] = lr[5] = config.lr_log_scales;
    lr[6] = lr[7] = lr[8] = config.lr_color;
    lr[9] = lr[10] = lr[11] = lr[12] = config.lr_rotation;
    lr[13] = config.lr_opacity;
    const double bc1 = 1.0 - std::pow(kAdamBeta1, iter);
    const double bc2 = 1.0 - std::pow(kAdamBeta2, iter);
    for (std::size_t i = 0; i < n; ++i) {
      auto ptrs = param_ptrs(state.cloud.splats[i]);
      for (int p = 0; p < 14; ++p) {
        double g = grad[i][p];
        double m = state.adam_m[i][p] = kAdamBeta1 * state.adam_m[i][p] +
                                        (1.0 - kAdamBeta1) * g;
        double vv = state.adam_v[i][p] = kAdamBeta2 * state.adam_v[i][p] +
                                         (1.0 - kAdamBeta2) * g * g;
        *ptrs[p] -= lr[p] * (m / bc1) / (std::sqrt(vv / bc2) + kAdamEps);
      }
      double qn = state.cloud.splats[i].rotation.norm();
      if (qn > 1e-12)
        state.cloud.splats[i].rotation /= qn;
      else
        state.cloud.splats[i].rotation = Eigen::Vector4d(1, 0, 0, 0);
    }

    if (iter % config.densify_interval == 0 && iter <= densify_until) {
      for (TrainEvent& ev : densify_and_prune(state, config, iter, seed))
        report.events.push_back(std::move(ev));
    }
    if (prune_active && iter % config.prune_interval == 0 && iter > config.prune_warmup) {
      std::vector<int64_t> hits =
          sample_prune_hits(state.cloud, bundle.train_cameras, config, seed, iter);
      report.events.push_back(frequency_prune(state, hits, config, iter));
    }

    TrainIterationRow row;
    row.gaussian_count = state.size();
    row.loss_total = loss.total;
    row.loss_recon = loss.recon;
    row.loss_freq = loss.freq;
    row.loss_tv = loss.tv;
    report.iterations.push_back(row);
  }

  for (const TrainIterationRow& row : report.iterations)
    report.max_gaussian_count = std::max(report.max_gaussian_count, row.gaussian_count);
  report.peak_memory_proxy_bytes = uint64_t(report.max_gaussian_count) * kBytesPerSplat;

  const std::vector<Camera>& eval_cams =
      bundle.test_cameras.empty() ? bundle.train_cameras : bundle.test_cameras;
  const std::vector<ImageBuffer>& eval_targets =
      bundle.test_cameras.empty() ? bundle.train_images : bundle.test_images;
  double psnr = 0.0, ssim = 0.0;
  for (std::size_t v = 0; v < eval_cams.size(); ++v) {
    ImageBuffer img = render(state.cloud, eval_cams[v], config.background).image;
    psnr += metric_psnr(img, eval_targets[v]);
    ssim += metric_ssim(img, eval_targets[v]);
  }
  report.final_psnr = psnr / double(eval_cams.size());
  report.final_ssim = ssim / double(eval_cams.size());
  report.fps = metric_fps(state.cloud, eval_cams, 3);
  report.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

  return {state.cloud, report};
}

}  // namespace gsd
