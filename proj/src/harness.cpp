#include "gsdefend/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include "gsdefend/common.hpp"
#include "gsdefend/io.hpp"
#include "gsdefend/losses.hpp"
#include "gsdefend/png_io.hpp"
#include "gsdefend/render.hpp"
#include "gsdefend/spectral2d.hpp"
#include "gsdefend/synth.hpp"

namespace fs = std::filesystem;

namespace gsd {

namespace {

const std::set<std::string>& key_registry() {
  static const std::set<std::string> keys = {
      "scene.n_splats", "scene.n_cameras", "scene.image_size",
      "attack.epsilon", "attack.steps", "attack.step_size", "attack.unconstrained",
      "train.iterations", "train.lambda_ssim", "train.lambda_freq",
      "train.prune_ratio", "train.prune_interval", "train.view_samples",
      "train.prune_warmup", "train.prune_enabled", "train.regularizer_enabled",
      "train.densify_interval", "train.densify_grad_threshold",
      "train.opacity_prune_threshold", "train.densify_until_fraction",
      "train.split_scale_threshold", "train.ut_cap", "train.min_splats",
      "train.mode", "train.background", "train.lr_position_init",
      "train.lr_position_final", "train.lr_log_scales", "train.lr_rotation",
      "train.lr_color", "train.lr_opacity",
      "freq_filter.t_ref", "freq_filter.alpha",
      "spectral.gamma_min", "spectral.gamma_max", "spectral.bins",
      "spectral.min_radius",
      "spectrum.input_dir", "spectrum.rings",
      "report.modes",
  };
  return keys;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw IoError("cannot create directory " + p.string() + ": " + ec.message());
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << content;
  if (!out) throw IoError("write failed: " + path.string());
}

nlohmann::ordered_json train_config_json(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["mode"] = train_mode_name(c.mode);
  j["iterations"] = c.iterations;
  j["lambda_ssim"] = c.lambda_ssim;
  j["lambda_freq"] = c.lambda_freq;
  j["regularizer_enabled"] = c.regularizer_enabled;
  j["freq_filter"] = {{"t_ref", c.freq_filter.t_ref}, {"alpha", c.freq_filter.alpha}};
  j["spectral"] = {{"gamma_min", c.spectral.gamma_min},
                   {"gamma_max", c.spectral.gamma_max},
                   {"bins", c.spectral.bins},
                   {"min_radius", c.spectral.min_radius}};
  j["prune_ratio"] = c.prune_ratio;
  j["prune_interval"] = c.prune_interval;
  j["view_samples"] = c.view_samples;
  j["prune_warmup"] = c.prune_warmup;
  j["prune_enabled"] = c.prune_enabled;
  j["densify_interval"] = c.densify_interval;
  j["densify_grad_threshold"] = c.densify_grad_threshold;
  j["opacity_prune_threshold"] = c.opacity_prune_threshold;
  j["densify_until_fraction"] = c.densify_until_fraction;
  j["split_scale_threshold"] = c.split_scale_threshold;
  j["ut_cap"] = c.ut_cap;
  j["min_splats"] = c.min_splats;
  j["background"] = {c.background.x(), c.background.y(), c.background.z()};
  j["lr_position_init"] = c.lr_position_init;
  j["lr_position_final"] = c.lr_position_final;
  j["lr_log_scales"] = c.lr_log_scales;
  j["lr_rotation"] = c.lr_rotation;
  j["lr_color"] = c.lr_color;
  j["lr_opacity"] = c.lr_opacity;
  return j;
}

void update_manifest(const HarnessArgs& args, const std::string& command,
                     nlohmann::ordered_json payload) {
  fs::path path = fs::path(args.out_dir) / "manifest.json";
  nlohmann::ordered_json manifest;
  if (fs::exists(path)) manifest = load_json_file(path.string());
  manifest["tool_version"] = kToolVersion;
  payload["seed"] = args.seed;
  payload["config_file"] = args.config_path;
  if (command == "train" || command == "eval") {
    manifest["commands"][command][args.mode.empty() ? "clean" : args.mode] =
        std::move(payload);
  } else {
    manifest["commands"][command] = std::move(payload);
  }
  write_json_file(manifest, path.string());
}

ConfigMap load_config(const HarnessArgs& args) {
  if (args.config_path.empty()) return ConfigMap{};
  return ConfigMap::from_file(args.config_path);
}

TrainMode resolve_mode(const HarnessArgs& args, const ConfigMap& cfg) {
  if (!args.mode.empty()) return train_mode_from_name(args.mode);
  return train_mode_from_name(cfg.get_string("train.mode", "clean"));
}

std::string view_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "view_%03zu.png", index);
  return buf;
}

std::string seed_header(uint64_t seed) {
  return "# seed=" + std::to_string(seed) + "\n";
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0;
  for (double x : v) s += x;
  return s / double(v.size());
}

// ratio column relative to the clean row, two decimals, direction arrow
std::string ratio_cell(double value, double clean_value) {
  if (clean_value == 0.0) return "n/a";
  double r = value / clean_value;
  char buf[48];
  const char* arrow = r > 1.005 ? "↑" : (r < 0.995 ? "↓" : "");
  std::snprintf(buf, sizeof buf, "%.2fx%s", r, arrow);
  return buf;
}

std::string format_fixed(double v, int places) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", places, v);
  return buf;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

ConfigMap ConfigMap::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file: " + path);
  ConfigMap out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string text = trim(line);
    if (text.empty()) continue;
    std::size_t eq = text.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected 'key = value'");
    std::string key = trim(text.substr(0, eq));
    std::string value = trim(text.substr(eq + 1));
    if (key.empty())
      throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
    if (!key_registry().count(key))
      throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown key '" +
                        key + "'");
    if (out.values_.count(key))
      throw ConfigError(path + ":" + std::to_string(lineno) + ": duplicate key '" +
                        key + "'");
    out.values_[key] = value;
  }
  return out;
}

std::string ConfigMap::get_string(const std::string& key,
                                  const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    std::size_t pos = 0;
    double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing text");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not a number: " + it->second);
  }
}

int ConfigMap::get_int(const std::string& key, int fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    std::size_t pos = 0;
    int v = std::stoi(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing text");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not an integer: " + it->second);
  }
}

long ConfigMap::get_long(const std::string& key, long fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    std::size_t pos = 0;
    long v = std::stol(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing text");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not an integer: " + it->second);
  }
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config key '" + key + "': expected true/false: " + v);
}

TrainConfig config_for_mode(TrainMode mode) {
  TrainConfig cfg;
  cfg.mode = mode;
  // calibrated for the 64x64 synthetic benchmark: high enough that a
  // well-fit scene stops growing, low enough that unfittable detail keeps
  // triggering densification
  cfg.densify_grad_threshold = 6e-4;
  if (mode == TrainMode::kDefended) {
    // At 64x64 the anisotropy gradient is orders of magnitude stronger
    // relative to the reconstruction gradient than at production image
    // sizes, so the benchmark weight is far below the type default.
    cfg.lambda_freq = 0.05;
    // Poison residuals at this scale re-trigger densification as fast as
    // pruning sheds it; the defended trainer densifies against a stricter
    // bar so mid-band adversarial texture is not chased in the first place.
    cfg.densify_grad_threshold = 1e-3;
  }
  return cfg;
}

TrainConfig train_config_from(const ConfigMap& cm, TrainMode mode) {
  TrainConfig c = config_for_mode(mode);
  c.iterations = cm.get_int("train.iterations", c.iterations);
  c.lambda_ssim = cm.get_double("train.lambda_ssim", c.lambda_ssim);
  c.lambda_freq = cm.get_double("train.lambda_freq", c.lambda_freq);
  c.regularizer_enabled = cm.get_bool("train.regularizer_enabled", c.regularizer_enabled);
  c.prune_ratio = cm.get_double("train.prune_ratio", c.prune_ratio);
  c.prune_interval = cm.get_int("train.prune_interval", c.prune_interval);
  c.view_samples = cm.get_int("train.view_samples", c.view_samples);
  c.prune_warmup = cm.get_int("train.prune_warmup", c.prune_warmup);
  c.prune_enabled = cm.get_bool("train.prune_enabled", c.prune_enabled);
  c.densify_interval = cm.get_int("train.densify_interval", c.densify_interval);
  c.densify_grad_threshold =
      cm.get_double("train.densify_grad_threshold", c.densify_grad_threshold);
  c.opacity_prune_threshold =
      cm.get_double("train.opacity_prune_threshold", c.opacity_prune_threshold);
  c.densify_until_fraction =
      cm.get_double("train.densify_until_fraction", c.densify_until_fraction);
  c.split_scale_threshold =
      cm.get_double("train.split_scale_threshold", c.split_scale_threshold);
  c.ut_cap = cm.get_long("train.ut_cap", c.ut_cap);
  c.min_splats = cm.get_int("train.min_splats", c.min_splats);
  c.lr_position_init = cm.get_double("train.lr_position_init", c.lr_position_init);
  c.lr_position_final = cm.get_double("train.lr_position_final", c.lr_position_final);
  c.lr_log_scales = cm.get_double("train.lr_log_scales", c.lr_log_scales);
  c.lr_rotation = cm.get_double("train.lr_rotation", c.lr_rotation);
  c.lr_color = cm.get_double("train.lr_color", c.lr_color);
  c.lr_opacity = cm.get_double("train.lr_opacity", c.lr_opacity);
  c.freq_filter.t_ref = cm.get_double("freq_filter.t_ref", c.freq_filter.t_ref);
  c.freq_filter.alpha = cm.get_double("freq_filter.alpha", c.freq_filter.alpha);
  c.spectral.gamma_min = cm.get_double("spectral.gamma_min", c.spectral.gamma_min);
  c.spectral.gamma_max = cm.get_double("spectral.gamma_max", c.spectral.gamma_max);
  c.spectral.bins = cm.get_int("spectral.bins", c.spectral.bins);
  c.spectral.min_radius = cm.get_double("spectral.min_radius", c.spectral.min_radius);
  std::string bg = cm.get_string("train.background", "");
  if (!bg.empty()) {
    double r, g, b;
    if (std::sscanf(bg.c_str(), "%lf ,%lf ,%lf", &r, &g, &b) != 3 &&
        std::sscanf(bg.c_str(), "%lf,%lf,%lf", &r, &g, &b) != 3)
      throw ConfigError("train.background: expected 'r,g,b': " + bg);
    c.background = Eigen::Vector3d(r, g, b);
  }
  return c;
}

AttackConfig attack_config_from(const ConfigMap& cm) {
  AttackConfig a;
  a.epsilon = cm.get_double("attack.epsilon", a.epsilon);
  a.steps = cm.get_int("attack.steps", a.steps);
  a.step_size = cm.get_double("attack.step_size", a.step_size);
  a.unconstrained = cm.get_bool("attack.unconstrained", a.unconstrained);
  return a;
}

SceneSpec scene_spec_from(const ConfigMap& cm) {
  SceneSpec s;
  s.n_splats = cm.get_int("scene.n_splats", s.n_splats);
  s.n_cameras = cm.get_int("scene.n_cameras", s.n_cameras);
  s.image_size = cm.get_int("scene.image_size", s.image_size);
  return s;
}

int cmd_gen(const HarnessArgs& args) {
  ConfigMap cm = load_config(args);
  SceneSpec spec = scene_spec_from(cm);
  SyntheticScene scene =
      generate_synthetic_scene(args.seed, spec.n_splats, spec.n_cameras, spec.image_size);
  GaussianCloud init = make_training_init(scene.ground_truth, args.seed);

  fs::path bundle_dir = fs::path(args.out_dir) / "bundle";
  ensure_dir(bundle_dir);
  save_bundle(scene.bundle, bundle_dir.string());
  save_cloud(scene.ground_truth, (bundle_dir / "gt_cloud.gspl").string());
  save_cloud(init, (bundle_dir / "init_cloud.gspl").string());

  nlohmann::ordered_json payload;
  payload["scene"] = {{"n_splats", spec.n_splats},
                      {"n_cameras", spec.n_cameras},
                      {"image_size", spec.image_size}};
  payload["outputs"] = {{"bundle", "bundle"}};
  update_manifest(args, "gen", payload);

  std::printf("gen: %zu train / %zu test views (%dx%d), %d ground-truth splats, "
              "%zu-splat init -> %s\n",
              scene.bundle.train_images.size(), scene.bundle.test_images.size(),
              spec.image_size, spec.image_size, spec.n_splats, init.size(),
              bundle_dir.string().c_str());
  return 0;
}

int cmd_poison(const HarnessArgs& args) {
  ConfigMap cm = load_config(args);
  AttackConfig acfg = attack_config_from(cm);
  fs::path bundle_dir = fs::path(args.out_dir) / "bundle";
  DatasetBundle clean = load_bundle(bundle_dir.string());
  DatasetBundle poisoned = poison_images(clean, acfg);

  fs::path out_dir = fs::path(args.out_dir) / "poisoned";
  ensure_dir(out_dir);
  save_bundle(poisoned, out_dir.string());

  PoisonReport rep = poison_report(clean, poisoned);
  nlohmann::ordered_json j;
  j["seed"] = clean.seed;
  j["attack"] = {{"epsilon", acfg.epsilon},
                 {"steps", acfg.steps},
                 {"step_size", acfg.step_size},
                 {"unconstrained", acfg.unconstrained}};
  j["mean_tv_ratio"] = rep.mean_tv_ratio;
  j["max_linf_deviation"] = rep.max_linf_deviation;
  j["mean_anisotropy_delta"] = rep.mean_anisotropy_delta;
  nlohmann::ordered_json images = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < rep.images.size(); ++i) {
    const PoisonImageStats& st = rep.images[i];
    images.push_back({{"view", i},
                      {"tv_clean", st.tv_clean},
                      {"tv_poisoned", st.tv_poisoned},
                      {"tv_ratio", st.tv_ratio},
                      {"linf_deviation", st.linf_deviation},
                      {"anisotropy_clean", st.anisotropy_clean},
                      {"anisotropy_poisoned", st.anisotropy_poisoned},
                      {"anisotropy_delta", st.anisotropy_delta},
                      {"psnr", st.psnr}});
  }
  j["images"] = std::move(images);
  write_json_file(j, (out_dir / "poison_report.json").string());

  nlohmann::ordered_json payload;
  payload["attack"] = j["attack"];
  payload["mean_tv_ratio"] = rep.mean_tv_ratio;
  payload["max_linf_deviation"] = rep.max_linf_deviation;
  update_manifest(args, "poison", payload);

  std::printf("poison: %zu train views, mean TV ratio %.3f, max Linf %.6f -> %s\n",
              rep.images.size(), rep.mean_tv_ratio, rep.max_linf_deviation,
              out_dir.string().c_str());
  return 0;
}

int cmd_train(const HarnessArgs& args) {
  ConfigMap cm = load_config(args);
  TrainMode mode = resolve_mode(args, cm);
  TrainConfig cfg = train_config_from(cm, mode);

  fs::path root(args.out_dir);
  fs::path bundle_dir =
      mode == TrainMode::kClean ? root / "bundle" : root / "poisoned";
  DatasetBundle bundle = load_bundle(bundle_dir.string());
  GaussianCloud init = load_cloud((root / "bundle" / "init_cloud.gspl").string());

  if (mode == TrainMode::kBaselineUt && !cm.has("train.ut_cap")) {
    // scaled default: twice the clean run's peak count on this scene
    fs::path clean_report = root / "runs" / "clean" / "report.json";
    if (!fs::exists(clean_report))
      throw ConfigError(
          "baseline_ut needs train.ut_cap, or a finished clean run to scale from "
          "(missing " + clean_report.string() + ")");
    nlohmann::ordered_json j = load_json_file(clean_report.string());
    cfg.ut_cap = 2 * j.at("max_gaussian_count").get<long>();
  }

  auto [cloud, report] = train(bundle, init, cfg, args.seed);

  fs::path run_dir = root / "runs" / train_mode_name(mode);
  ensure_dir(run_dir);
  save_cloud(cloud, (run_dir / "cloud.gspl").string());

  nlohmann::ordered_json j;
  j["seed"] = args.seed;
  j["mode"] = train_mode_name(mode);
  j["tool_version"] = kToolVersion;
  j["config"] = train_config_json(cfg);
  j["final_gaussian_count"] = cloud.size();
  j["max_gaussian_count"] = report.max_gaussian_count;
  j["peak_memory_proxy_bytes"] = report.peak_memory_proxy_bytes;
  j["final_psnr"] = report.final_psnr;
  j["final_ssim"] = report.final_ssim;
  nlohmann::ordered_json events = nlohmann::ordered_json::array();
  for (const TrainEvent& ev : report.events)
    events.push_back({{"iteration", ev.iteration},
                      {"type", ev.type},
                      {"added", ev.added},
                      {"removed", ev.removed}});
  j["events"] = std::move(events);
  write_json_file(j, (run_dir / "report.json").string());

  nlohmann::ordered_json timing;
  timing["seed"] = args.seed;
  timing["wall_time_sec"] = report.wall_time_sec;
  timing["fps"] = report.fps;
  write_json_file(timing, (run_dir / "timing.json").string());

  std::string csv = seed_header(args.seed);
  csv += "iteration,gaussian_count,loss_total,loss_recon,loss_freq,loss_tv\n";
  for (std::size_t i = 0; i < report.iterations.size(); ++i) {
    const TrainIterationRow& r = report.iterations[i];
    csv += std::to_string(i + 1) + "," + std::to_string(r.gaussian_count) + "," +
           format_double(r.loss_total) + "," + format_double(r.loss_recon) + "," +
           format_double(r.loss_freq) + "," + format_double(r.loss_tv) + "\n";
  }
  write_text_file(run_dir / "train_curve.csv", csv);

  fs::path render_dir = run_dir / "test_renders";
  ensure_dir(render_dir);
  std::string seed_text = "seed=" + std::to_string(args.seed);
  for (std::size_t v = 0; v < bundle.test_cameras.size(); ++v) {
    ImageBuffer img = render(cloud, bundle.test_cameras[v], cfg.background).image;
    save_png(img, (render_dir / view_name(v)).string(), seed_text);
  }

  nlohmann::ordered_json payload;
  payload["bundle"] = bundle_dir.filename().string();
  payload["config"] = train_config_json(cfg);
  payload["max_gaussian_count"] = report.max_gaussian_count;
  update_manifest(args, "train", payload);

  std::printf("train[%s]: %d iterations, count %zu -> %zu (max %zu), "
              "PSNR %.2f dB, SSIM %.4f, %.1f s -> %s\n",
              train_mode_name(mode), cfg.iterations, init.size(), cloud.size(),
              report.max_gaussian_count, report.final_psnr, report.final_ssim,
              report.wall_time_sec, run_dir.string().c_str());
  return 0;
}

int cmd_eval(const HarnessArgs& args) {
  ConfigMap cm = load_config(args);
  TrainMode mode = resolve_mode(args, cm);
  TrainConfig cfg = train_config_from(cm, mode);

  fs::path root(args.out_dir);
  fs::path run_dir = root / "runs" / train_mode_name(mode);
  GaussianCloud cloud = load_cloud((run_dir / "cloud.gspl").string());
  // always score against the clean captures, whatever the model trained on
  DatasetBundle clean = load_bundle((root / "bundle").string());
  if (clean.test_cameras.empty())
    throw ConfigError("eval: bundle has no test views");

  std::vector<double> psnr, ssim, aniso;
  nlohmann::ordered_json views = nlohmann::ordered_json::array();
  for (std::size_t v = 0; v < clean.test_cameras.size(); ++v) {
    ImageBuffer img = render(cloud, clean.test_cameras[v], cfg.background).image;
    double p = metric_psnr(img, clean.test_images[v]);
    double s = metric_ssim(img, clean.test_images[v]);
    double a = anisotropy_loss(img, cfg.spectral).value;
    psnr.push_back(p);
    ssim.push_back(s);
    aniso.push_back(a);
    views.push_back({{"view", v}, {"psnr", p}, {"ssim", s}, {"anisotropy", a}});
  }
  double fps = metric_fps(cloud, clean.test_cameras, 3);

  fs::path eval_dir = root / "eval";
  ensure_dir(eval_dir);
  nlohmann::ordered_json j;
  j["seed"] = args.seed;
  j["mode"] = train_mode_name(mode);
  j["gaussian_count"] = cloud.size();
  j["psnr"] = mean_of(psnr);
  j["ssim"] = mean_of(ssim);
  j["mean_anisotropy"] = mean_of(aniso);
  j["views"] = std::move(views);
  std::string stem = train_mode_name(mode);
  write_json_file(j, (eval_dir / (stem + ".json")).string());

  nlohmann::ordered_json timing;
  timing["seed"] = args.seed;
  timing["fps"] = fps;
  write_json_file(timing, (eval_dir / (stem + "_timing.json")).string());

  nlohmann::ordered_json payload;
  payload["psnr"] = mean_of(psnr);
  payload["ssim"] = mean_of(ssim);
  update_manifest(args, "eval", payload);

  std::printf("eval[%s]: PSNR %.2f dB, SSIM %.4f, anisotropy %.4f, FPS %.1f\n",
              stem.c_str(), mean_of(psnr), mean_of(ssim), mean_of(aniso), fps);
  return 0;
}

int cmd_spectrum(const HarnessArgs& args) {
  ConfigMap cm = load_config(args);
  std::string input = cm.get_string("spectrum.input_dir", "bundle");
  int rings = cm.get_int("spectrum.rings", 16);
  SpectralConfig scfg;
  scfg.gamma_min = cm.get_double("spectral.gamma_min", scfg.gamma_min);
  scfg.gamma_max = cm.get_double("spectral.gamma_max", scfg.gamma_max);
  scfg.bins = cm.get_int("spectral.bins", scfg.bins);
  scfg.min_radius = cm.get_double("spectral.min_radius", scfg.min_radius);

  fs::path root(args.out_dir);
  fs::path src = root / input;
  std::vector<ImageBuffer> images;
  if (fs::exists(src / "cameras.json")) {
    DatasetBundle bundle = load_bundle(src.string());
    images = std::move(bundle.train_images);
  } else if (fs::is_directory(src)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(src))
      if (entry.path().extension() == ".png") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const fs::path& f : files) images.push_back(load_png(f.string()));
  } else {
    throw IoError("spectrum: no bundle or PNG directory at " + src.string());
  }
  if (images.empty()) throw IoError("spectrum: no images under " + src.string());

  const int w = images[0].width, h = images[0].height;
  std::vector<double> mean_amp(std::size_t(w) * h, 0.0);
  std::vector<double> mean_energy(scfg.bins, 0.0);
  std::vector<double> mean_prob(scfg.bins, 0.0);
  std::vector<double> ring_centers;
  std::vector<double> mean_ring(rings, 0.0);
  std::vector<double> aniso;
  int hist_images = 0;
  for (const ImageBuffer& img : images) {
    if (img.width != w || img.height != h)
      throw ParseError("spectrum: images disagree on size", 0);
    Spectrum spec = dft2(img);
    std::vector<double> amp = normalize_amplitude(spec);
    for (std::size_t i = 0; i < amp.size(); ++i) mean_amp[i] += amp[i];
    BandMask mask = band_mask(amp, w, h, scfg);
    AngularHistogram hist = angular_histogram(spec, mask, scfg.bins);
    if (!hist.empty) {
      ++hist_images;
      for (int b = 0; b < scfg.bins; ++b) {
        mean_energy[b] += hist.energies[b];
        mean_prob[b] += hist.probabilities[b];
      }
    }
    auto profile = radial_energy_profile(spec, rings);
    if (ring_centers.empty())
      for (const auto& pr : profile) ring_centers.push_back(pr.first);
    for (int r = 0; r < rings; ++r) mean_ring[r] += profile[r].second;
    aniso.push_back(anisotropy_loss(img, scfg).value);
  }
  double inv_n = 1.0 / double(images.size());
  for (double& v : mean_amp) v *= inv_n;
  for (double& v : mean_ring) v *= inv_n;
  if (hist_images > 0)
    for (int b = 0; b < scfg.bins; ++b) {
      mean_energy[b] /= hist_images;
      mean_prob[b] /= hist_images;
    }

  std::string label = input;
  for (char& ch : label)
    if (ch == '/' || ch == '\\') ch = '_';
  fs::path out = root / "spectrum" / label;
  ensure_dir(out);

  ImageBuffer heat(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        heat.at(y, x, c) = mean_amp[std::size_t(y) * w + x];
  std::string seed_text = "seed=" + std::to_string(args.seed);
  save_png(heat, (out / "heatmap.png").string(), seed_text);

  std::string hist_csv = seed_header(args.seed);
  hist_csv += "bin,mean_energy,mean_probability\n";
  for (int b = 0; b < scfg.bins; ++b)
    hist_csv += std::to_string(b) + "," + format_double(mean_energy[b]) + "," +
                format_double(mean_prob[b]) + "\n";
  write_text_file(out / "angular_histogram.csv", hist_csv);

  std::string prof_csv = seed_header(args.seed);
  prof_csv += "ring,center_frequency,mean_energy\n";
  for (int r = 0; r < rings; ++r)
    prof_csv += std::to_string(r) + "," + format_double(ring_centers[r]) + "," +
                format_double(mean_ring[r]) + "\n";
  write_text_file(out / "radial_profile.csv", prof_csv);

  nlohmann::ordered_json j;
  j["seed"] = args.seed;
  j["input"] = input;
  j["images"] = images.size();
  j["mean_anisotropy"] = mean_of(aniso);
  write_json_file(j, (out / "summary.json").string());

  nlohmann::ordered_json payload;
  payload["input"] = input;
  payload["mean_anisotropy"] = mean_of(aniso);
  update_manifest(args, "spectrum", payload);

  std::printf("spectrum[%s]: %zu images, mean anisotropy %.4f -> %s\n",
              input.c_str(), images.size(), mean_of(aniso), out.string().c_str());
  return 0;
}

int cmd_report(const HarnessArgs& args) {
  ConfigMap cm = load_config(args);
  std::string mode_list = cm.get_string("report.modes", "clean,poisoned,defended");
  std::vector<std::string> modes;
  std::stringstream ss(mode_list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::string m = trim(item);
    if (!m.empty()) modes.push_back(m);
  }
  if (modes.empty()) throw ConfigError("report.modes: empty mode list");

  struct Row {
    std::string mode;
    uint64_t max_count = 0;
    uint64_t mem_bytes = 0;
    double wall_sec = 0, psnr = 0, ssim = 0, fps = 0, anisotropy = 0;
  };
  fs::path root(args.out_dir);
  std::vector<Row> rows;
  for (const std::string& m : modes) {
    train_mode_from_name(m);  // validate before touching the disk
    fs::path run = root / "runs" / m;
    fs::path eval_json = root / "eval" / (m + ".json");
    fs::path eval_timing = root / "eval" / (m + "_timing.json");
    for (const fs::path& p :
         {run / "report.json", run / "timing.json", eval_json, eval_timing})
      if (!fs::exists(p))
        throw IoError("report: missing artifact for mode '" + m + "': " + p.string());
    Row row;
    row.mode = m;
    nlohmann::ordered_json rj = load_json_file((run / "report.json").string());
    row.max_count = rj.at("max_gaussian_count").get<uint64_t>();
    row.mem_bytes = rj.at("peak_memory_proxy_bytes").get<uint64_t>();
    nlohmann::ordered_json tj = load_json_file((run / "timing.json").string());
    row.wall_sec = tj.at("wall_time_sec").get<double>();
    nlohmann::ordered_json ej = load_json_file(eval_json.string());
    row.psnr = ej.at("psnr").get<double>();
    row.ssim = ej.at("ssim").get<double>();
    row.anisotropy = ej.at("mean_anisotropy").get<double>();
    nlohmann::ordered_json etj = load_json_file(eval_timing.string());
    row.fps = etj.at("fps").get<double>();
    rows.push_back(row);
  }

  const Row* clean = nullptr;
  for (const Row& r : rows)
    if (r.mode == "clean") clean = &r;

  std::string csv = seed_header(args.seed);
  csv += "mode,max_gaussian_count,peak_memory_proxy_bytes,train_time_sec,psnr_db,"
         "ssim,fps,mean_anisotropy\n";
  for (const Row& r : rows)
    csv += r.mode + "," + std::to_string(r.max_count) + "," +
           std::to_string(r.mem_bytes) + "," + format_double(r.wall_sec) + "," +
           format_double(r.psnr) + "," + format_double(r.ssim) + "," +
           format_double(r.fps) + "," + format_double(r.anisotropy) + "\n";
  write_text_file(root / "results.csv", csv);

  std::string md;
  md += "# Results (seed " + std::to_string(args.seed) + ")\n\n";
  md += "Ratios are relative to the clean run; memory is the splat-count proxy.\n\n";
  md += "| Mode | Max Gaussians | Memory proxy (MB) | Train time (min) | PSNR (dB) "
        "| SSIM | FPS | Test anisotropy |\n";
  md += "|---|---|---|---|---|---|---|---|\n";
  for (const Row& r : rows) {
    double mb = double(r.mem_bytes) / (1024.0 * 1024.0);
    double minutes = r.wall_sec / 60.0;
    std::string count_cell = std::to_string(r.max_count);
    std::string mem_cell = format_fixed(mb, 2);
    std::string time_cell = format_fixed(minutes, 2);
    std::string fps_cell = format_fixed(r.fps, 1);
    if (clean && clean->max_count > 0) {
      count_cell += " (" + ratio_cell(double(r.max_count), double(clean->max_count)) + ")";
      mem_cell += " (" + ratio_cell(double(r.mem_bytes), double(clean->mem_bytes)) + ")";
      time_cell += " (" + ratio_cell(r.wall_sec, clean->wall_sec) + ")";
      fps_cell += " (" + ratio_cell(r.fps, clean->fps) + ")";
    }
    md += "| " + r.mode + " | " + count_cell + " | " + mem_cell + " | " + time_cell +
          " | " + format_fixed(r.psnr, 2) + " | " + format_fixed(r.ssim, 4) + " | " +
          fps_cell + " | " + format_fixed(r.anisotropy, 4) + " |\n";
  }
  write_text_file(root / "results.md", md);

  nlohmann::ordered_json payload;
  payload["modes"] = modes;
  update_manifest(args, "report", payload);

  std::printf("%s", md.c_str());
  std::printf("report: wrote %s and %s\n", (root / "results.csv").string().c_str(),
              (root / "results.md").string().c_str());
  return 0;
}

}  // namespace gsd
