#pragma once

// Experiment orchestration behind the CLI: one directory per experiment with
// a manifest, bundles, per-mode training runs, evaluations, spectral
// diagnostics, and the final comparison table.

#include <cstdint>
#include <map>
#include <set>
#include <string>

#include "gsdefend/attack.hpp"
#include "gsdefend/trainer.hpp"

namespace gsd {

// Parsed "key = value" config file. '#' starts a comment; blank lines are
// skipped; keys are validated against the full registry of supported settings
// at load time, so a typo fails before any work starts.
class ConfigMap {
 public:
  ConfigMap() = default;
  static ConfigMap from_file(const std::string& path);  // IoError / ConfigError

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  long get_long(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

 private:
  std::map<std::string, std::string> values_;
};

struct HarnessArgs {
  std::string out_dir = ".";
  std::string config_path;  // empty = defaults
  uint64_t seed = 1;
  std::string mode;  // train/eval: clean|poisoned|defended|baseline_ut|baseline_score
};

// Scene sampling parameters read from the config ("scene.*" keys).
struct SceneSpec {
  int n_splats = 200;
  int n_cameras = 16;
  int image_size = 64;
};

// Desk-scale training recipe for one mode: struct defaults plus the pinned
// calibration for the synthetic benchmark scene.
TrainConfig config_for_mode(TrainMode mode);

// Assembles the effective config for a command: config_for_mode under
// "train.*" / "freq_filter.*" / "spectral.*" overrides from the file.
TrainConfig train_config_from(const ConfigMap& cfg, TrainMode mode);
AttackConfig attack_config_from(const ConfigMap& cfg);
SceneSpec scene_spec_from(const ConfigMap& cfg);

// Commands. Each returns 0 on success and throws on failure; main translates
// exceptions into exit codes. All artifacts land under args.out_dir.
int cmd_gen(const HarnessArgs& args);
int cmd_poison(const HarnessArgs& args);
int cmd_train(const HarnessArgs& args);
int cmd_eval(const HarnessArgs& args);
int cmd_spectrum(const HarnessArgs& args);
int cmd_report(const HarnessArgs& args);

// Shortest round-trip decimal text for doubles; used for CSV cells so files
// are bit-stable across runs.
std::string format_double(double v);

}  // namespace gsd
