#pragma once

// Serialization: cloud binary format, dataset bundle directories, JSON helpers.

#include <json.hpp>
#include <string>

#include "gsdefend/scene.hpp"

namespace gsd {

// Cloud file: magic "GSPL", u16 version (=1), u64 count, then per splat
// 14 float64: position(3), log_scales(3), rotation quaternion wxyz(4),
// color(3), opacity_logit(1). All little-endian.
inline constexpr uint16_t kCloudFormatVersion = 1;

void save_cloud(const GaussianCloud& cloud, const std::string& path);
GaussianCloud load_cloud(const std::string& path);

// Bundle directory: view_%03d.png for every camera (train views first, then
// test views), cameras.json (array of {fx,fy,cx,cy,rotation,translation,
// width,height,split}), bundle_meta.json ({seed, descriptor}).
void save_bundle(const DatasetBundle& bundle, const std::string& dir);
DatasetBundle load_bundle(const std::string& dir);

nlohmann::ordered_json load_json_file(const std::string& path);
void write_json_file(const nlohmann::ordered_json& j, const std::string& path);

}  // namespace gsd
