#include "gsdefend/io.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "gsdefend/common.hpp"
#include "gsdefend/png_io.hpp"

static_assert(std::endian::native == std::endian::little,
              "cloud serialization assumes a little-endian host");

namespace fs = std::filesystem;

namespace gsd {

namespace {

constexpr char kMagic[4] = {'G', 'S', 'P', 'L'};
constexpr std::size_t kFloatsPerSplat = 14;

void pack_splat(const GaussianSplat& s, double* out) {
  out[0] = s.position[0];
  out[1] = s.position[1];
  out[2] = s.position[2];
  out[3] = s.log_scales[0];
  out[4] = s.log_scales[1];
  out[5] = s.log_scales[2];
  out[6] = s.rotation[0];
  out[7] = s.rotation[1];
  out[8] = s.rotation[2];
  out[9] = s.rotation[3];
  out[10] = s.color[0];
  out[11] = s.color[1];
  out[12] = s.color[2];
  out[13] = s.opacity_logit;
}

GaussianSplat unpack_splat(const double* in) {
  GaussianSplat s;
  s.position << in[0], in[1], in[2];
  s.log_scales << in[3], in[4], in[5];
  s.rotation << in[6], in[7], in[8], in[9];
  s.color << in[10], in[11], in[12];
  s.opacity_logit = in[13];
  return s;
}

std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

}  // namespace

void save_cloud(const GaussianCloud& cloud, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open file for writing: " + path);
  out.write(kMagic, 4);
  uint16_t version = kCloudFormatVersion;
  out.write(reinterpret_cast<const char*>(&version), sizeof version);
  uint64_t count = cloud.size();
  out.write(reinterpret_cast<const char*>(&count), sizeof count);
  double rec[kFloatsPerSplat];
  for (const auto& s : cloud.splats) {
    pack_splat(s, rec);
    out.write(reinterpret_cast<const char*>(rec), sizeof rec);
  }
  if (!out) throw IoError("short write: " + path);
}

GaussianCloud load_cloud(const std::string& path) {
  std::string bytes = read_file_bytes(path);
  std::size_t off = 0;
  auto need = [&](std::size_t n, const char* what) {
    if (bytes.size() - off < n)
      throw ParseError(std::string("truncated cloud file, expected ") + what, off);
  };

  need(4, "magic");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw ParseError("bad magic, not a cloud file", 0);
  off = 4;

  need(2, "version");
  uint16_t version;
  std::memcpy(&version, bytes.data() + off, 2);
  if (version != kCloudFormatVersion)
    throw UnsupportedVersion("cloud file version " + std::to_string(version) +
                             " not supported (expected " +
                             std::to_string(kCloudFormatVersion) + ")");
  off += 2;

  need(8, "count");
  uint64_t count;
  std::memcpy(&count, bytes.data() + off, 8);
  off += 8;

  constexpr std::size_t rec_size = kFloatsPerSplat * sizeof(double);
  if (count > (bytes.size() - off) / rec_size)
    throw ParseError("truncated cloud file, expected " + std::to_string(count) + " splats",
                     off);

  GaussianCloud cloud;
  cloud.splats.reserve(count);
  double rec[kFloatsPerSplat];
  for (uint64_t i = 0; i < count; ++i) {
    std::memcpy(rec, bytes.data() + off, rec_size);
    off += rec_size;
    cloud.push(unpack_splat(rec));
  }
  return cloud;
}

namespace {

nlohmann::ordered_json camera_to_json(const Camera& cam, const char* split) {
  nlohmann::ordered_json j;
  j["fx"] = cam.fx;
  j["fy"] = cam.fy;
  j["cx"] = cam.cx;
  j["cy"] = cam.cy;
  auto rot = nlohmann::ordered_json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) rot.push_back(cam.rotation(r, c));
  j["rotation"] = rot;
  j["translation"] = {cam.translation[0], cam.translation[1], cam.translation[2]};
  j["width"] = cam.width;
  j["height"] = cam.height;
  j["split"] = split;
  return j;
}

Camera camera_from_json(const nlohmann::ordered_json& j, std::size_t index) {
  auto fail = [&](const std::string& msg) -> ParseError {
    return ParseError("cameras.json entry " + std::to_string(index) + ": " + msg, 0);
  };
  for (const char* key :
       {"fx", "fy", "cx", "cy", "rotation", "translation", "width", "height", "split"})
    if (!j.contains(key)) throw fail(std::string("missing key '") + key + "'");

  Camera cam;
  try {
    cam.fx = j.at("fx").get<double>();
    cam.fy = j.at("fy").get<double>();
    cam.cx = j.at("cx").get<double>();
    cam.cy = j.at("cy").get<double>();
    const auto& rot = j.at("rotation");
    if (!rot.is_array() || rot.size() != 9) throw fail("rotation must be 9 floats");
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) cam.rotation(r, c) = rot.at(r * 3 + c).get<double>();
    const auto& tr = j.at("translation");
    if (!tr.is_array() || tr.size() != 3) throw fail("translation must be 3 floats");
    for (int k = 0; k < 3; ++k) cam.translation[k] = tr.at(k).get<double>();
    cam.width = j.at("width").get<int>();
    cam.height = j.at("height").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw fail(e.what());
  }
  if (cam.width <= 0 || cam.height <= 0) throw fail("non-positive image dimensions");
  Eigen::Matrix3d should_be_identity = cam.rotation * cam.rotation.transpose();
  if ((should_be_identity - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-9)
    throw fail("rotation is not orthonormal");
  return cam;
}

}  // namespace

void save_bundle(const DatasetBundle& bundle, const std::string& dir) {
  if (bundle.train_cameras.size() != bundle.train_images.size() ||
      bundle.test_cameras.size() != bundle.test_images.size())
    throw std::invalid_argument("save_bundle: camera/image count mismatch");
  fs::create_directories(dir);

  auto cams = nlohmann::ordered_json::array();
  std::string seed_text = std::to_string(bundle.seed);
  int view = 0;
  auto write_view = [&](const Camera& cam, const ImageBuffer& img, const char* split) {
    cams.push_back(camera_to_json(cam, split));
    char name[32];
    std::snprintf(name, sizeof name, "view_%03d.png", view++);
    save_png(img, (fs::path(dir) / name).string(), seed_text);
  };
  for (std::size_t i = 0; i < bundle.train_cameras.size(); ++i)
    write_view(bundle.train_cameras[i], bundle.train_images[i], "train");
  for (std::size_t i = 0; i < bundle.test_cameras.size(); ++i)
    write_view(bundle.test_cameras[i], bundle.test_images[i], "test");

  write_json_file(cams, (fs::path(dir) / "cameras.json").string());
  nlohmann::ordered_json meta;
  meta["seed"] = bundle.seed;
  meta["descriptor"] = bundle.descriptor;
  write_json_file(meta, (fs::path(dir) / "bundle_meta.json").string());
}

DatasetBundle load_bundle(const std::string& dir) {
  if (!fs::is_directory(dir)) throw IoError("bundle directory not found: " + dir);
  auto cams_json = load_json_file((fs::path(dir) / "cameras.json").string());
  if (!cams_json.is_array()) throw ParseError("cameras.json: expected an array", 0);

  DatasetBundle bundle;
  int w = -1, h = -1;
  for (std::size_t i = 0; i < cams_json.size(); ++i) {
    Camera cam = camera_from_json(cams_json.at(i), i);
    std::string split = cams_json.at(i).at("split").get<std::string>();
    if (split != "train" && split != "test")
      throw ParseError("cameras.json entry " + std::to_string(i) + ": bad split '" +
                           split + "'",
                       0);
    char name[32];
    std::snprintf(name, sizeof name, "view_%03zu.png", i);
    ImageBuffer img = load_png((fs::path(dir) / name).string());
    if (img.width != cam.width || img.height != cam.height)
      throw ParseError("view " + std::to_string(i) + ": PNG size does not match camera",
                       0);
    if (w < 0) {
      w = img.width;
      h = img.height;
    } else if (img.width != w || img.height != h) {
      throw ParseError("bundle images have mixed dimensions", 0);
    }
    if (split == "train") {
      bundle.train_cameras.push_back(cam);
      bundle.train_images.push_back(std::move(img));
    } else {
      bundle.test_cameras.push_back(cam);
      bundle.test_images.push_back(std::move(img));
    }
  }

  fs::path meta_path = fs::path(dir) / "bundle_meta.json";
  if (fs::exists(meta_path)) {
    auto meta = load_json_file(meta_path.string());
    if (meta.contains("seed")) bundle.seed = meta.at("seed").get<uint64_t>();
    if (meta.contains("descriptor")) bundle.descriptor = meta.at("descriptor").get<std::string>();
  }
  return bundle;
}

nlohmann::ordered_json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path);
  try {
    return nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("JSON parse failure in ") + path + ": " + e.what(),
                     e.byte);
  }
}

void write_json_file(const nlohmann::ordered_json& j, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open file for writing: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("short write: " + path);
}

}  // namespace gsd
