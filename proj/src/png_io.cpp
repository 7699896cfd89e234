#include "gsdefend/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <vector>

#include "gsdefend/common.hpp"

namespace gsd {

namespace {

struct FileCloser {
  std::FILE* fp = nullptr;
  ~FileCloser() {
    if (fp) std::fclose(fp);
  }
};

}  // namespace

ImageBuffer load_png(const std::string& path) {
  FileCloser file;
  file.fp = std::fopen(path.c_str(), "rb");
  if (!file.fp) throw IoError("cannot open PNG for reading: " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("libpng init failed");
  }

  std::vector<png_byte> data;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ParseError("corrupt PNG: " + path, 0);
  }

  png_init_io(png, file.fp);
  png_read_info(png, info);

  png_uint_32 w = png_get_image_width(png, info);
  png_uint_32 h = png_get_image_height(png, info);
  int bit_depth = png_get_bit_depth(png, info);
  int color_type = png_get_color_type(png, info);

  // normalize everything to 8-bit RGB
  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
    png_set_gray_to_rgb(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  std::size_t stride = png_get_rowbytes(png, info);
  data.resize(stride * h);
  rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = data.data() + y * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  ImageBuffer img{int(w), int(h)};
  for (png_uint_32 y = 0; y < h; ++y) {
    const png_byte* row = data.data() + y * stride;
    for (png_uint_32 x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) img.at(int(y), int(x), c) = row[x * 3 + c] / 255.0;
  }
  return img;
}

void save_png(const ImageBuffer& img, const std::string& path, const std::string& seed_text) {
  if (img.width <= 0 || img.height <= 0)
    throw std::invalid_argument("save_png: empty image");

  FileCloser file;
  file.fp = std::fopen(path.c_str(), "wb");
  if (!file.fp) throw IoError("cannot open PNG for writing: " + path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_write_struct(&png, &info);
    throw std::runtime_error("libpng init failed");
  }

  std::vector<png_byte> data(std::size_t(img.width) * img.height * 3);
  std::vector<png_bytep> rows(img.height);
  for (int y = 0; y < img.height; ++y) {
    png_byte* row = data.data() + std::size_t(y) * img.width * 3;
    rows[y] = row;
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c) {
        double v = img.at(y, x, c);
        v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
        row[x * 3 + c] = png_byte(std::lround(v * 255.0));
      }
  }

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG write failed: " + path);
  }

  png_init_io(png, file.fp);
  png_set_IHDR(png, info, png_uint_32(img.width), png_uint_32(img.height), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_text text;
  if (!seed_text.empty()) {
    text.compression = PNG_TEXT_COMPRESSION_NONE;
    text.key = const_cast<char*>("seed");
    text.text = const_cast<char*>(seed_text.c_str());
    text.text_length = seed_text.size();
    png_set_text(png, info, &text, 1);
  }
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace gsd
