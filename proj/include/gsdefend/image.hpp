#pragma once

// H x W x 3 double-precision image in [0,1] plus small helpers.

#include <cstddef>
#include <vector>

namespace gsd {

struct ImageBuffer {
  int width = 0;
  int height = 0;
  std::vector<double> pix;  // row-major, 3 channels interleaved (RGB)

  ImageBuffer() = default;
  ImageBuffer(int w, int h) : width(w), height(h), pix(std::size_t(w) * h * 3, 0.0) {}

  double& at(int y, int x, int c) { return pix[(std::size_t(y) * width + x) * 3 + c]; }
  double at(int y, int x, int c) const { return pix[(std::size_t(y) * width + x) * 3 + c]; }

  std::size_t n_values() const { return pix.size(); }
  bool same_size(const ImageBuffer& o) const { return width == o.width && height == o.height; }
};

// all channel values clamped into [0,1]
ImageBuffer clamp01(const ImageBuffer& img);

// max_{p,c} |a - b|; requires same size
double max_abs_diff(const ImageBuffer& a, const ImageBuffer& b);

bool all_finite(const ImageBuffer& img);

// Y = 0.299 R + 0.587 G + 0.114 B, row-major H*W
std::vector<double> luminance(const ImageBuffer& img);

inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;

}  // namespace gsd
