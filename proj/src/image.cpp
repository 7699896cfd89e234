#include "gsdefend/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gsd {

ImageBuffer clamp01(const ImageBuffer& img) {
  ImageBuffer out = img;
  for (double& v : out.pix) v = std::clamp(v, 0.0, 1.0);
  return out;
}

double max_abs_diff(const ImageBuffer& a, const ImageBuffer& b) {
  if (!a.same_size(b)) throw std::invalid_argument("max_abs_diff: size mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.pix.size(); ++i) m = std::max(m, std::fabs(a.pix[i] - b.pix[i]));
  return m;
}

bool all_finite(const ImageBuffer& img) {
  for (double v : img.pix)
    if (!std::isfinite(v)) return false;
  return true;
}

std::vector<double> luminance(const ImageBuffer& img) {
  std::vector<double> y(std::size_t(img.width) * img.height);
  const double* p = img.pix.data();
  for (std::size_t i = 0; i < y.size(); ++i, p += 3)
    y[i] = kLumaR * p[0] + kLumaG * p[1] + kLumaB * p[2];
  return y;
}

}  // namespace gsd
