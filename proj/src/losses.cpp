#include "gsdefend/losses.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "gsdefend/render.hpp"

namespace gsd {

namespace {

void require_same_size(const ImageBuffer& a, const ImageBuffer& b, const char* who) {
  if (!a.same_size(b))
    throw std::invalid_argument(std::string(who) + ": image dimensions differ");
}

double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

LossResult loss_l1(const ImageBuffer& a, const ImageBuffer& b) {
  require_same_size(a, b, "loss_l1");
  LossResult res;
  res.grad = ImageBuffer{a.width, a.height};
  double inv_n = 1.0 / double(a.n_values());
  double sum = 0.0;
  for (std::size_t i = 0; i < a.pix.size(); ++i) {
    double d = a.pix[i] - b.pix[i];
    sum += std::abs(d);
    res.grad.pix[i] = sign_of(d) * inv_n;
  }
  res.value = sum * inv_n;
  return res;
}

namespace {

constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

std::vector<double> ssim_window(int size) {
  std::vector<double> w(size);
  double sigma = 1.5, sum = 0.0, mid = (size - 1) / 2.0;
  for (int i = 0; i < size; ++i) {
    w[i] = std::exp(-0.5 * (i - mid) * (i - mid) / (sigma * sigma));
    sum += w[i];
  }
  for (double& v : w) v /= sum;
  return w;
}

int ssim_window_size(int h, int w) {
  int size = std::min({11, h, w});
  if (size % 2 == 0) --size;
  return size;
}

struct Plane {
  int h = 0, w = 0;
  std::vector<double> v;
  Plane() = default;
  Plane(int h_, int w_) : h(h_), w(w_), v(std::size_t(h_) * w_, 0.0) {}
  double& at(int y, int x) { return v[std::size_t(y) * w + x]; }
  double at(int y, int x) const { return v[std::size_t(y) * w + x]; }
};

Plane channel_plane(const ImageBuffer& img, int c) {
  Plane p(img.height, img.width);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) p.at(y, x) = img.at(y, x, c);
  return p;
}

// Valid-region separable cross-correlation: out is (h-k+1) x (w-k+1).
Plane conv_valid(const Plane& in, const std::vector<double>& win) {
  int k = int(win.size());
  Plane mid(in.h, in.w - k + 1);
  for (int y = 0; y < in.h; ++y)
    for (int x = 0; x < mid.w; ++x) {
      double s = 0.0;
      for (int i = 0; i < k; ++i) s += win[i] * in.at(y, x + i);
      mid.at(y, x) = s;
    }
  Plane out(in.h - k + 1, mid.w);
  for (int y = 0; y < out.h; ++y)
    for (int x = 0; x < out.w; ++x) {
      double s = 0.0;
      for (int i = 0; i < k; ++i) s += win[i] * mid.at(y + i, x);
      out.at(y, x) = s;
    }
  return out;
}

// Adjoint of conv_valid: scatters map values back onto an h x w plane.
Plane conv_scatter(const Plane& map, int h, int w, const std::vector<double>& win) {
  int k = int(win.size());
  Plane mid(h, map.w);
  for (int y = 0; y < map.h; ++y)
    for (int x = 0; x < map.w; ++x) {
      double m = map.at(y, x);
      if (m == 0.0) continue;
      for (int i = 0; i < k; ++i) mid.at(y + i, x) += win[i] * m;
    }
  Plane out(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < map.w; ++x) {
      double m = mid.at(y, x);
      if (m == 0.0) continue;
      for (int i = 0; i < k; ++i) out.at(y, x + i) += win[i] * m;
    }
  return out;
}

// SSIM mean over channels; when grad != nullptr also d(mean)/d(a).
double ssim_mean(const ImageBuffer& a, const ImageBuffer& b, ImageBuffer* grad) {
  int k = ssim_window_size(a.height, a.width);
  if (k < 1) throw std::invalid_argument("ssim: image too small");
  auto win = ssim_window(k);
  int mh = a.height - k + 1, mw = a.width - k + 1;
  double total = 0.0;
  double map_weight = 1.0 / (3.0 * mh * mw);

  for (int c = 0; c < 3; ++c) {
    Plane X = channel_plane(a, c), Y = channel_plane(b, c);
    Plane X2(a.height, a.width), Y2(a.height, a.width), XY(a.height, a.width);
    for (std::size_t i = 0; i < X.v.size(); ++i) {
      X2.v[i] = X.v[i] * X.v[i];
      Y2.v[i] = Y.v[i] * Y.v[i];
      XY.v[i] = X.v[i] * Y.v[i];
    }
    Plane mx = conv_valid(X, win), my = conv_valid(Y, win);
    Plane m2x = conv_valid(X2, win), m2y = conv_valid(Y2, win);
    Plane mxy = conv_valid(XY, win);

    Plane dmx(mh, mw), dm2x(mh, mw), dmxy(mh, mw);
    for (int y = 0; y < mh; ++y)
      for (int x = 0; x < mw; ++x) {
        double ux = mx.at(y, x), uy = my.at(y, x);
        double sx2 = m2x.at(y, x) - ux * ux;
        double sy2 = m2y.at(y, x) - uy * uy;
        double sxy = mxy.at(y, x) - ux * uy;
        double A1 = 2.0 * ux * uy + kC1, A2 = 2.0 * sxy + kC2;
        double B1 = ux * ux + uy * uy + kC1, B2 = sx2 + sy2 + kC2;
        double S = (A1 * A2) / (B1 * B2);
        total += S;
        if (!grad) continue;
        double dS_dux = 2.0 * uy * A2 / (B1 * B2) - S * 2.0 * ux / B1;
        double dS_dsx2 = -S / B2;
        double dS_dsxy = 2.0 * A1 / (B1 * B2);
        dmx.at(y, x) = map_weight * (dS_dux - 2.0 * ux * dS_dsx2 - uy * dS_dsxy);
        dm2x.at(y, x) = map_weight * dS_dsx2;
        dmxy.at(y, x) = map_weight * dS_dsxy;
      }

    if (grad) {
      Plane g1 = conv_scatter(dmx, a.height, a.width, win);
      Plane g2 = conv_scatter(dm2x, a.height, a.width, win);
      Plane g3 = conv_scatter(dmxy, a.height, a.width, win);
      for (int y = 0; y < a.height; ++y)
        for (int x = 0; x < a.width; ++x)
          grad->at(y, x, c) = g1.at(y, x) + 2.0 * X.at(y, x) * g2.at(y, x) +
                              Y.at(y, x) * g3.at(y, x);
    }
  }
  return total * map_weight;
}

}  // namespace

LossResult loss_dssim(const ImageBuffer& a, const ImageBuffer& b) {
  require_same_size(a, b, "loss_dssim");
  LossResult res;
  res.grad = ImageBuffer{a.width, a.height};
  double s = ssim_mean(a, b, &res.grad);
  res.value = 0.5 * (1.0 - s);
  for (double& v : res.grad.pix) v *= -0.5;
  return res;
}

LossResult loss_tv(const ImageBuffer& img) {
  if (img.width < 2 || img.height < 2)
    throw std::invalid_argument("loss_tv: image must be at least 2x2");
  LossResult res;
  res.grad = ImageBuffer{img.width, img.height};
  double inv_n = 1.0 / double(img.n_values());
  double sum = 0.0;
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) {
        if (x + 1 < img.width) {
          double d = img.at(y, x + 1, c) - img.at(y, x, c);
          sum += std::abs(d);
          double s = sign_of(d) * inv_n;
          res.grad.at(y, x + 1, c) += s;
          res.grad.at(y, x, c) -= s;
        }
        if (y + 1 < img.height) {
          double d = img.at(y + 1, x, c) - img.at(y, x, c);
          sum += std::abs(d);
          double s = sign_of(d) * inv_n;
          res.grad.at(y + 1, x, c) += s;
          res.grad.at(y, x, c) -= s;
        }
      }
  res.value = sum * inv_n;
  return res;
}

double metric_psnr(const ImageBuffer& a, const ImageBuffer& b) {
  require_same_size(a, b, "metric_psnr");
  double mse = 0.0;
  for (std::size_t i = 0; i < a.pix.size(); ++i) {
    double d = a.pix[i] - b.pix[i];
    mse += d * d;
  }
  mse /= double(a.n_values());
  if (mse < 1e-10) return 99.0;
  return std::min(99.0, 10.0 * std::log10(1.0 / mse));
}

double metric_ssim(const ImageBuffer& a, const ImageBuffer& b) {
  require_same_size(a, b, "metric_ssim");
  return ssim_mean(a, b, nullptr);
}

double metric_fps(const GaussianCloud& cloud, const std::vector<Camera>& cameras,
                  int repeats) {
  if (repeats < 3) throw std::invalid_argument("metric_fps: repeats must be >= 3");
  if (cameras.empty()) throw std::invalid_argument("metric_fps: no cameras");
  double fps[3];
  for (int run = 0; run < 3; ++run) {
    auto t0 = std::chrono::steady_clock::now();
    for (int rep = 0; rep < repeats; ++rep)
      for (const Camera& cam : cameras) render(cloud, cam);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    fps[run] = double(repeats) * double(cameras.size()) / std::max(secs, 1e-12);
  }
  std::sort(fps, fps + 3);
  return fps[1];
}

}  // namespace gsd
