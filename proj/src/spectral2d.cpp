#include "gsdefend/spectral2d.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "gsdefend/common.hpp"

namespace gsd {

namespace {

void validate_config(const SpectralConfig& cfg, const char* who) {
  if (!(cfg.gamma_min >= 0.0 && cfg.gamma_min < cfg.gamma_max && cfg.gamma_max <= 1.0))
    throw std::invalid_argument(std::string(who) + ": need 0 <= gamma_min < gamma_max <= 1");
  if (cfg.bins < 2) throw std::invalid_argument(std::string(who) + ": bins must be >= 2");
  if (cfg.min_radius < 0.0)
    throw std::invalid_argument(std::string(who) + ": min_radius must be >= 0");
}

const std::vector<std::complex<double>>& twiddles(int n) {
  thread_local std::unordered_map<int, std::vector<std::complex<double>>> cache;
  auto& t = cache[n];
  if (t.empty()) {
    t.resize(n);
    for (int m = 0; m < n; ++m) {
      double a = -kTwoPi * double(m) / double(n);
      t[m] = {std::cos(a), std::sin(a)};
    }
  }
  return t;
}

// Unnormalized length-n DFT along a strided slice; inverse flips the kernel
// sign (still unnormalized).
void dft_1d(const std::complex<double>* src, std::size_t src_stride, int n,
            std::complex<double>* dst, std::size_t dst_stride, bool inverse) {
  const auto& tw = twiddles(n);
  for (int k = 0; k < n; ++k) {
    std::complex<double> acc(0.0, 0.0);
    int idx = 0;  // (k*j) mod n, accumulated to avoid overflow
    for (int j = 0; j < n; ++j) {
      std::complex<double> w = tw[idx];
      if (inverse) w = std::conj(w);
      acc += src[std::size_t(j) * src_stride] * w;
      idx += k;
      if (idx >= n) idx -= n;
    }
    dst[std::size_t(k) * dst_stride] = acc;
  }
}

// 2D transform in natural (uncentered) layout.
std::vector<std::complex<double>> dft_2d_raw(std::vector<std::complex<double>> buf,
                                             int width, int height, bool inverse) {
  std::vector<std::complex<double>> tmp(buf.size());
  for (int y = 0; y < height; ++y)
    dft_1d(buf.data() + std::size_t(y) * width, 1, width,
           tmp.data() + std::size_t(y) * width, 1, inverse);
  for (int x = 0; x < width; ++x)
    dft_1d(tmp.data() + x, width, height, buf.data() + x, width, inverse);
  return buf;
}

}  // namespace

Spectrum dft2(const ImageBuffer& img) {
  int W = img.width, H = img.height;
  std::vector<double> Y = luminance(img);
  std::vector<std::complex<double>> buf(Y.size());
  for (std::size_t i = 0; i < Y.size(); ++i) buf[i] = {Y[i], 0.0};
  std::vector<std::complex<double>> raw = dft_2d_raw(std::move(buf), W, H, false);

  Spectrum spec;
  spec.width = W;
  spec.height = H;
  spec.coeffs.resize(raw.size());
  spec.amplitude.resize(raw.size());
  spec.phase.resize(raw.size());
  int cy = spec.center_y(), cx = spec.center_x();
  for (int r = 0; r < H; ++r) {
    int gr = (r - cy + H) % H;
    for (int c = 0; c < W; ++c) {
      int gc = (c - cx + W) % W;
      std::complex<double> v = raw[std::size_t(gr) * W + gc];
      std::size_t i = std::size_t(r) * W + c;
      spec.coeffs[i] = v;
      spec.amplitude[i] = std::abs(v);
      spec.phase[i] = std::arg(v);
    }
  }
  return spec;
}

std::vector<double> normalize_amplitude(const Spectrum& spec) {
  std::size_t n = spec.amplitude.size();
  std::vector<double> out(n, 0.0);
  std::size_t dc = std::size_t(spec.center_y()) * spec.width + spec.center_x();
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (i != dc) peak = std::max(peak, std::log1p(spec.amplitude[i]));
  if (peak <= 0.0) return out;  // constant or empty image: nothing but DC
  for (std::size_t i = 0; i < n; ++i)
    if (i != dc) out[i] = std::log1p(spec.amplitude[i]) / peak;
  return out;
}

BandMask band_mask(const std::vector<double>& norm_amp, int width, int height,
                   const SpectralConfig& config) {
  validate_config(config, "band_mask");
  if (norm_amp.size() != std::size_t(width) * height)
    throw std::invalid_argument("band_mask: grid size mismatch");
  BandMask bm;
  bm.width = width;
  bm.height = height;
  bm.gamma_min = config.gamma_min;
  bm.gamma_max = config.gamma_max;
  bm.mask.assign(norm_amp.size(), 0);
  int cy = height / 2, cx = width / 2;
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) {
      if (r == cy && c == cx) continue;  // DC never selected
      if (config.min_radius > 0.0) {
        double rad = std::hypot(double(r - cy), double(c - cx));
        if (rad < config.min_radius) continue;
      }
      double a = norm_amp[std::size_t(r) * width + c];
      if (a >= config.gamma_min && a <= config.gamma_max)
        bm.mask[std::size_t(r) * width + c] = 1;
    }
  return bm;
}

std::size_t BandMask::count() const {
  std::size_t n = 0;
  for (uint8_t m : mask) n += m;
  return n;
}

int angular_bin(int row, int col, int center_y, int center_x, int bins) {
  // fraction of a full turn in [0,1); the division keeps axis-aligned
  // frequencies (0/90/180/270 degrees) exactly on their bin boundaries
  double frac = std::atan2(double(row - center_y), double(col - center_x)) / kTwoPi;
  frac -= std::floor(frac);
  return std::min(bins - 1, int(frac * bins));
}

AngularHistogram angular_histogram(const Spectrum& spec, const BandMask& mask,
                                   int bins) {
  if (bins < 2) throw std::invalid_argument("angular_histogram: bins must be >= 2");
  if (mask.width != spec.width || mask.height != spec.height)
    throw std::invalid_argument("angular_histogram: mask/spectrum size mismatch");
  AngularHistogram hist;
  hist.energies.assign(bins, 0.0);
  hist.probabilities.assign(bins, 0.0);
  int cy = spec.center_y(), cx = spec.center_x();
  double total = 0.0;
  for (int r = 0; r < spec.height; ++r)
    for (int c = 0; c < spec.width; ++c) {
      std::size_t i = std::size_t(r) * spec.width + c;
      if (!mask.mask[i]) continue;
      double e = std::norm(spec.coeffs[i]);
      hist.energies[angular_bin(r, c, cy, cx, bins)] += e;
      total += e;
    }
  if (total < kEnergyFloor) return hist;  // flagged empty
  hist.empty = false;
  for (int b = 0; b < bins; ++b) hist.probabilities[b] = hist.energies[b] / total;
  return hist;
}

namespace {

double histogram_entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

}  // namespace

double anisotropy_from_histogram(const AngularHistogram& hist, int bins) {
  if (bins < 2)
    throw std::invalid_argument("anisotropy_from_histogram: bins must be >= 2");
  if (hist.empty) return 0.0;
  double h = histogram_entropy(hist.probabilities);
  return std::min(1.0, std::max(0.0, 1.0 - h / std::log(double(bins))));
}

LossResult anisotropy_loss(const ImageBuffer& img, const SpectralConfig& config) {
  validate_config(config, "anisotropy_loss");
  LossResult res;
  res.grad = ImageBuffer{img.width, img.height};

  Spectrum spec = dft2(img);
  std::vector<double> amp = normalize_amplitude(spec);
  BandMask bm = band_mask(amp, spec.width, spec.height, config);
  AngularHistogram hist = angular_histogram(spec, bm, config.bins);

  double total = 0.0;
  for (double e : hist.energies) total += e;
  if (hist.empty || total < config.energy_floor) return res;  // loss 0, grad 0

  double log_b = std::log(double(config.bins));
  double entropy = histogram_entropy(hist.probabilities);
  res.value = std::min(1.0, std::max(0.0, 1.0 - entropy / log_b));

  // Backward through E_b = sum of masked |coeff|^2 only; mask and bin
  // assignment are selection constants.
  std::vector<double> f(config.bins, 0.0);
  for (int b = 0; b < config.bins; ++b)
    if (hist.energies[b] > 0.0)
      f[b] = (std::log(hist.probabilities[b]) + entropy) / (total * log_b);

  int W = spec.width, H = spec.height;
  int cy = spec.center_y(), cx = spec.center_x();
  std::vector<std::complex<double>> D(std::size_t(W) * H, {0.0, 0.0});
  for (int r = 0; r < H; ++r)
    for (int c = 0; c < W; ++c) {
      std::size_t i = std::size_t(r) * W + c;
      if (!bm.mask[i]) continue;
      int b = angular_bin(r, c, cy, cx, config.bins);
      if (f[b] == 0.0) continue;
      // un-center on the fly
      int gr = (r - cy + H) % H, gc = (c - cx + W) % W;
      D[std::size_t(gr) * W + gc] = 2.0 * f[b] * spec.coeffs[i];
    }
  std::vector<std::complex<double>> back = dft_2d_raw(std::move(D), W, H, true);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      double dY = back[std::size_t(y) * W + x].real();
      res.grad.at(y, x, 0) = kLumaR * dY;
      res.grad.at(y, x, 1) = kLumaG * dY;
      res.grad.at(y, x, 2) = kLumaB * dY;
    }
  return res;
}

double freq_regularizer(const std::vector<ImageBuffer>& renders,
                        const SpectralConfig& config) {
  if (renders.empty()) throw std::invalid_argument("freq_regularizer: no views");
  double sum = 0.0;
  for (const ImageBuffer& img : renders) sum += anisotropy_loss(img, config).value;
  return sum / double(renders.size());
}

std::vector<std::pair<double, double>> radial_energy_profile(const Spectrum& spec,
                                                             int n_rings) {
  if (n_rings < 2) throw std::invalid_argument("radial_energy_profile: n_rings must be >= 2");
  double nyquist = std::min(spec.width, spec.height) / 2.0;
  double ring_width = nyquist / n_rings;
  std::vector<double> sums(n_rings, 0.0);
  std::vector<std::size_t> counts(n_rings, 0);
  int cy = spec.center_y(), cx = spec.center_x();
  for (int r = 0; r < spec.height; ++r)
    for (int c = 0; c < spec.width; ++c) {
      if (r == cy && c == cx) continue;
      double rad = std::hypot(double(r - cy), double(c - cx));
      if (rad > nyquist + 1e-9) continue;
      int ring = std::min(n_rings - 1, int(rad / ring_width));
      sums[ring] += std::norm(spec.at(r, c));
      ++counts[ring];
    }
  std::vector<std::pair<double, double>> profile;
  profile.reserve(n_rings);
  for (int k = 0; k < n_rings; ++k)
    profile.emplace_back((k + 0.5) * ring_width,
                         counts[k] ? sums[k] / double(counts[k]) : 0.0);
  return profile;
}

}  // namespace gsd
