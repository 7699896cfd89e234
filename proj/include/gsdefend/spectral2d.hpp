#pragma once

// 2D spectral analysis of rendered images: centered DFT, band-pass selection
// on normalized log-amplitude, angular energy histograms, and the
// differentiable anisotropy regularizer built on their entropy.

#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include "gsdefend/image.hpp"
#include "gsdefend/losses.hpp"

namespace gsd {

struct Spectrum {
  int width = 0, height = 0;
  // row-major grids with the zero-frequency bin at (center_y, center_x)
  std::vector<std::complex<double>> coeffs;
  std::vector<double> amplitude;
  std::vector<double> phase;

  int center_x() const { return width / 2; }
  int center_y() const { return height / 2; }
  std::complex<double> at(int r, int c) const {
    return coeffs[std::size_t(r) * width + c];
  }
};

// Below this total band energy a histogram is considered empty and the
// regularizer goes silent instead of amplifying noise.
inline constexpr double kEnergyFloor = 1e-12;

struct SpectralConfig {
  double gamma_min = 0.3;
  double gamma_max = 0.9;
  int bins = 36;
  double energy_floor = kEnergyFloor;
  double min_radius = 0.0;  // optional radial cutoff on top of the amplitude band
};

struct BandMask {
  int width = 0, height = 0;
  double gamma_min = 0.0, gamma_max = 0.0;
  std::vector<uint8_t> mask;
  std::size_t count() const;
};

struct AngularHistogram {
  std::vector<double> energies;        // E_b, one per angular bin
  std::vector<double> probabilities;   // P_b = E_b / sum, zeros when empty
  bool empty = true;                   // total energy below the floor
};

// Unnormalized forward DFT of the luminance channel, centered.
Spectrum dft2(const ImageBuffer& img);

// log(1+|coeff|) scaled by its maximum over non-DC bins; DC pinned to 0.
std::vector<double> normalize_amplitude(const Spectrum& spec);

BandMask band_mask(const std::vector<double>& norm_amp, int width, int height,
                   const SpectralConfig& config);

// Angular bin of a centered grid cell; exposed for the diagnostics CSV.
int angular_bin(int row, int col, int center_y, int center_x, int bins);

AngularHistogram angular_histogram(const Spectrum& spec, const BandMask& mask,
                                   int bins);

// Normalized-entropy concentration score of an angular histogram:
// 1 - H/log(bins) clamped to [0,1]; empty histograms score 0. This is the
// scalar stage of anisotropy_loss, split out so crafted histograms can be
// scored directly.
double anisotropy_from_histogram(const AngularHistogram& hist, int bins);

// 1 - H/log(B) of the angular energy distribution; gradient w.r.t. the RGB
// pixels with the mask and bin assignment treated as constants.
LossResult anisotropy_loss(const ImageBuffer& img, const SpectralConfig& config);

// Mean anisotropy loss over views.
double freq_regularizer(const std::vector<ImageBuffer>& renders,
                        const SpectralConfig& config);

// (ring center radius, mean |coeff|^2) over equal-width annuli up to Nyquist,
// DC excluded.
std::vector<std::pair<double, double>> radial_energy_profile(const Spectrum& spec,
                                                             int n_rings);

}  // namespace gsd
