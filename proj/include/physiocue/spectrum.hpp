#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "physiocue/series.hpp"

namespace physiocue {

// Heart-rate search band, 40 to 180 bpm.
inline constexpr double kHrMinHz = 2.0 / 3.0;
inline constexpr double kHrMaxHz = 3.0;

// Coarsest allowed FFT bin spacing: 0.25 bpm.
inline constexpr double kMaxBinSpacingHz = 1.0 / 240.0;

// Smallest power of two >= max(n, rate / kMaxBinSpacingHz).
std::size_t padded_fft_size(std::size_t n, double rate_hz);

// One-sided spectrum (bins 0..nfft/2) of x zero-padded to nfft.
std::vector<std::complex<double>> real_fft(std::span<const double> x, std::size_t nfft);

// Mean-removed, tapered, zero-padded magnitude spectrum peak restricted to
// [min_hz, max_hz]. Throws DegenerateSignal on a constant input.
double spectral_peak_frequency(const UniformSeries& s, Taper taper, double min_hz, double max_hz);

// Ratio of the largest in-band power bin to the total power over all
// non-DC bins. Used to rank candidate pulse components.
double band_peak_power_ratio(const UniformSeries& s, double min_hz, double max_hz);

// Spectral peak of every length-`window` segment of a series, stepping by
// `stride`. Equivalent to calling spectral_peak_frequency on each segment,
// but maintains the in-band DFT bins with a recursive sliding update instead
// of one zero-padded FFT per segment.
class SlidingPeakTracker {
 public:
  SlidingPeakTracker(std::size_t window, double rate_hz, Taper taper, double min_hz,
                     double max_hz);

  // Peak frequency per segment start 0, stride, 2*stride, ...;
  // std::nullopt marks a constant segment.
  std::vector<std::optional<double>> run(std::span<const double> x, std::size_t stride) const;

  std::size_t nfft() const noexcept { return nfft_; }
  double bin_spacing_hz() const noexcept { return rate_ / static_cast<double>(nfft_); }

 private:
  std::size_t window_;
  double rate_;
  std::size_t nfft_;
  std::size_t k_lo_, k_hi_;
  double taper_a_, taper_b_;  // w[n] = a - b cos(2 pi n / (N - 1))
  std::vector<double> omegas_;                     // [k] , [k] - phi, [k] + phi per bin
  std::vector<std::complex<double>> taper_dft_;   // DFT of the taper at each bin
};

}  // namespace physiocue
