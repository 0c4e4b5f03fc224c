#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "physiocue/series.hpp"

namespace physiocue {

// Linear interpolation onto a new uniform grid that starts at the same time.
// Output length is floor((n - 1) * target / rate) + 1, so the duration is
// preserved within one output sample.
UniformSeries resample_linear(const UniformSeries& s, double target_rate_hz);

// Smoothness-priors detrending: returns s - trend, where trend minimizes
// |s - trend|^2 + lambda^2 |D2 trend|^2 and D2 is the second-difference
// operator.
UniformSeries detrend_smoothness_priors(const UniformSeries& s, double lambda);

// Default lambda for a given sample rate. 2000 at 90 Hz puts the half-power
// corner near 0.32 Hz; the value scales with rate^2 so the corner stays put in
// Hz. At 90 Hz a 0.05 Hz drift is attenuated by ~64 dB and 1.2 Hz by 0.02 dB.
double default_detrend_lambda(double rate_hz);
inline constexpr double kDetrendLambdaAt90Hz = 2000.0;

// One second-order IIR section, direct form II transposed, a0 == 1.
struct Biquad {
  double b0 = 1, b1 = 0, b2 = 0;
  double a1 = 0, a2 = 0;
};

// Butterworth band-pass (bilinear transform of an `order`-pole low-pass
// prototype), returned as `order` cascaded biquads normalized to unit gain at
// the geometric band center.
std::vector<Biquad> design_butterworth_bandpass(double low_hz, double high_hz, double rate_hz,
                                                int order);

// Magnitude response of a biquad cascade at frequency f.
double cascade_gain(std::span<const Biquad> sections, double f_hz, double rate_hz);

// Single forward pass through the cascade (zero initial state).
std::vector<double> filter_cascade(std::span<const Biquad> sections, std::span<const double> x);

// Forward-backward filtering with odd-reflection padding at both ends.
std::vector<double> filtfilt(std::span<const Biquad> sections, std::span<const double> x,
                             std::size_t padlen);

// Zero-phase Butterworth band-pass. Requires 0 < low < high < rate/2.
UniformSeries bandpass_zero_phase(const UniformSeries& s, double low_hz, double high_hz,
                                  int order = 2);

// Centered moving mean; windows shrink at the edges so output length equals
// input length. The window spans floor(width_s * rate / 2) samples per side.
UniformSeries moving_average(const UniformSeries& s, double width_s);
std::vector<double> moving_average_samples(std::span<const double> x, std::size_t half_width);

// Zero mean, unit population standard deviation. Throws DegenerateSignal on
// a constant input.
UniformSeries standardize(const UniformSeries& s);
std::vector<double> standardize_samples(std::span<const double> x);

// Pearson correlation. Throws InvalidInput on length mismatch, fewer than two
// samples, or a zero-variance input.
double pearson_r(std::span<const double> a, std::span<const double> b);
double pearson_r(const UniformSeries& a, const UniformSeries& b);

// Training loss for waveform regression: -pearson_r(a, b).
double neg_pearson_loss(std::span<const double> a, std::span<const double> b);
double neg_pearson_loss(const UniformSeries& a, const UniformSeries& b);

struct Alignment {
  // target[i] ~ reference[i - lag], i.e. a positive lag means target lags.
  int lag = 0;
  double correlation = 0.0;
  // Target values re-indexed onto the reference grid, restricted to the
  // overlap. shifted_target[j] pairs with reference[reference_offset + j].
  UniformSeries shifted_target;
  std::size_t reference_offset = 0;
};

// Integer lag in [-max_lag, max_lag] that maximizes the normalized
// (Pearson) cross-correlation over the overlapping samples.
Alignment align_by_xcorr(const UniformSeries& reference, const UniformSeries& target,
                         int max_lag_samples);

// Applies an already known lag to another series recorded on the target's
// clock (e.g. the heart rate channel of the oximeter).
UniformSeries apply_lag(const UniformSeries& target, int lag, std::size_t reference_size,
                        double reference_start_s, std::size_t* reference_offset = nullptr);

}  // namespace physiocue
