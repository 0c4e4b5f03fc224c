#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace physiocue {

// Uniformly sampled scalar time series. Sample i is taken at
// start_time_s + i / rate_hz.
struct UniformSeries {
  std::vector<double> samples;
  double rate_hz = 1.0;
  double start_time_s = 0.0;

  UniformSeries() = default;
  UniformSeries(std::vector<double> values, double rate, double start = 0.0);

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }
  double operator[](std::size_t i) const { return samples[i]; }
  std::span<const double> values() const noexcept { return samples; }

  double time_at(std::size_t i) const noexcept {
    return start_time_s + static_cast<double>(i) / rate_hz;
  }
  double duration_s() const noexcept { return static_cast<double>(samples.size()) / rate_hz; }

  // Same rate and start time, new samples.
  UniformSeries with_samples(std::vector<double> values) const {
    return UniformSeries(std::move(values), rate_hz, start_time_s);
  }
};

enum class Taper { Rectangular, Hamming, Hann };

struct WindowSpec {
  std::size_t length_samples = 1;
  std::size_t stride_samples = 1;
  Taper taper = Taper::Rectangular;

  // Throws InvalidInput unless 0 < stride <= length.
  void validate() const;
};

// Symmetric taper of length n (numpy.hamming / numpy.hanning convention).
// With periodic = true the period is n instead of n - 1, which makes
// half-overlapped Hann windows sum to a constant.
std::vector<double> taper_weights(Taper taper, std::size_t n, bool periodic = false);

const char* taper_name(Taper taper) noexcept;

double mean(std::span<const double> x);
// Population variance (divide by n).
double variance(std::span<const double> x);
double population_sd(std::span<const double> x);
double median(std::vector<double> x);

// True when the spread of x is zero up to rounding of its magnitude.
bool is_flat(std::span<const double> x);

}  // namespace physiocue
