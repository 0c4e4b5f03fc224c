#include "physiocue/series.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "physiocue/errors.hpp"

namespace physiocue {

UniformSeries::UniformSeries(std::vector<double> values, double rate, double start)
    : samples(std::move(values)), rate_hz(rate), start_time_s(start) {
  if (!(rate_hz > 0.0) || !std::isfinite(rate_hz)) {
    throw InvalidInput("UniformSeries: sample rate must be positive and finite");
  }
}

void WindowSpec::validate() const {
  if (length_samples == 0 || stride_samples == 0) {
    throw InvalidInput("WindowSpec: length and stride must be positive");
  }
  if (stride_samples > length_samples) {
    throw InvalidInput("WindowSpec: stride must not exceed window length");
  }
}

std::vector<double> taper_weights(Taper taper, std::size_t n, bool periodic) {
  std::vector<double> w(n, 1.0);
  if (taper == Taper::Rectangular || n < 2) return w;
  const double a = taper == Taper::Hamming ? 0.54 : 0.5;
  const double b = 1.0 - a;
  const double period = periodic ? static_cast<double>(n) : static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = a - b * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / period);
  }
  return w;
}

const char* taper_name(Taper taper) noexcept {
  switch (taper) {
    case Taper::Rectangular: return "rectangular";
    case Taper::Hamming: return "hamming";
    case Taper::Hann: return "hann";
  }
  return "unknown";
}

double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
  if (x.empty()) return 0.0;
  const double m = mean(x);
  double acc = 0.0;
  for (double v : x) acc += (v - m) * (v - m);
  return acc / static_cast<double>(x.size());
}

double population_sd(std::span<const double> x) { return std::sqrt(variance(x)); }

double median(std::vector<double> x) {
  if (x.empty()) throw InvalidInput("median of empty sequence");
  const std::size_t mid = x.size() / 2;
  std::nth_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(mid), x.end());
  const double upper = x[mid];
  if (x.size() % 2 == 1) return upper;
  const double lower = *std::max_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

bool is_flat(std::span<const double> x) {
  if (x.size() < 2) return true;
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  const double scale = std::max(std::abs(*lo), std::abs(*hi));
  return (*hi - *lo) <= 1e-12 * scale || *hi == *lo;
}

}  // namespace physiocue
