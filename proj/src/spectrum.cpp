#include "physiocue/spectrum.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "physiocue/errors.hpp"

namespace physiocue {

namespace {

using cplx = std::complex<double>;

// fftw planning is not thread safe; executing a plan on new arrays is.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan r2c(std::size_t n) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    double* in = fftw_alloc_real(n);
    fftw_complex* out = fftw_alloc_complex(n / 2 + 1);
    fftw_plan p = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
    plans_.emplace(n, p);
    return p;
  }

  ~PlanCache() {
    for (auto& [n, p] : plans_) fftw_destroy_plan(p);
  }

 private:
  std::mutex mutex_;
  std::map<std::size_t, fftw_plan> plans_;
};

struct FftwDeleter {
  void operator()(void* p) const { fftw_free(p); }
};

std::pair<std::size_t, std::size_t> band_bins(double min_hz, double max_hz, double rate,
                                              std::size_t nfft) {
  const double df = rate / static_cast<double>(nfft);
  auto lo = static_cast<std::size_t>(std::ceil(min_hz / df - 1e-9));
  auto hi = static_cast<std::size_t>(std::floor(max_hz / df + 1e-9));
  hi = std::min(hi, nfft / 2);
  lo = std::max<std::size_t>(lo, 1);
  if (lo > hi) throw InvalidInput("spectral band contains no frequency bins");
  return {lo, hi};
}

void check_band(double min_hz, double max_hz, double rate) {
  if (!(min_hz >= 0.0) || !(max_hz > min_hz) || max_hz > rate / 2.0 + 1e-12) {
    throw InvalidInput("spectral band must satisfy 0 <= min < max <= rate/2");
  }
}

}  // namespace

std::size_t padded_fft_size(std::size_t n, double rate_hz) {
  const auto needed = static_cast<std::size_t>(std::ceil(rate_hz / kMaxBinSpacingHz - 1e-9));
  std::size_t target = std::max(n, needed);
  std::size_t p = 1;
  while (p < target) p <<= 1;
  return p;
}

std::vector<cplx> real_fft(std::span<const double> x, std::size_t nfft) {
  if (nfft < x.size()) throw InvalidInput("real_fft: nfft shorter than input");
  std::unique_ptr<double, FftwDeleter> in(fftw_alloc_real(nfft));
  std::unique_ptr<fftw_complex, FftwDeleter> out(fftw_alloc_complex(nfft / 2 + 1));
  std::fill(in.get(), in.get() + nfft, 0.0);
  std::copy(x.begin(), x.end(), in.get());
  fftw_execute_dft_r2c(PlanCache::instance().r2c(nfft), in.get(), out.get());
  std::vector<cplx> spectrum(nfft / 2 + 1);
  for (std::size_t k = 0; k < spectrum.size(); ++k) spectrum[k] = {out.get()[k][0], out.get()[k][1]};
  return spectrum;
}

double spectral_peak_frequency(const UniformSeries& s, Taper taper, double min_hz, double max_hz) {
  if (s.size() < 2) throw InvalidInput("spectral_peak_frequency: need at least 2 samples");
  check_band(min_hz, max_hz, s.rate_hz);
  if (is_flat(s.values())) throw DegenerateSignal("spectral_peak_frequency: constant input");

  const std::size_t n = s.size();
  const double m = mean(s.values());
  const auto w = taper_weights(taper, n);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = (s.samples[i] - m) * w[i];

  const std::size_t nfft = padded_fft_size(n, s.rate_hz);
  const auto spec = real_fft(x, nfft);
  const auto [lo, hi] = band_bins(min_hz, max_hz, s.rate_hz, nfft);
  std::size_t best = lo;
  double best_mag = -1.0;
  for (std::size_t k = lo; k <= hi; ++k) {
    const double mag = std::norm(spec[k]);
    if (mag > best_mag) {
      best_mag = mag;
      best = k;
    }
  }
  return static_cast<double>(best) * s.rate_hz / static_cast<double>(nfft);
}

double band_peak_power_ratio(const UniformSeries& s, double min_hz, double max_hz) {
  if (s.size() < 2) throw InvalidInput("band_peak_power_ratio: need at least 2 samples");
  check_band(min_hz, max_hz, s.rate_hz);
  const double m = mean(s.values());
  std::vector<double> x(s.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = s.samples[i] - m;
  std::size_t nfft = 1;
  while (nfft < x.size()) nfft <<= 1;
  const auto spec = real_fft(x, nfft);
  const auto [lo, hi] = band_bins(min_hz, max_hz, s.rate_hz, nfft);
  double total = 0.0, peak = 0.0;
  for (std::size_t k = 1; k < spec.size(); ++k) total += std::norm(spec[k]);
  for (std::size_t k = lo; k <= hi; ++k) peak = std::max(peak, std::norm(spec[k]));
  return total > 0.0 ? peak / total : 0.0;
}

SlidingPeakTracker::SlidingPeakTracker(std::size_t window, double rate_hz, Taper taper,
                                       double min_hz, double max_hz)
    : window_(window), rate_(rate_hz) {
  if (window < 2) throw InvalidInput("SlidingPeakTracker: window must have >= 2 samples");
  if (!(rate_hz > 0.0)) throw InvalidInput("SlidingPeakTracker: rate must be positive");
  check_band(min_hz, max_hz, rate_hz);
  nfft_ = padded_fft_size(window, rate_hz);
  std::tie(k_lo_, k_hi_) = band_bins(min_hz, max_hz, rate_hz, nfft_);
  switch (taper) {
    case Taper::Rectangular: taper_a_ = 1.0, taper_b_ = 0.0; break;
    case Taper::Hamming: taper_a_ = 0.54, taper_b_ = 0.46; break;
    case Taper::Hann: taper_a_ = 0.5, taper_b_ = 0.5; break;
  }

  const double phi = 2.0 * std::numbers::pi / static_cast<double>(window - 1);
  const auto w = taper_weights(taper, window);
  for (std::size_t k = k_lo_; k <= k_hi_; ++k) {
    const double om = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(nfft_);
    omegas_.push_back(om);
    omegas_.push_back(om - phi);
    omegas_.push_back(om + phi);
    cplx acc = 0.0;
    for (std::size_t n = 0; n < window; ++n) acc += w[n] * std::polar(1.0, -om * static_cast<double>(n));
    taper_dft_.push_back(acc);
  }
}

std::vector<std::optional<double>> SlidingPeakTracker::run(std::span<const double> x,
                                                           std::size_t stride) const {
  if (stride == 0) throw InvalidInput("SlidingPeakTracker: stride must be positive");
  if (x.size() < window_) throw InvalidInput("SlidingPeakTracker: series shorter than window");
  const std::size_t n_seg = (x.size() - window_) / stride + 1;
  const std::size_t n_freq = omegas_.size();
  const std::size_t n_bins = k_hi_ - k_lo_ + 1;

  // Per-frequency rotation constants for the recursive update.
  std::vector<cplx> step(n_freq), tail(n_freq);
  for (std::size_t f = 0; f < n_freq; ++f) {
    step[f] = std::polar(1.0, omegas_[f]);
    tail[f] = std::polar(1.0, -omegas_[f] * static_cast<double>(window_ - 1));
  }

  // Counts of adjacent unequal samples give an exact constant-segment test.
  std::vector<std::size_t> changes(x.size(), 0);
  for (std::size_t i = 1; i < x.size(); ++i) changes[i] = changes[i - 1] + (x[i] != x[i - 1] ? 1 : 0);

  // The series is centered once; the per-segment mean is removed through the
  // taper's DFT.
  const double global_mean = mean(x);
  std::vector<double> xc(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) xc[i] = x[i] - global_mean;
  std::vector<double> prefix(x.size() + 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) prefix[i + 1] = prefix[i] + xc[i];

  std::vector<cplx> sums(n_freq);
  auto direct = [&](std::size_t start) {
    for (std::size_t f = 0; f < n_freq; ++f) {
      cplx acc = 0.0;
      const cplx rot = step[f];
      cplx ph = 1.0;
      // e^{-i w n} computed by conjugate rotation, refreshed periodically.
      for (std::size_t n = 0; n < window_; ++n) {
        if (n % 256 == 0) ph = std::polar(1.0, -omegas_[f] * static_cast<double>(n));
        acc += xc[start + n] * ph;
        ph *= std::conj(rot);
      }
      sums[f] = acc;
    }
  };

  constexpr std::size_t kRefresh = 2048;
  std::vector<std::optional<double>> out(n_seg);
  std::size_t pos = 0;  // current segment start held in `sums`
  direct(0);
  std::size_t since_refresh = 0;
  const double df = rate_ / static_cast<double>(nfft_);
  for (std::size_t s = 0; s < n_seg; ++s) {
    const std::size_t start = s * stride;
    if (start - pos >= kRefresh || since_refresh >= kRefresh) {
      direct(start);
      pos = start;
      since_refresh = 0;
    }
    while (pos < start) {
      const double drop = xc[pos];
      const double add = xc[pos + window_];
      for (std::size_t f = 0; f < n_freq; ++f) sums[f] = step[f] * (sums[f] - drop) + add * tail[f];
      ++pos;
      ++since_refresh;
    }

    if (changes[start + window_ - 1] - changes[start] == 0) {
      out[s] = std::nullopt;
      continue;
    }
    const double seg_mean = (prefix[start + window_] - prefix[start]) / static_cast<double>(window_);
    std::size_t best = 0;
    double best_mag = -1.0;
    for (std::size_t b = 0; b < n_bins; ++b) {
      const cplx y = taper_a_ * sums[3 * b] - 0.5 * taper_b_ * (sums[3 * b + 1] + sums[3 * b + 2]) -
                     seg_mean * taper_dft_[b];
      const double mag = std::norm(y);
      if (mag > best_mag) {
        best_mag = mag;
        best = b;
      }
    }
    out[s] = static_cast<double>(k_lo_ + best) * df;
  }
  return out;
}

}  // namespace physiocue
