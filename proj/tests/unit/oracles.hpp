#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library.

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <numbers>
#include <span>
#include <vector>

namespace oracle {

inline std::vector<double> sine(double f_hz, double rate_hz, std::size_t n, double amp = 1.0,
                                double phase = 0.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = amp * std::sin(2.0 * std::numbers::pi * f_hz * static_cast<double>(i) / rate_hz + phase);
  }
  return x;
}

// Amplitude of the f_hz component by direct correlation with a complex
// exponential; exact for a sinusoid with an integer number of cycles.
inline double dft_amplitude(std::span<const double> x, double rate_hz, double f_hz) {
  std::complex<double> acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = 2.0 * std::numbers::pi * f_hz * static_cast<double>(i) / rate_hz;
    acc += x[i] * std::complex<double>(std::cos(w), -std::sin(w));
  }
  return 2.0 * std::abs(acc) / static_cast<double>(x.size());
}

// Frequency of the largest |DFT| over a fine grid inside [lo, hi].
inline double dft_peak(std::span<const double> x, double rate_hz, double lo, double hi, double step) {
  double best_f = lo, best = -1.0;
  for (double f = lo; f <= hi + 1e-12; f += step) {
    const double a = dft_amplitude(x, rate_hz, f);
    if (a > best) {
      best = a;
      best_f = f;
    }
  }
  return best_f;
}

inline double mean(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

inline double pearson(std::span<const double> a, std::span<const double> b) {
  const double ma = mean(a), mb = mean(b);
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

inline double max_abs(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

// Student-t density integrated from 0 to |t| with composite Simpson's rule.
inline double student_t_cdf(double t, double df) {
  const double c = std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) / std::sqrt(df * std::numbers::pi);
  auto pdf = [&](double x) { return c * std::pow(1.0 + x * x / df, -(df + 1) / 2); };
  const double a = std::abs(t);
  const int n = 20000;
  const double h = a / n;
  double s = pdf(0) + pdf(a);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * pdf(i * h);
  const double half = s * h / 3.0;
  return t >= 0 ? 0.5 + half : 0.5 - half;
}

// FNV-1a over the bytes of a sequence of doubles.
inline std::uint64_t fnv1a(std::span<const double> x, std::uint64_t h = 14695981039346656037ull) {
  for (double v : x) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &v, sizeof v);
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 1099511628211ull;
    }
  }
  return h;
}

}  // namespace oracle
