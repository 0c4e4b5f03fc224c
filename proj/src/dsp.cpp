#include "physiocue/dsp.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>

#include "physiocue/errors.hpp"

namespace physiocue {

UniformSeries resample_linear(const UniformSeries& s, double target_rate_hz) {
  if (!(target_rate_hz > 0.0) || !std::isfinite(target_rate_hz)) {
    throw InvalidInput("resample_linear: target rate must be positive");
  }
  if (s.size() < 2) throw InvalidInput("resample_linear: need at least 2 samples");

  const double ratio = s.rate_hz / target_rate_hz;  // input index step per output sample
  const double span = static_cast<double>(s.size() - 1) * target_rate_hz / s.rate_hz;
  const auto n_out = static_cast<std::size_t>(std::floor(span + 1e-9)) + 1;
  std::vector<double> out(n_out);
  const std::size_t last = s.size() - 1;
  for (std::size_t j = 0; j < n_out; ++j) {
    const double pos = static_cast<double>(j) * ratio;
    auto i = static_cast<std::size_t>(std::floor(pos));
    if (i >= last) {
      out[j] = s.samples[last];
      continue;
    }
    const double frac = pos - static_cast<double>(i);
    out[j] = frac == 0.0 ? s.samples[i] : s.samples[i] + frac * (s.samples[i + 1] - s.samples[i]);
  }
  return UniformSeries(std::move(out), target_rate_hz, s.start_time_s);
}

double default_detrend_lambda(double rate_hz) {
  const double r = rate_hz / 90.0;
  return kDetrendLambdaAt90Hz * r * r;
}

UniformSeries detrend_smoothness_priors(const UniformSeries& s, double lambda) {
  if (!(lambda > 0.0)) throw InvalidInput("detrend_smoothness_priors: lambda must be positive");
  const std::size_t n = s.size();
  if (n < 3) throw InvalidInput("detrend_smoothness_priors: need at least 3 samples");

  // A = I + lambda^2 D2' D2, pentadiagonal SPD.
  const double l2 = lambda * lambda;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(5 * n);
  const auto ni = static_cast<Eigen::Index>(n);
  for (Eigen::Index i = 0; i < ni; ++i) triplets.emplace_back(i, i, 1.0);
  // Each row r of D2 is [1, -2, 1] at columns r, r+1, r+2.
  constexpr double d[3] = {1.0, -2.0, 1.0};
  for (Eigen::Index r = 0; r + 2 < ni; ++r) {
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) triplets.emplace_back(r + a, r + b, l2 * d[a] * d[b]);
    }
  }
  Eigen::SparseMatrix<double> A(ni, ni);
  A.setFromTriplets(triplets.begin(), triplets.end());

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
  if (solver.info() != Eigen::Success) {
    throw DegenerateSignal("detrend_smoothness_priors: factorization failed");
  }
  const Eigen::Map<const Eigen::VectorXd> z(s.samples.data(), ni);
  const Eigen::VectorXd trend = solver.solve(z);

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = s.samples[i] - trend[static_cast<Eigen::Index>(i)];
  return s.with_samples(std::move(out));
}

namespace {

using cplx = std::complex<double>;

double section_dc_gain(const Biquad& q) {
  const double den = 1.0 + q.a1 + q.a2;
  return den == 0.0 ? 0.0 : (q.b0 + q.b1 + q.b2) / den;
}

cplx section_response(const Biquad& q, double omega) {
  const cplx z1 = std::polar(1.0, -omega);
  const cplx z2 = z1 * z1;
  return (q.b0 + q.b1 * z1 + q.b2 * z2) / (1.0 + q.a1 * z1 + q.a2 * z2);
}

// Runs one section in place with the given initial state.
void run_section(const Biquad& q, std::vector<double>& x, double z1, double z2) {
  for (double& v : x) {
    const double in = v;
    const double y = q.b0 * in + z1;
    z1 = q.b1 * in - q.a1 * y + z2;
    z2 = q.b2 * in - q.a2 * y;
    v = y;
  }
}

// Runs the cascade with steady-state initial conditions for a constant input
// equal to x[0] (the lfilter_zi construction).
void run_cascade_steady(std::span<const Biquad> sections, std::vector<double>& x) {
  if (x.empty()) return;
  for (const Biquad& q : sections) {
    const double u = x.front();
    const double y = section_dc_gain(q) * u;
    run_section(q, x, y - q.b0 * u, q.b2 * u - q.a2 * y);
  }
}

}  // namespace

std::vector<Biquad> design_butterworth_bandpass(double low_hz, double high_hz, double rate_hz,
                                                int order) {
  if (order < 1) throw InvalidInput("band-pass order must be >= 1");
  if (!(low_hz > 0.0) || !(high_hz > low_hz) || !(high_hz < rate_hz / 2.0)) {
    throw InvalidInput("band-pass edges must satisfy 0 < low < high < rate/2 (got [" +
                       std::to_string(low_hz) + ", " + std::to_string(high_hz) + "] at " +
                       std::to_string(rate_hz) + " Hz)");
  }
  const double fs2 = 2.0 * rate_hz;
  const double wl = fs2 * std::tan(std::numbers::pi * low_hz / rate_hz);
  const double wh = fs2 * std::tan(std::numbers::pi * high_hz / rate_hz);
  const double w0 = std::sqrt(wl * wh);
  const double bw = wh - wl;

  // Analog prototype poles, mapped low-pass -> band-pass -> z-plane.
  std::vector<cplx> zpoles;
  for (int k = 0; k < order; ++k) {
    const double theta = std::numbers::pi * (2.0 * k + order + 1) / (2.0 * order);
    const cplx p = std::polar(1.0, theta);
    const cplx half = p * (bw / 2.0);
    const cplx root = std::sqrt(half * half - w0 * w0);
    for (const cplx s : {half + root, half - root}) zpoles.push_back((fs2 + s) / (fs2 - s));
  }

  std::vector<cplx> upper;
  std::vector<double> reals;
  for (const cplx& z : zpoles) {
    if (std::abs(z.imag()) < 1e-12) {
      reals.push_back(z.real());
    } else if (z.imag() > 0) {
      upper.push_back(z);
    }
  }
  std::sort(upper.begin(), upper.end(),
            [](const cplx& a, const cplx& b) { return std::abs(a) < std::abs(b); });
  std::sort(reals.begin(), reals.end());

  std::vector<Biquad> sections;
  for (const cplx& z : upper) {
    Biquad q;
    q.b0 = 1.0, q.b1 = 0.0, q.b2 = -1.0;
    q.a1 = -2.0 * z.real();
    q.a2 = std::norm(z);
    sections.push_back(q);
  }
  for (std::size_t i = 0; i + 1 < reals.size(); i += 2) {
    Biquad q;
    q.b0 = 1.0, q.b1 = 0.0, q.b2 = -1.0;
    q.a1 = -(reals[i] + reals[i + 1]);
    q.a2 = reals[i] * reals[i + 1];
    sections.push_back(q);
  }

  const double omega0 = 2.0 * std::atan(w0 / fs2);
  for (Biquad& q : sections) {
    const double g = std::abs(section_response(q, omega0));
    q.b0 /= g, q.b1 /= g, q.b2 /= g;
  }
  return sections;
}

double cascade_gain(std::span<const Biquad> sections, double f_hz, double rate_hz) {
  const double omega = 2.0 * std::numbers::pi * f_hz / rate_hz;
  double g = 1.0;
  for (const Biquad& q : sections) g *= std::abs(section_response(q, omega));
  return g;
}

std::vector<double> filter_cascade(std::span<const Biquad> sections, std::span<const double> x) {
  std::vector<double> y(x.begin(), x.end());
  for (const Biquad& q : sections) run_section(q, y, 0.0, 0.0);
  return y;
}

std::vector<double> filtfilt(std::span<const Biquad> sections, std::span<const double> x,
                             std::size_t padlen) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  padlen = std::min(padlen, n - 1);

  std::vector<double> ext;
  ext.reserve(n + 2 * padlen);
  for (std::size_t i = padlen; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= padlen; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  run_cascade_steady(sections, ext);
  std::reverse(ext.begin(), ext.end());
  run_cascade_steady(sections, ext);
  std::reverse(ext.begin(), ext.end());

  return {ext.begin() + static_cast<std::ptrdiff_t>(padlen),
          ext.begin() + static_cast<std::ptrdiff_t>(padlen + n)};
}

UniformSeries bandpass_zero_phase(const UniformSeries& s, double low_hz, double high_hz,
                                  int order) {
  const auto sections = design_butterworth_bandpass(low_hz, high_hz, s.rate_hz, order);
  if (s.empty()) return s;
  const auto padlen = static_cast<std::size_t>(std::ceil(3.0 * s.rate_hz / low_hz));
  return s.with_samples(filtfilt(sections, s.samples, padlen));
}

std::vector<double> moving_average_samples(std::span<const double> x, std::size_t half_width) {
  const std::size_t n = x.size();
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i];
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half_width ? i - half_width : 0;
    const std::size_t hi = std::min(n - 1, i + half_width);
    double sum = prefix[hi + 1] - prefix[lo];
    // Prefix differences lose precision on long, offset signals; re-sum
    // small windows directly.
    if (hi - lo < 64) {
      sum = 0.0;
      for (std::size_t k = lo; k <= hi; ++k) sum += x[k];
    }
    out[i] = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

UniformSeries moving_average(const UniformSeries& s, double width_s) {
  if (!(width_s > 0.0)) throw InvalidInput("moving_average: width must be positive");
  const auto half = static_cast<std::size_t>(std::floor(width_s * s.rate_hz / 2.0 + 1e-9));
  return s.with_samples(moving_average_samples(s.samples, half));
}

std::vector<double> standardize_samples(std::span<const double> x) {
  if (x.empty()) throw InvalidInput("standardize: empty input");
  const double m = mean(x);
  const double sd = population_sd(x);
  if (sd == 0.0 || is_flat(x)) throw DegenerateSignal("standardize: zero-variance input");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - m) / sd;
  return out;
}

UniformSeries standardize(const UniformSeries& s) {
  return s.with_samples(standardize_samples(s.samples));
}

double pearson_r(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidInput("pearson_r: length mismatch");
  if (a.size() < 2) throw InvalidInput("pearson_r: need at least 2 samples");
  const double ma = mean(a);
  const double mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0 || is_flat(a) || is_flat(b)) {
    throw InvalidInput("pearson_r: zero-variance input");
  }
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double pearson_r(const UniformSeries& a, const UniformSeries& b) {
  return pearson_r(a.values(), b.values());
}

double neg_pearson_loss(std::span<const double> a, std::span<const double> b) {
  return -pearson_r(a, b);
}

double neg_pearson_loss(const UniformSeries& a, const UniformSeries& b) {
  return -pearson_r(a, b);
}

UniformSeries apply_lag(const UniformSeries& target, int lag, std::size_t reference_size,
                        double reference_start_s, std::size_t* reference_offset) {
  // reference index i pairs with target index i + lag.
  const long long n_ref = static_cast<long long>(reference_size);
  const long long n_tgt = static_cast<long long>(target.size());
  const long long lo = std::max(0LL, -static_cast<long long>(lag));
  const long long hi = std::min(n_ref, n_tgt - lag);
  std::vector<double> out;
  if (hi > lo) {
    out.reserve(static_cast<std::size_t>(hi - lo));
    for (long long i = lo; i < hi; ++i) out.push_back(target.samples[static_cast<std::size_t>(i + lag)]);
  }
  if (reference_offset) *reference_offset = static_cast<std::size_t>(std::max(lo, 0LL));
  return UniformSeries(std::move(out), target.rate_hz,
                       reference_start_s + static_cast<double>(lo) / target.rate_hz);
}

Alignment align_by_xcorr(const UniformSeries& reference, const UniformSeries& target,
                         int max_lag_samples) {
  if (max_lag_samples < 0) throw InvalidInput("align_by_xcorr: max lag must be >= 0");
  if (std::abs(reference.rate_hz - target.rate_hz) > 1e-9 * reference.rate_hz) {
    throw InvalidInput("align_by_xcorr: series must share a sample rate");
  }
  const std::size_t nr = reference.size();
  const std::size_t nt = target.size();
  if (nr < 2 || nt < 2) throw InvalidInput("align_by_xcorr: need at least 2 samples");

  // Prefix sums for O(1) overlap means and variances.
  auto prefixes = [](std::span<const double> x) {
    std::vector<double> s1(x.size() + 1, 0.0), s2(x.size() + 1, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
      s1[i + 1] = s1[i] + x[i];
      s2[i + 1] = s2[i] + x[i] * x[i];
    }
    return std::pair{s1, s2};
  };
  // Center both series first so prefix sums stay well conditioned.
  const double mr = mean(reference.values());
  const double mt = mean(target.values());
  std::vector<double> r(nr), t(nt);
  for (std::size_t i = 0; i < nr; ++i) r[i] = reference.samples[i] - mr;
  for (std::size_t i = 0; i < nt; ++i) t[i] = target.samples[i] - mt;
  const auto [r1, r2] = prefixes(r);
  const auto [t1, t2] = prefixes(t);

  bool found = false;
  int best_lag = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (int lag = -max_lag_samples; lag <= max_lag_samples; ++lag) {
    const long long lo = std::max(0LL, -static_cast<long long>(lag));
    const long long hi = std::min(static_cast<long long>(nr), static_cast<long long>(nt) - lag);
    if (hi - lo < 2) continue;
    const auto a = static_cast<std::size_t>(lo), b = static_cast<std::size_t>(hi);
    const auto ta = static_cast<std::size_t>(lo + lag), tb = static_cast<std::size_t>(hi + lag);
    const double m = static_cast<double>(b - a);
    double dot = 0.0;
    for (std::size_t i = a, j = ta; i < b; ++i, ++j) dot += r[i] * t[j];
    const double sr = r1[b] - r1[a], st = t1[tb] - t1[ta];
    const double vr = (r2[b] - r2[a]) - sr * sr / m;
    const double vt = (t2[tb] - t2[ta]) - st * st / m;
    if (vr <= 0.0 || vt <= 0.0) continue;
    const double c = (dot - sr * st / m) / std::sqrt(vr * vt);
    // Ties keep the smaller |lag| (scan order visits negative lags first).
    if (!found || c > best + 1e-12 || (std::abs(c - best) <= 1e-12 && std::abs(lag) < std::abs(best_lag))) {
      found = true;
      best = c;
      best_lag = lag;
    }
  }
  if (!found) throw DegenerateSignal("align_by_xcorr: no lag with non-degenerate overlap");

  Alignment out;
  out.lag = best_lag;
  out.correlation = best;
  out.shifted_target = apply_lag(target, best_lag, nr, reference.start_time_s, &out.reference_offset);
  return out;
}

}  // namespace physiocue
