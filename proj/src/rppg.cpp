#include "physiocue/rppg.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "physiocue/dsp.hpp"
#include "physiocue/errors.hpp"
#include "physiocue/spectrum.hpp"

namespace physiocue {

namespace {

// Threshold on the standard deviation of mean-normalized (unit-scale)
// signals below which a window is treated as constant.
constexpr double kFlatSd = 1e-12;

std::size_t internal_window(const ChannelTrace& trace, const RppgOptions& options) {
  if (!(options.window_s > 0.0)) throw InvalidInput("rPPG window must be positive");
  const auto len = static_cast<std::size_t>(std::lround(options.window_s * trace.rate_hz()));
  if (len < 4) throw InvalidInput("rPPG window shorter than 4 frames");
  if (trace.frame_count() < len) {
    throw InvalidInput("trace shorter than one internal window (" + std::to_string(len) +
                       " frames)");
  }
  return len;
}

struct NormalizedWindow {
  std::vector<double> r, g, b;
};

NormalizedWindow normalize_window(const ChannelTrace& trace, std::size_t start, std::size_t len,
                                  std::size_t window_index) {
  NormalizedWindow w;
  const std::span<const double> rs(trace.r.samples.data() + start, len);
  const std::span<const double> gs(trace.g.samples.data() + start, len);
  const std::span<const double> bs(trace.b.samples.data() + start, len);
  const double mr = mean(rs), mg = mean(gs), mb = mean(bs);
  if (!(mr > 0.0) || !(mg > 0.0) || !(mb > 0.0)) {
    throw DegenerateSignal("window " + std::to_string(window_index) + " (frames " +
                           std::to_string(start) + ".." + std::to_string(start + len - 1) +
                           "): zero-mean channel");
  }
  w.r.resize(len), w.g.resize(len), w.b.resize(len);
  for (std::size_t i = 0; i < len; ++i) {
    w.r[i] = rs[i] / mr;
    w.g[i] = gs[i] / mg;
    w.b[i] = bs[i] / mb;
  }
  return w;
}

}  // namespace

RoiBox expand_face_bbox(const RoiBox& box, const RoiExpansion& e) {
  if (!box.valid()) throw InvalidInput("expand_face_bbox: invalid box");
  const double w = box.width(), h = box.height();
  const RoiBox grown{box.x_min - e.left * w, box.y_min - e.top * h, box.x_max + e.right * w,
                     box.y_max + e.bottom * h};
  const double side = std::max(grown.width(), grown.height());
  const double cx = 0.5 * (grown.x_min + grown.x_max);
  const double cy = 0.5 * (grown.y_min + grown.y_max);
  return {cx - side / 2, cy - side / 2, cx + side / 2, cy + side / 2};
}

RoiBox landmark_bbox(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.empty() || xs.size() != ys.size()) throw InvalidInput("landmark_bbox: bad landmark set");
  const auto [xlo, xhi] = std::minmax_element(xs.begin(), xs.end());
  const auto [ylo, yhi] = std::minmax_element(ys.begin(), ys.end());
  return {*xlo, *ylo, *xhi, *yhi};
}

void ChannelTrace::validate() const {
  const auto check = [&](const UniformSeries& s, const char* name) {
    if (s.size() != g.size()) throw InvalidInput(std::string("channel ") + name + ": length mismatch");
    if (std::abs(s.rate_hz - g.rate_hz) > 1e-9 * g.rate_hz) {
      throw InvalidInput(std::string("channel ") + name + ": rate mismatch");
    }
    for (double v : s.samples) {
      if (!std::isfinite(v) || v < 0.0) {
        throw InvalidInput(std::string("channel ") + name + ": values must be finite and >= 0");
      }
    }
  };
  check(r, "R");
  check(g, "G");
  check(b, "B");
  if (nir) check(*nir, "NIR");
}

const char* method_name(PulseMethod m) noexcept {
  switch (m) {
    case PulseMethod::Chrom: return "CHROM";
    case PulseMethod::Pos: return "POS";
    case PulseMethod::Poh10: return "POH10";
    case PulseMethod::Poh11: return "POH11";
    case PulseMethod::External: return "EXTERNAL";
  }
  return "UNKNOWN";
}

std::optional<PulseMethod> parse_method(std::string_view name) noexcept {
  std::string up(name);
  for (char& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (PulseMethod m : {PulseMethod::Chrom, PulseMethod::Pos, PulseMethod::Poh10,
                        PulseMethod::Poh11, PulseMethod::External}) {
    if (up == method_name(m)) return m;
  }
  return std::nullopt;
}

PulseEstimate chrom_pulse(const ChannelTrace& trace, const RppgOptions& options) {
  trace.validate();
  const std::size_t n = trace.frame_count();
  const std::size_t len = internal_window(trace, options);
  const std::size_t step = len / 2;
  const auto hann = taper_weights(Taper::Hann, len, /*periodic=*/true);
  const auto sections = design_butterworth_bandpass(options.band_low_hz, options.band_high_hz,
                                                    trace.rate_hz(), options.band_order);
  const auto padlen = static_cast<std::size_t>(std::ceil(3.0 * trace.rate_hz() / options.band_low_hz));

  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + len <= n; s += step) starts.push_back(s);
  if (starts.back() + len < n) starts.push_back(n - len);

  std::vector<double> out(n, 0.0);
  std::vector<double> x(len), y(len);
  for (std::size_t wi = 0; wi < starts.size(); ++wi) {
    const std::size_t start = starts[wi];
    const auto w = normalize_window(trace, start, len, wi);
    for (std::size_t i = 0; i < len; ++i) {
      x[i] = 3.0 * w.r[i] - 2.0 * w.g[i];
      y[i] = 1.5 * w.r[i] + w.g[i] - 1.5 * w.b[i];
    }
    const auto xf = filtfilt(sections, x, padlen);
    const auto yf = filtfilt(sections, y, padlen);
    const double sx = population_sd(xf), sy = population_sd(yf);
    if (sy <= kFlatSd) {
      if (sx <= kFlatSd) continue;  // flat chrominance: no contribution
      throw DegenerateSignal("CHROM window " + std::to_string(wi) + " (frames " +
                             std::to_string(start) + ".." + std::to_string(start + len - 1) +
                             "): zero-variance Y chrominance");
    }
    const double alpha = sx / sy;
    for (std::size_t i = 0; i < len; ++i) out[start + i] += (xf[i] - alpha * yf[i]) * hann[i];
  }
  return {trace.g.with_samples(std::move(out)), PulseMethod::Chrom};
}

PulseEstimate pos_pulse(const ChannelTrace& trace, const RppgOptions& options) {
  trace.validate();
  const std::size_t n = trace.frame_count();
  const std::size_t len = internal_window(trace, options);

  std::vector<double> out(n, 0.0);
  std::vector<double> s1(len), s2(len), h(len);
  for (std::size_t start = 0; start + len <= n; ++start) {
    const auto w = normalize_window(trace, start, len, start);
    for (std::size_t i = 0; i < len; ++i) {
      s1[i] = w.g[i] - w.b[i];
      s2[i] = w.g[i] + w.b[i] - 2.0 * w.r[i];
    }
    const double sd1 = population_sd(s1), sd2 = population_sd(s2);
    if (sd2 <= kFlatSd) continue;  // constant chrominance: zero contribution
    const double alpha = sd1 / sd2;
    for (std::size_t i = 0; i < len; ++i) h[i] = s1[i] + alpha * s2[i];
    const double mh = mean(h);
    for (std::size_t i = 0; i < len; ++i) out[start + i] += h[i] - mh;
  }
  return {trace.g.with_samples(std::move(out)), PulseMethod::Pos};
}

PulseEstimate ica_pulse(const ChannelTrace& trace, IcaVariant variant, std::uint64_t seed,
                        const RppgOptions& options) {
  trace.validate();
  const double rate = trace.rate_hz();
  const std::size_t n = trace.frame_count();
  if (static_cast<double>(n) < options.ica_min_duration_s * rate) {
    throw InvalidInput("ICA estimators need at least " + std::to_string(options.ica_min_duration_s) +
                       " s of samples");
  }

  std::vector<UniformSeries> channels{trace.r, trace.g, trace.b};
  if (variant == IcaVariant::Poh11) {
    const double lambda = options.detrend_lambda > 0.0 ? options.detrend_lambda
                                                       : default_detrend_lambda(rate);
    for (auto& c : channels) {
      c = detrend_smoothness_priors(c, lambda);
      c = bandpass_zero_phase(c, options.band_low_hz, options.band_high_hz, options.band_order);
    }
  }

  Eigen::MatrixXd x(3, static_cast<Eigen::Index>(n));
  for (Eigen::Index c = 0; c < 3; ++c) {
    std::vector<double> z;
    try {
      z = standardize_samples(channels[static_cast<std::size_t>(c)].samples);
    } catch (const DegenerateSignal&) {
      throw DegenerateSignal("ICA: constant channel");
    }
    for (Eigen::Index i = 0; i < x.cols(); ++i) x(c, i) = z[static_cast<std::size_t>(i)];
  }

  const IcaResult ica = fast_ica(x, seed, options.ica);

  std::size_t best = 0;
  double best_ratio = -1.0;
  std::vector<double> component(n);
  for (Eigen::Index c = 0; c < ica.sources.rows(); ++c) {
    for (std::size_t i = 0; i < n; ++i) component[i] = ica.sources(c, static_cast<Eigen::Index>(i));
    const double ratio = band_peak_power_ratio(trace.g.with_samples(component), kHrMinHz, kHrMaxHz);
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best = static_cast<std::size_t>(c);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    component[i] = ica.sources(static_cast<Eigen::Index>(best), static_cast<Eigen::Index>(i));
  }

  if (variant == IcaVariant::Poh11) {
    component = moving_average_samples(component, options.poh11_smooth_points / 2);
    return {trace.g.with_samples(std::move(component)), PulseMethod::Poh11};
  }
  return {trace.g.with_samples(std::move(component)), PulseMethod::Poh10};
}

PulseEstimate estimate_pulse(const ChannelTrace& trace, PulseMethod method, std::uint64_t seed,
                             const RppgOptions& options) {
  switch (method) {
    case PulseMethod::Chrom: return chrom_pulse(trace, options);
    case PulseMethod::Pos: return pos_pulse(trace, options);
    case PulseMethod::Poh10: return ica_pulse(trace, IcaVariant::Poh10, seed, options);
    case PulseMethod::Poh11: return ica_pulse(trace, IcaVariant::Poh11, seed, options);
    case PulseMethod::External: break;
  }
  throw InvalidInput("estimate_pulse: EXTERNAL waveforms are ingested, not estimated");
}

UniformSeries stitch_overlap_add(const std::vector<UniformSeries>& clips, std::size_t clip_len,
                                 std::size_t stride) {
  if (clips.empty()) throw InvalidInput("stitch_overlap_add: no clips");
  if (clip_len == 0 || stride == 0 || stride > clip_len) {
    throw InvalidInput("stitch_overlap_add: need 0 < stride <= clip_len");
  }
  for (std::size_t c = 0; c < clips.size(); ++c) {
    if (clips[c].size() != clip_len) {
      throw InvalidInput("stitch_overlap_add: clip " + std::to_string(c) + " has length " +
                         std::to_string(clips[c].size()) + ", expected " + std::to_string(clip_len));
    }
  }
  const auto hann = taper_weights(Taper::Hann, clip_len);
  std::vector<double> out((clips.size() - 1) * stride + clip_len, 0.0);
  for (std::size_t c = 0; c < clips.size(); ++c) {
    const auto z = standardize_samples(clips[c].samples);
    for (std::size_t i = 0; i < clip_len; ++i) out[c * stride + i] += z[i] * hann[i];
  }
  return UniformSeries(std::move(out), clips.front().rate_hz, clips.front().start_time_s);
}

std::vector<UniformSeries> cut_clips(const UniformSeries& s, std::size_t clip_len,
                                     std::size_t stride) {
  if (clip_len == 0 || stride == 0) throw InvalidInput("cut_clips: clip_len and stride must be > 0");
  std::vector<UniformSeries> clips;
  for (std::size_t start = 0; start + clip_len <= s.size(); start += stride) {
    clips.emplace_back(std::vector<double>(s.samples.begin() + static_cast<std::ptrdiff_t>(start),
                                           s.samples.begin() + static_cast<std::ptrdiff_t>(start + clip_len)),
                       s.rate_hz, s.time_at(start));
  }
  return clips;
}

}  // namespace physiocue
