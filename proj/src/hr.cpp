#include "physiocue/hr.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "physiocue/dsp.hpp"
#include "physiocue/errors.hpp"
#include "physiocue/parallel.hpp"

namespace physiocue {

void OximeterRecord::validate() const {
  const std::size_t n = waveform.size();
  if (spo2_pct.size() != n || hr_bpm.size() != n) {
    throw InvalidInput("oximeter channels must have equal lengths");
  }
  for (const UniformSeries* s : {&spo2_pct, &hr_bpm}) {
    if (std::abs(s->rate_hz - waveform.rate_hz) > 1e-9 * waveform.rate_hz) {
      throw InvalidInput("oximeter channels must share a sample rate");
    }
  }
  for (double v : spo2_pct.samples) {
    if (!(v >= 0.0 && v <= 100.0)) throw InvalidInput("SpO2 must lie in [0, 100]");
  }
}

namespace {

std::size_t window_samples(const HrOptions& options, double rate) {
  if (!(options.window_s > 0.0)) throw InvalidInput("HR window must be positive");
  if (options.stride_frames == 0) throw InvalidInput("HR stride must be positive");
  return static_cast<std::size_t>(std::lround(options.window_s * rate));
}

}  // namespace

std::vector<std::optional<double>> windowed_peak_hz(const UniformSeries& pulse,
                                                    const HrOptions& options) {
  const std::size_t len = window_samples(options, pulse.rate_hz);
  if (pulse.size() < len) {
    throw InvalidInput("recording (" + std::to_string(pulse.duration_s()) +
                       " s) is shorter than one HR window (" + std::to_string(options.window_s) + " s)");
  }
  const SlidingPeakTracker tracker(len, pulse.rate_hz, options.taper, options.min_hz, options.max_hz);
  return tracker.run(pulse.samples, options.stride_frames);
}

HeartRateSeries windowed_hr(const PulseEstimate& pulse, const HrOptions& options) {
  const auto peaks = windowed_peak_hz(pulse.waveform, options);
  const std::size_t len = window_samples(options, pulse.waveform.rate_hz);

  auto first_valid = std::find_if(peaks.begin(), peaks.end(), [](const auto& p) { return p.has_value(); });
  if (first_valid == peaks.end()) throw DegenerateSignal("windowed_hr: every window is constant");

  std::vector<double> bpm(peaks.size());
  double held = 60.0 * **first_valid;
  for (std::size_t i = 0; i < peaks.size(); ++i) {
    if (peaks[i]) held = 60.0 * *peaks[i];
    bpm[i] = held;
  }

  const double rate = pulse.waveform.rate_hz / static_cast<double>(options.stride_frames);
  const double center = pulse.waveform.start_time_s +
                        0.5 * static_cast<double>(len - 1) / pulse.waveform.rate_hz;
  UniformSeries raw(std::move(bpm), rate, center);
  if (options.smooth_s > 0.0) raw = moving_average(raw, options.smooth_s);
  return {std::move(raw), HrSource::Estimated};
}

GroundTruth prepare_ground_truth(const OximeterRecord& ox, const PulseEstimate& reference_pulse,
                                 const GroundTruthOptions& options) {
  ox.validate();
  const UniformSeries& ref = reference_pulse.waveform;
  if (std::abs(ref.rate_hz - options.target_rate_hz) > 1e-9 * options.target_rate_hz) {
    throw InvalidInput("prepare_ground_truth: reference pulse must be sampled at the target rate");
  }
  const double rate = options.target_rate_hz;
  const UniformSeries wave = resample_linear(ox.waveform, rate);
  const UniformSeries hr = resample_linear(ox.hr_bpm, rate);

  // Nominal clock offset: oximeter index j sits at reference index j + d.
  const auto d = static_cast<int>(std::lround((wave.start_time_s - ref.start_time_s) * rate));
  std::size_t nominal_offset = 0;
  const UniformSeries nominal = apply_lag(wave, -d, ref.size(), ref.start_time_s, &nominal_offset);
  if (nominal.size() < 2) throw InvalidInput("prepare_ground_truth: oximeter and video do not overlap");
  const UniformSeries ref_part(
      std::vector<double>(ref.samples.begin() + static_cast<std::ptrdiff_t>(nominal_offset),
                          ref.samples.begin() + static_cast<std::ptrdiff_t>(nominal_offset + nominal.size())),
      rate, ref.time_at(nominal_offset));

  const auto max_lag = static_cast<int>(std::lround(options.max_lag_s * rate));
  const Alignment align = align_by_xcorr(ref_part, nominal, max_lag);

  GroundTruth gt;
  gt.lag_samples = align.lag;
  gt.shift_s = static_cast<double>(align.lag) / rate;
  const int total = align.lag - d;
  gt.waveform = apply_lag(wave, total, ref.size(), ref.start_time_s, &gt.reference_offset);
  gt.hr = {apply_lag(hr, total, ref.size(), ref.start_time_s), HrSource::Oximeter};
  return gt;
}

EvalReport hr_error_metrics(std::span<const double> est, std::span<const double> gt) {
  if (est.size() != gt.size()) throw InvalidInput("hr_error_metrics: length mismatch");
  if (est.size() < 2) throw InvalidInput("hr_error_metrics: need at least 2 values");
  EvalReport r;
  const double n = static_cast<double>(est.size());
  double se = 0.0, sae = 0.0, sse = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    const double e = est[i] - gt[i];
    se += e;
    sae += std::abs(e);
    sse += e * e;
  }
  r.me_bpm = se / n;
  r.mae_bpm = sae / n;
  r.rmse_bpm = std::sqrt(sse / n);
  r.n_windows = est.size();
  if (!is_flat(est) && !is_flat(gt)) r.pearson_r = pearson_r(est, gt);
  return r;
}

EvalReport hr_error_metrics(const HeartRateSeries& est, const HeartRateSeries& gt) {
  return hr_error_metrics(est.hr_bpm.values(), gt.hr_bpm.values());
}

WindowErrors evaluate_recording(const Recording& rec, PulseMethod method, const EvalOptions& options) {
  const PulseEstimate reference = chrom_pulse(rec.trace, options.rppg);
  const PulseEstimate pulse =
      method == PulseMethod::Chrom ? reference : estimate_pulse(rec.trace, method, options.seed, options.rppg);

  GroundTruthOptions gto = options.ground_truth;
  gto.target_rate_hz = rec.trace.rate_hz();
  const GroundTruth gt = prepare_ground_truth(rec.oximeter, reference, gto);
  const HeartRateSeries est = windowed_hr(pulse, options.hr);

  const std::size_t len = static_cast<std::size_t>(std::lround(options.hr.window_s * rec.trace.rate_hz()));
  const auto& gt_hr = gt.hr.hr_bpm.samples;
  std::vector<double> prefix(gt_hr.size() + 1, 0.0);
  for (std::size_t i = 0; i < gt_hr.size(); ++i) prefix[i + 1] = prefix[i] + gt_hr[i];

  WindowErrors out;
  const std::size_t lo = gt.reference_offset;
  const std::size_t hi = gt.reference_offset + gt_hr.size();  // exclusive, reference grid
  for (std::size_t s = 0; s < est.hr_bpm.size(); ++s) {
    const std::size_t start = s * options.hr.stride_frames;
    if (start < lo || start + len > hi) continue;
    const std::size_t a = start - lo;
    out.est_bpm.push_back(est.hr_bpm.samples[s]);
    out.gt_bpm.push_back((prefix[a + len] - prefix[a]) / static_cast<double>(len));
  }
  return out;
}

EvalReport evaluate_method(std::span<const Recording> recordings, PulseMethod method,
                           const EvalOptions& options) {
  if (recordings.empty()) throw InvalidInput("evaluate_method: no recordings");
  std::vector<WindowErrors> per(recordings.size());
  parallel_for(recordings.size(), options.jobs,
               [&](std::size_t i) { per[i] = evaluate_recording(recordings[i], method, options); });
  WindowErrors pooled;
  for (const auto& w : per) {
    pooled.est_bpm.insert(pooled.est_bpm.end(), w.est_bpm.begin(), w.est_bpm.end());
    pooled.gt_bpm.insert(pooled.gt_bpm.end(), w.gt_bpm.begin(), w.gt_bpm.end());
  }
  EvalReport report = hr_error_metrics(pooled.est_bpm, pooled.gt_bpm);
  report.method = method_name(method);
  return report;
}

}  // namespace physiocue
