#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "physiocue/rppg.hpp"
#include "physiocue/series.hpp"
#include "physiocue/spectrum.hpp"

namespace physiocue {

enum class HrSource { Estimated, Oximeter };

struct HeartRateSeries {
  UniformSeries hr_bpm;
  HrSource source = HrSource::Estimated;
};

struct OximeterRecord {
  UniformSeries spo2_pct;
  UniformSeries hr_bpm;
  UniformSeries waveform;

  double rate_hz() const noexcept { return waveform.rate_hz; }
  // Equal lengths and rates, SpO2 within [0, 100].
  void validate() const;
};

struct HrOptions {
  double window_s = 30.0;
  std::size_t stride_frames = 1;
  Taper taper = Taper::Hamming;
  double min_hz = kHrMinHz;
  double max_hz = kHrMaxHz;
  double smooth_s = 5.0;  // centered moving average over the HR track
};

// Spectral-peak heart rate over sliding windows, smoothed by a centered
// moving average and time-stamped at window centers. A constant window
// repeats the previous window's estimate (leading constant windows take the
// first valid estimate). Throws InvalidInput when the pulse is shorter than
// one window and DegenerateSignal when every window is constant.
HeartRateSeries windowed_hr(const PulseEstimate& pulse, const HrOptions& options = {});

// Raw (unsmoothed) per-window peak frequencies in Hz, std::nullopt for
// constant windows.
std::vector<std::optional<double>> windowed_peak_hz(const UniformSeries& pulse,
                                                    const HrOptions& options = {});

struct GroundTruthOptions {
  double target_rate_hz = 90.0;
  double max_lag_s = 2.0;
};

struct GroundTruth {
  UniformSeries waveform;  // on the reference grid, from reference_offset on
  HeartRateSeries hr;      // same grid and extent as waveform
  std::size_t reference_offset = 0;
  int lag_samples = 0;     // oximeter lag found by cross-correlation
  double shift_s = 0.0;    // lag_samples / target rate
};

// Resamples the oximeter channels to the reference rate and shifts them so
// the oximeter waveform best correlates with the reference pulse (within
// +-max_lag_s).
GroundTruth prepare_ground_truth(const OximeterRecord& ox, const PulseEstimate& reference_pulse,
                                 const GroundTruthOptions& options = {});

struct EvalReport {
  std::string method;
  double me_bpm = 0.0;
  double mae_bpm = 0.0;
  double rmse_bpm = 0.0;
  std::optional<double> pearson_r;  // undefined for zero-variance inputs
  std::size_t n_windows = 0;
};

EvalReport hr_error_metrics(std::span<const double> est, std::span<const double> gt);
EvalReport hr_error_metrics(const HeartRateSeries& est, const HeartRateSeries& gt);

struct Recording {
  std::string subject_id;
  ChannelTrace trace;
  OximeterRecord oximeter;
};

struct EvalOptions {
  RppgOptions rppg;
  HrOptions hr;
  GroundTruthOptions ground_truth;
  std::uint64_t seed = 0;  // ICA initialization
  std::size_t jobs = 1;
};

// Paired per-window estimated and ground-truth heart rates of one recording.
struct WindowErrors {
  std::vector<double> est_bpm;
  std::vector<double> gt_bpm;
};

// Estimates the pulse with `method`, aligns the oximeter against a CHROM
// reference, and pairs every HR window fully covered by ground truth with
// the mean oximeter HR over the same window.
WindowErrors evaluate_recording(const Recording& rec, PulseMethod method,
                                const EvalOptions& options = {});

// Pools the windows of all recordings into one report.
EvalReport evaluate_method(std::span<const Recording> recordings, PulseMethod method,
                           const EvalOptions& options = {});

}  // namespace physiocue
