#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "physiocue/hr.hpp"
#include "physiocue/microexpression.hpp"
#include "physiocue/oculomotor.hpp"
#include "physiocue/rppg.hpp"
#include "physiocue/stats.hpp"
#include "physiocue/sync.hpp"

namespace physiocue {

// Heart-rate schedule point. The schedule is piecewise linear between knots
// and held flat outside them; two knots at the same time make a step.
struct HrKnot {
  double t_s = 0.0;
  double bpm = 72.0;
};

double hr_at(const std::vector<HrKnot>& schedule, double t_s);

struct PulseSynthSpec {
  std::uint64_t seed = 1;
  double duration_s = 120.0;
  double rate_hz = 90.0;
  std::vector<HrKnot> hr_schedule{{0.0, 72.0}};
  double amplitude = 0.01;  // pulse amplitude, in units of the baseline
  std::array<double, 3> gains{0.3, 0.5, 0.2};
  std::array<double, 3> baseline{1.0, 1.0, 1.0};
  double noise_sd = 0.002;
  // Slow drift: a sinusoid of drift_hz with an independent random phase per
  // channel plus a Brownian term with drift_walk_sd per sqrt(second).
  double drift_amplitude = 0.0;
  double drift_hz = 0.05;
  double drift_walk_sd = 0.0;
  bool with_nir = false;
  double nir_gain = 0.15;
  double nir_baseline = 1.0;
  double oximeter_rate_hz = 60.0;
  double oximeter_delay_s = 0.3;
  double spo2_pct = 97.0;
};

struct SynthPulse {
  ChannelTrace trace;
  UniformSeries waveform;  // noise-free pulse shape at the video rate
  HeartRateSeries hr;      // schedule at the video rate
  OximeterRecord oximeter;
};

// w = sin(2 pi phi) + 0.5 sin(4 pi phi + pi/4), phi integrating the schedule.
// Channels carry baseline + gain * amplitude * w + drift + noise. The
// oximeter plethysmogram rises with blood volume, when reflected skin
// intensity falls, so it records -w (delayed).
SynthPulse synth_pulse_trace(const PulseSynthSpec& spec);

struct GazeSynthSpec {
  std::uint64_t seed = 1;
  double duration_s = 60.0;
  double rate_hz = 90.0;
  std::size_t n_saccades = 20;
  double min_amplitude_deg = 5.0;
  double max_amplitude_deg = 8.0;
  // Per-axis velocity noise after eye averaging and block averaging.
  double velocity_noise_dps = 10.0;
  std::size_t averaging_block = 3;
  bool binocular = true;
  // Scheduled saccade onsets; empty spreads n_saccades over the recording.
  std::vector<double> onsets_s;
};

struct SynthSaccade {
  double onset_s = 0.0;
  double offset_s = 0.0;
  double amplitude_deg = 0.0;
  double peak_velocity_dps = 0.0;
  SaccadeEvent raw_event;  // frames of the raw gaze trace
};

struct SynthGaze {
  GazeTrace gaze;
  std::vector<SynthSaccade> saccades;
};

// Main-sequence duration 2.2 ms/deg + 21 ms.
double saccade_duration_s(double amplitude_deg);

// Fixations with Gaussian jitter joined by minimum-jerk angle steps.
SynthGaze synth_gaze_trace(const GazeSynthSpec& spec);

struct FauEvent {
  double onset_s = 0.0;
  double duration_s = 0.2;
  double amplitude = 1.0;
  std::vector<std::size_t> aus;  // channel indices
};

struct FauSynthSpec {
  std::uint64_t seed = 1;
  double duration_s = 60.0;
  double rate_hz = 90.0;
  double baseline = 1.0;
  double noise_sd = 0.05;
  std::size_t n_events = 10;
  double amplitude = 1.0;
  double min_duration_s = 0.1;
  double max_duration_s = 0.5;
  std::size_t max_aus_per_event = 2;
  // Explicit schedule; empty draws n_events at random, non-overlapping.
  std::vector<FauEvent> events;
};

struct SynthFau {
  FauTrace trace;
  std::vector<Interval> intervals;  // [onset, offset] frames of each bump
  std::vector<FauEvent> events;
};

// Baseline noise (clamped at 0) plus triangular bumps spanning an odd number
// of frames, apex in the middle.
SynthFau synth_fau_trace(const FauSynthSpec& spec);

struct ResponseSynthSpec {
  std::uint64_t seed = 1;
  std::size_t n_subjects = 20;
  std::size_t questions_per_subject = 20;
  double deceptive_fraction = 0.5;
  double hr_mean = 75.0;
  double hr_between_sd = 8.0;
  double hr_within_sd = 3.0;
  double emr_mean = 1.0;
  double emr_between_sd = 0.3;
  double emr_within_sd = 0.2;
  double hr_deceptive_offset = 0.0;   // bpm
  double emr_deceptive_offset = 0.0;  // saccades/s
};

// Per-response HR and EMR values; each subject answers both ways at least once.
std::vector<ResponseValues> synth_responses(const ResponseSynthSpec& spec);

// A full synthetic recording session: every input the command-line tool reads.
struct SessionSynthSpec {
  std::uint64_t seed = 1;
  std::size_t n_subjects = 4;
  double duration_s = 120.0;
  double rate_hz = 90.0;
  double question_s = 4.0;
  double response_s = 6.0;
  double deceptive_hr_offset_bpm = 6.0;
  double base_saccade_rate_hz = 0.3;
  double deceptive_saccade_rate_hz = 0.8;
  double microexpression_rate_hz = 0.05;
  double deceptive_microexpression_rate_hz = 0.3;
  double thermal_rate_hz = 9.0;
};

struct SubjectSession {
  std::string subject_id;
  std::string split;
  ChannelTrace trace;
  OximeterRecord oximeter;
  GazeTrace gaze;  // per-eye
  FauTrace fau;
  std::vector<double> confidence;
  std::vector<std::vector<double>> landmarks_x, landmarks_y;  // per frame, 68 points
  std::vector<IntervalAnnotation> annotations;
  std::map<SensorKind, UniformSeries> sync_traces;
  std::map<SensorKind, double> sync_offsets_s;
};

std::vector<SubjectSession> synth_session(const SessionSynthSpec& spec);

}  // namespace physiocue
