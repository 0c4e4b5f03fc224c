#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "physiocue/series.hpp"

namespace physiocue {

// Gaze angles in radians. When the per-eye pair is present, gaze_x/gaze_y are
// the left eye and right_x/right_y the right eye; otherwise gaze_x/gaze_y are
// already binocular.
struct GazeTrace {
  UniformSeries gaze_x_rad;
  UniformSeries gaze_y_rad;
  std::optional<UniformSeries> right_x_rad;
  std::optional<UniformSeries> right_y_rad;

  double rate_hz() const noexcept { return gaze_x_rad.rate_hz; }
  std::size_t size() const noexcept { return gaze_x_rad.size(); }
  bool binocular() const noexcept { return right_x_rad.has_value() && right_y_rad.has_value(); }
  void validate() const;
};

struct SaccadeEvent {
  std::size_t start_frame = 0;  // index into the velocity series
  std::size_t end_frame = 0;    // inclusive
  double peak_velocity_dps = 0.0;

  std::size_t duration_frames() const noexcept { return end_frame - start_frame + 1; }
  bool operator==(const SaccadeEvent&) const = default;
};

enum class Phase { Question, Response };
enum class Label { Truthful, Deceptive };

const char* phase_name(Phase p) noexcept;
const char* label_name(Label l) noexcept;

struct IntervalAnnotation {
  std::string subject_id;
  int question_id = 0;
  Phase phase = Phase::Response;
  double start_s = 0.0;
  double end_s = 0.0;
  std::optional<Label> label;

  double duration_s() const noexcept { return end_s - start_s; }
  // Half-open membership [start_s, end_s).
  bool contains(double t) const noexcept { return t >= start_s && t < end_s; }
  void validate() const;
};

// Averages the two eyes (when present), then averages non-overlapping blocks
// of `block` frames. A trailing partial block is dropped; the output rate is
// rate / block and the output starts at the first block's mean time.
GazeTrace preprocess_gaze(const GazeTrace& raw, std::size_t block = 3);

// Angular speed between consecutive frames, in degrees per second. Sample i
// describes the motion from frame i to frame i + 1 and carries frame i's
// timestamp.
UniformSeries angular_velocity(const GazeTrace& g);

struct SaccadeOptions {
  double threshold_dps = 50.0;
  std::size_t max_duration_frames = 10;
};

// Maximal runs of frames with velocity >= threshold. Runs longer than the
// maximum duration are discarded as tracking noise.
std::vector<SaccadeEvent> detect_saccades(const UniformSeries& velocity, const SaccadeOptions& options = {});

// Time of an event's first frame on the velocity series' clock.
double event_time_s(const SaccadeEvent& e, const UniformSeries& velocity);

// Events per second whose start time falls inside the interval.
double emr_over_interval(std::span<const double> event_start_times_s, const IntervalAnnotation& interval);
double emr_over_interval(std::span<const SaccadeEvent> events, const IntervalAnnotation& interval,
                         double rate_hz, double start_time_s = 0.0);

struct LabeledValue {
  std::string subject_id;
  Label label = Label::Truthful;
  double value = 0.0;
};

struct ThresholdClassification {
  std::vector<Label> predictions;  // aligned with the input
  double accuracy = 0.0;
};

// Per subject, predicts deceptive when the value exceeds that subject's
// median. Every subject needs at least two values.
ThresholdClassification median_threshold_classify(std::span<const LabeledValue> values);

}  // namespace physiocue
