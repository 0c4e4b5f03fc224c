#include "physiocue/oculomotor.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "physiocue/errors.hpp"

namespace physiocue {

const char* phase_name(Phase p) noexcept { return p == Phase::Question ? "question" : "response"; }
const char* label_name(Label l) noexcept { return l == Label::Truthful ? "truthful" : "deceptive"; }

void GazeTrace::validate() const {
  const std::size_t n = gaze_x_rad.size();
  const auto check = [&](const UniformSeries& s) {
    if (s.size() != n) throw InvalidInput("gaze channels must have equal lengths");
    if (std::abs(s.rate_hz - gaze_x_rad.rate_hz) > 1e-9 * gaze_x_rad.rate_hz) {
      throw InvalidInput("gaze channels must share a sample rate");
    }
    for (double v : s.samples) {
      if (!std::isfinite(v) || std::abs(v) > std::numbers::pi / 2) {
        throw InvalidInput("gaze angles must be finite and within [-pi/2, pi/2]");
      }
    }
  };
  check(gaze_x_rad);
  check(gaze_y_rad);
  if (right_x_rad.has_value() != right_y_rad.has_value()) {
    throw InvalidInput("right-eye gaze needs both axes");
  }
  if (right_x_rad) {
    check(*right_x_rad);
    check(*right_y_rad);
  }
}

void IntervalAnnotation::validate() const {
  if (!(start_s < end_s)) throw InvalidInput("interval start must precede its end");
  if (phase == Phase::Response && !label) throw InvalidInput("response intervals need a label");
}

GazeTrace preprocess_gaze(const GazeTrace& raw, std::size_t block) {
  raw.validate();
  if (block == 0) throw InvalidInput("preprocess_gaze: block must be positive");
  if (raw.size() < block) throw InvalidInput("preprocess_gaze: trace shorter than one block");

  std::vector<double> x = raw.gaze_x_rad.samples;
  std::vector<double> y = raw.gaze_y_rad.samples;
  if (raw.binocular()) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = 0.5 * (x[i] + raw.right_x_rad->samples[i]);
      y[i] = 0.5 * (y[i] + raw.right_y_rad->samples[i]);
    }
  }
  const std::size_t n_out = x.size() / block;
  std::vector<double> bx(n_out), by(n_out);
  for (std::size_t k = 0; k < n_out; ++k) {
    double sx = 0.0, sy = 0.0;
    for (std::size_t j = 0; j < block; ++j) {
      sx += x[k * block + j];
      sy += y[k * block + j];
    }
    bx[k] = sx / static_cast<double>(block);
    by[k] = sy / static_cast<double>(block);
  }
  const double rate = raw.rate_hz() / static_cast<double>(block);
  const double start = raw.gaze_x_rad.start_time_s + 0.5 * static_cast<double>(block - 1) / raw.rate_hz();
  GazeTrace out;
  out.gaze_x_rad = UniformSeries(std::move(bx), rate, start);
  out.gaze_y_rad = UniformSeries(std::move(by), rate, start);
  return out;
}

UniformSeries angular_velocity(const GazeTrace& g) {
  if (g.size() < 2) throw InvalidInput("angular_velocity: need at least 2 frames");
  if (g.binocular()) throw InvalidInput("angular_velocity: average the eyes first (preprocess_gaze)");
  const double scale = g.rate_hz() * 180.0 / std::numbers::pi;
  std::vector<double> v(g.size() - 1);
  for (std::size_t i = 0; i + 1 < g.size(); ++i) {
    const double dx = g.gaze_x_rad.samples[i + 1] - g.gaze_x_rad.samples[i];
    const double dy = g.gaze_y_rad.samples[i + 1] - g.gaze_y_rad.samples[i];
    v[i] = std::hypot(dx, dy) * scale;
  }
  return UniformSeries(std::move(v), g.rate_hz(), g.gaze_x_rad.start_time_s);
}

std::vector<SaccadeEvent> detect_saccades(const UniformSeries& velocity, const SaccadeOptions& options) {
  if (!(options.threshold_dps > 0.0)) throw InvalidInput("detect_saccades: threshold must be positive");
  std::vector<SaccadeEvent> events;
  const auto& v = velocity.samples;
  std::size_t i = 0;
  while (i < v.size()) {
    if (!(v[i] >= options.threshold_dps)) {
      ++i;
      continue;
    }
    SaccadeEvent e;
    e.start_frame = i;
    double peak = v[i];
    while (i + 1 < v.size() && v[i + 1] >= options.threshold_dps) {
      ++i;
      peak = std::max(peak, v[i]);
    }
    e.end_frame = i;
    e.peak_velocity_dps = peak;
    if (e.duration_frames() <= options.max_duration_frames) events.push_back(e);
    ++i;
  }
  return events;
}

double event_time_s(const SaccadeEvent& e, const UniformSeries& velocity) {
  return velocity.time_at(e.start_frame);
}

double emr_over_interval(std::span<const double> event_start_times_s, const IntervalAnnotation& interval) {
  if (!(interval.duration_s() > 0.0)) throw InvalidInput("emr_over_interval: empty interval");
  const auto count = std::count_if(event_start_times_s.begin(), event_start_times_s.end(),
                                   [&](double t) { return interval.contains(t); });
  return static_cast<double>(count) / interval.duration_s();
}

double emr_over_interval(std::span<const SaccadeEvent> events, const IntervalAnnotation& interval,
                         double rate_hz, double start_time_s) {
  if (!(rate_hz > 0.0)) throw InvalidInput("emr_over_interval: rate must be positive");
  std::vector<double> times;
  times.reserve(events.size());
  for (const auto& e : events) times.push_back(start_time_s + static_cast<double>(e.start_frame) / rate_hz);
  return emr_over_interval(times, interval);
}

ThresholdClassification median_threshold_classify(std::span<const LabeledValue> values) {
  std::map<std::string, std::vector<double>> by_subject;
  for (const auto& v : values) by_subject[v.subject_id].push_back(v.value);
  std::map<std::string, double> thresholds;
  for (auto& [subject, vals] : by_subject) {
    if (vals.size() < 2) {
      throw InvalidInput("median_threshold_classify: subject '" + subject + "' has fewer than 2 responses");
    }
    thresholds[subject] = median(vals);
  }
  ThresholdClassification out;
  out.predictions.reserve(values.size());
  std::size_t correct = 0;
  for (const auto& v : values) {
    const Label pred = v.value > thresholds[v.subject_id] ? Label::Deceptive : Label::Truthful;
    out.predictions.push_back(pred);
    if (pred == v.label) ++correct;
  }
  out.accuracy = values.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(values.size());
  return out;
}

}  // namespace physiocue
