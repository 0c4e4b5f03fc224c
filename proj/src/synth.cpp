#include "physiocue/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "physiocue/errors.hpp"
#include "physiocue/rng.hpp"

namespace physiocue {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kDegToRad = std::numbers::pi / 180.0;

void validate_schedule(const std::vector<HrKnot>& schedule) {
  if (schedule.empty()) throw InvalidInput("HR schedule is empty");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const auto& k = schedule[i];
    if (!std::isfinite(k.t_s) || !std::isfinite(k.bpm)) throw InvalidInput("HR schedule: non-finite knot");
    if (k.bpm < 60.0 * kHrMinHz - 1e-9 || k.bpm > 60.0 * kHrMaxHz + 1e-9) {
      throw InvalidInput("HR schedule: " + std::to_string(k.bpm) + " bpm is outside the pulse band");
    }
    if (i > 0 && k.t_s < schedule[i - 1].t_s) throw InvalidInput("HR schedule: knot times must not decrease");
  }
}

// Integral of the schedule (in beats) from the first knot to t.
double beats_from_first_knot(const std::vector<HrKnot>& s, double t) {
  if (t <= s.front().t_s) return s.front().bpm / 60.0 * (t - s.front().t_s);
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const double a = s[i].t_s, b = s[i + 1].t_s;
    if (b <= a) continue;
    if (t <= b) {
      const double ft = s[i].bpm + (s[i + 1].bpm - s[i].bpm) * (t - a) / (b - a);
      return acc + 0.5 * (s[i].bpm + ft) / 60.0 * (t - a);
    }
    acc += 0.5 * (s[i].bpm + s[i + 1].bpm) / 60.0 * (b - a);
  }
  return acc + s.back().bpm / 60.0 * (t - s.back().t_s);
}

double pulse_shape(double phase) {
  return std::sin(kTwoPi * phase) + 0.5 * std::sin(2.0 * kTwoPi * phase + std::numbers::pi / 4.0);
}

std::size_t frames_for(double duration_s, double rate_hz) {
  if (!(rate_hz > 0.0) || !(duration_s > 0.0)) throw InvalidInput("synth: rate and duration must be positive");
  return static_cast<std::size_t>(std::floor(duration_s * rate_hz + 1e-9));
}

std::size_t odd_frames(double duration_s, double rate_hz) {
  auto len = static_cast<std::size_t>(std::lround(duration_s * rate_hz));
  if (len % 2 == 0) len = len > 0 ? len - 1 : 1;
  auto cap = static_cast<std::size_t>(std::floor(0.5 * rate_hz + 1e-9));
  if (cap % 2 == 0) --cap;
  return std::clamp<std::size_t>(len, 3, std::max<std::size_t>(cap, 3));
}

}  // namespace

double hr_at(const std::vector<HrKnot>& schedule, double t) {
  validate_schedule(schedule);
  if (t <= schedule.front().t_s) return schedule.front().bpm;
  for (std::size_t i = 0; i + 1 < schedule.size(); ++i) {
    const double a = schedule[i].t_s, b = schedule[i + 1].t_s;
    if (t < b && b > a) return schedule[i].bpm + (schedule[i + 1].bpm - schedule[i].bpm) * (t - a) / (b - a);
  }
  return schedule.back().bpm;
}

SynthPulse synth_pulse_trace(const PulseSynthSpec& spec) {
  validate_schedule(spec.hr_schedule);
  const std::size_t n = frames_for(spec.duration_s, spec.rate_hz);
  if (!(spec.amplitude >= 0.0) || !(spec.noise_sd >= 0.0) || !(spec.drift_amplitude >= 0.0) ||
      !(spec.drift_walk_sd >= 0.0)) {
    throw InvalidInput("synth_pulse_trace: amplitudes and noise levels must be >= 0");
  }
  Rng root(spec.seed);
  Rng noise = root.fork(1);
  Rng drift_rng = root.fork(2);
  Rng ox_rng = root.fork(3);

  const double phase0 = beats_from_first_knot(spec.hr_schedule, 0.0);
  auto phase_at = [&](double t) { return beats_from_first_knot(spec.hr_schedule, t) - phase0; };

  std::vector<double> w(n), hr(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / spec.rate_hz;
    w[i] = pulse_shape(phase_at(t));
    hr[i] = hr_at(spec.hr_schedule, t);
  }

  const std::size_t n_channels = spec.with_nir ? 4 : 3;
  std::vector<std::vector<double>> ch(n_channels, std::vector<double>(n));
  for (std::size_t c = 0; c < n_channels; ++c) {
    const bool nir = c == 3;
    const double base = nir ? spec.nir_baseline : spec.baseline[c];
    const double gain = nir ? spec.nir_gain : spec.gains[c];
    const double psi = drift_rng.uniform(0.0, kTwoPi);
    const double step_sd = spec.drift_walk_sd / std::sqrt(spec.rate_hz);
    double walk = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / spec.rate_hz;
      if (step_sd > 0.0) walk += drift_rng.normal(0.0, step_sd);
      const double drift = spec.drift_amplitude * std::sin(kTwoPi * spec.drift_hz * t + psi) + walk;
      const double v = base * (1.0 + gain * spec.amplitude * w[i] + drift) + noise.normal(0.0, spec.noise_sd * base);
      ch[c][i] = std::max(v, 0.0);
    }
  }

  SynthPulse out;
  out.trace.r = UniformSeries(std::move(ch[0]), spec.rate_hz);
  out.trace.g = UniformSeries(std::move(ch[1]), spec.rate_hz);
  out.trace.b = UniformSeries(std::move(ch[2]), spec.rate_hz);
  if (spec.with_nir) out.trace.nir = UniformSeries(std::move(ch[3]), spec.rate_hz);
  out.waveform = UniformSeries(std::move(w), spec.rate_hz);
  out.hr = {UniformSeries(std::move(hr), spec.rate_hz), HrSource::Estimated};

  const std::size_t m = frames_for(spec.duration_s, spec.oximeter_rate_hz);
  std::vector<double> spo2(m), ohr(m), wave(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double t = static_cast<double>(k) / spec.oximeter_rate_hz - spec.oximeter_delay_s;
    wave[k] = -pulse_shape(phase_at(t));
    ohr[k] = hr_at(spec.hr_schedule, t);
    spo2[k] = std::clamp(spec.spo2_pct + ox_rng.normal(0.0, 0.2), 0.0, 100.0);
  }
  out.oximeter.spo2_pct = UniformSeries(std::move(spo2), spec.oximeter_rate_hz);
  out.oximeter.hr_bpm = UniformSeries(std::move(ohr), spec.oximeter_rate_hz);
  out.oximeter.waveform = UniformSeries(std::move(wave), spec.oximeter_rate_hz);
  return out;
}

double saccade_duration_s(double amplitude_deg) { return 2.2e-3 * amplitude_deg + 0.021; }

SynthGaze synth_gaze_trace(const GazeSynthSpec& spec) {
  const std::size_t n = frames_for(spec.duration_s, spec.rate_hz);
  if (spec.averaging_block == 0) throw InvalidInput("synth_gaze_trace: averaging block must be >= 1");
  if (!(spec.min_amplitude_deg > 0.0 && spec.max_amplitude_deg >= spec.min_amplitude_deg)) {
    throw InvalidInput("synth_gaze_trace: bad amplitude range");
  }
  Rng root(spec.seed);
  Rng sched = root.fork(1);
  Rng jitter = root.fork(2);

  std::vector<double> onsets = spec.onsets_s;
  const double max_dur = saccade_duration_s(spec.max_amplitude_deg);
  if (onsets.empty() && spec.n_saccades > 0) {
    const double margin = 1.0;
    const double slot = (spec.duration_s - 2.0 * margin) / static_cast<double>(spec.n_saccades);
    if (slot < 3.0 * max_dur + 0.2) throw InvalidInput("synth_gaze_trace: too many saccades for the duration");
    for (std::size_t k = 0; k < spec.n_saccades; ++k) {
      const double lo = margin + slot * static_cast<double>(k) + 0.1;
      onsets.push_back(sched.uniform(lo, lo + slot - 0.2 - max_dur));
    }
  }
  std::sort(onsets.begin(), onsets.end());

  SynthGaze out;
  std::vector<double> x(n, 0.0), y(n, 0.0);
  double px = 0.0, py = 0.0;
  std::size_t frame = 0;
  for (double onset : onsets) {
    const double amp = sched.uniform(spec.min_amplitude_deg, spec.max_amplitude_deg);
    double theta = sched.uniform(0.0, kTwoPi);
    if (std::abs(px + amp * std::cos(theta)) > 15.0 || std::abs(py + amp * std::sin(theta)) > 15.0) {
      theta += std::numbers::pi;
    }
    const double dx = amp * std::cos(theta), dy = amp * std::sin(theta);
    const double dur = saccade_duration_s(amp);
    if (onset < 0.0 || onset + dur >= spec.duration_s) throw InvalidInput("synth_gaze_trace: saccade outside recording");
    for (; frame < n && static_cast<double>(frame) / spec.rate_hz <= onset; ++frame) {
      x[frame] = px;
      y[frame] = py;
    }
    const std::size_t first = frame;
    for (; frame < n && static_cast<double>(frame) / spec.rate_hz < onset + dur; ++frame) {
      const double tau = (static_cast<double>(frame) / spec.rate_hz - onset) / dur;
      const double s = tau * tau * tau * (10.0 - 15.0 * tau + 6.0 * tau * tau);
      x[frame] = px + s * dx;
      y[frame] = py + s * dy;
    }
    px += dx;
    py += dy;
    SynthSaccade sc;
    sc.onset_s = onset;
    sc.offset_s = onset + dur;
    sc.amplitude_deg = amp;
    sc.peak_velocity_dps = 1.875 * amp / dur;
    sc.raw_event = {first > 0 ? first - 1 : 0, frame > 0 ? frame - 1 : 0, sc.peak_velocity_dps};
    out.saccades.push_back(sc);
  }
  for (; frame < n; ++frame) {
    x[frame] = px;
    y[frame] = py;
  }

  const double eyes = spec.binocular ? 2.0 : 1.0;
  const double rate_post = spec.rate_hz / static_cast<double>(spec.averaging_block);
  const double sigma = spec.velocity_noise_dps * std::sqrt(eyes * static_cast<double>(spec.averaging_block)) /
                       (std::sqrt(2.0) * rate_post);
  auto noisy = [&](const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) r[i] = (v[i] + jitter.normal(0.0, sigma)) * kDegToRad;
    return UniformSeries(std::move(r), spec.rate_hz);
  };
  out.gaze.gaze_x_rad = noisy(x);
  out.gaze.gaze_y_rad = noisy(y);
  if (spec.binocular) {
    out.gaze.right_x_rad = noisy(x);
    out.gaze.right_y_rad = noisy(y);
  }
  return out;
}

SynthFau synth_fau_trace(const FauSynthSpec& spec) {
  const std::size_t n = frames_for(spec.duration_s, spec.rate_hz);
  if (!(spec.noise_sd >= 0.0) || !(spec.baseline >= 0.0)) throw InvalidInput("synth_fau_trace: negative noise or baseline");
  if (spec.max_aus_per_event < 1 || spec.max_aus_per_event > kAuCount) {
    throw InvalidInput("synth_fau_trace: max_aus_per_event must lie in [1, 18]");
  }
  Rng root(spec.seed);
  Rng sched = root.fork(1);
  Rng noise = root.fork(2);

  std::vector<FauEvent> events = spec.events;
  if (events.empty() && spec.n_events > 0) {
    const double margin = 1.0;
    const double slot = (spec.duration_s - 2.0 * margin) / static_cast<double>(spec.n_events);
    if (slot < 2.0 * spec.max_duration_s + 0.2) throw InvalidInput("synth_fau_trace: too many events for the duration");
    for (std::size_t k = 0; k < spec.n_events; ++k) {
      FauEvent e;
      e.duration_s = sched.uniform(spec.min_duration_s, spec.max_duration_s);
      const double lo = margin + slot * static_cast<double>(k);
      e.onset_s = sched.uniform(lo, lo + slot - spec.max_duration_s - 0.1);
      e.amplitude = spec.amplitude;
      const auto count = static_cast<std::size_t>(sched.uniform_int(1, static_cast<std::int64_t>(spec.max_aus_per_event)));
      std::set<std::size_t> chosen;
      while (chosen.size() < count) chosen.insert(static_cast<std::size_t>(sched.uniform_int(0, kAuCount - 1)));
      e.aus.assign(chosen.begin(), chosen.end());
      events.push_back(std::move(e));
    }
  }

  SynthFau out;
  std::vector<std::vector<double>> au(kAuCount, std::vector<double>(n));
  for (auto& ch : au) {
    for (double& v : ch) v = spec.baseline + noise.normal(0.0, spec.noise_sd);
  }
  for (const auto& e : events) {
    const std::size_t len = odd_frames(e.duration_s, spec.rate_hz);
    const auto onset = static_cast<std::size_t>(std::max(0L, std::lround(e.onset_s * spec.rate_hz)));
    if (onset + len > n) throw InvalidInput("synth_fau_trace: event extends past the recording");
    const double h = static_cast<double>(len - 1) / 2.0;
    for (std::size_t a : e.aus) {
      if (a >= kAuCount) throw InvalidInput("synth_fau_trace: AU index out of range");
      for (std::size_t j = 0; j < len; ++j) {
        au[a][onset + j] += e.amplitude * (1.0 - std::abs(static_cast<double>(j) - h) / h);
      }
    }
    out.intervals.push_back({static_cast<double>(onset), static_cast<double>(onset + len - 1)});
  }
  for (auto& ch : au) {
    for (double& v : ch) v = std::max(v, 0.0);
    out.trace.au.emplace_back(std::move(ch), spec.rate_hz);
  }
  out.events = std::move(events);
  return out;
}

std::vector<ResponseValues> synth_responses(const ResponseSynthSpec& spec) {
  if (spec.questions_per_subject < 2) throw InvalidInput("synth_responses: need at least 2 questions per subject");
  Rng rng(spec.seed);
  std::vector<ResponseValues> out;
  for (std::size_t s = 0; s < spec.n_subjects; ++s) {
    char id[16];
    std::snprintf(id, sizeof id, "S%03zu", s + 1);
    const double hr0 = rng.normal(spec.hr_mean, spec.hr_between_sd);
    const double emr0 = rng.normal(spec.emr_mean, spec.emr_between_sd);
    std::vector<Label> labels(spec.questions_per_subject);
    for (auto& l : labels) l = rng.uniform() < spec.deceptive_fraction ? Label::Deceptive : Label::Truthful;
    if (std::all_of(labels.begin(), labels.end(), [&](Label l) { return l == labels.front(); })) {
      labels.back() = labels.front() == Label::Deceptive ? Label::Truthful : Label::Deceptive;
    }
    for (std::size_t q = 0; q < labels.size(); ++q) {
      const double dec = labels[q] == Label::Deceptive ? 1.0 : 0.0;
      ResponseValues v;
      v.subject_id = id;
      v.question_id = static_cast<int>(q + 1);
      v.label = labels[q];
      v.hr_bpm = hr0 + rng.normal(0.0, spec.hr_within_sd) + dec * spec.hr_deceptive_offset;
      v.emr = std::max(0.0, emr0 + rng.normal(0.0, spec.emr_within_sd) + dec * spec.emr_deceptive_offset);
      out.push_back(std::move(v));
    }
  }
  return out;
}

namespace {

// Event times of a thinned Poisson process whose rate depends on time.
template <typename RateFn>
std::vector<double> poisson_times(Rng& rng, double t0, double t1, double max_rate, double min_gap, RateFn rate) {
  std::vector<double> out;
  if (max_rate <= 0.0) return out;
  double t = t0;
  while (true) {
    t += -std::log(1.0 - rng.uniform()) / max_rate;
    if (t >= t1) break;
    if (rng.uniform() * max_rate >= rate(t)) continue;
    if (!out.empty() && t - out.back() < min_gap) continue;
    out.push_back(t);
  }
  return out;
}

}  // namespace

std::vector<SubjectSession> synth_session(const SessionSynthSpec& spec) {
  if (spec.n_subjects < 1) throw InvalidInput("synth_session: need at least one subject");
  if (spec.duration_s < 90.0) throw InvalidInput("synth_session: sessions must last at least 90 s");
  std::vector<SubjectSession> out;
  Rng root(spec.seed);
  static const char* kSplits[] = {"train", "train", "val", "test"};
  for (std::size_t s = 0; s < spec.n_subjects; ++s) {
    Rng rng = root.fork(s + 1);
    SubjectSession ss;
    char id[16];
    std::snprintf(id, sizeof id, "S%03zu", s + 1);
    ss.subject_id = id;
    ss.split = kSplits[s % 4];

    // Question / response schedule.
    std::vector<std::pair<double, double>> deceptive_responses;
    int q = 1;
    std::vector<Label> labels;
    for (double t = 2.0; t + spec.question_s + spec.response_s <= spec.duration_s - 2.0;
         t += spec.question_s + spec.response_s) {
      labels.push_back(rng.uniform() < 0.5 ? Label::Deceptive : Label::Truthful);
    }
    if (labels.size() < 2) throw InvalidInput("synth_session: too short for two questions");
    if (std::all_of(labels.begin(), labels.end(), [&](Label l) { return l == labels.front(); })) {
      labels.back() = labels.front() == Label::Deceptive ? Label::Truthful : Label::Deceptive;
    }
    double t = 2.0;
    for (Label l : labels) {
      ss.annotations.push_back({ss.subject_id, q, Phase::Question, t, t + spec.question_s, l});
      const double rs = t + spec.question_s, re = rs + spec.response_s;
      ss.annotations.push_back({ss.subject_id, q, Phase::Response, rs, re, l});
      if (l == Label::Deceptive) deceptive_responses.emplace_back(rs, re);
      t = re;
      ++q;
    }
    auto deceptive_at = [&](double x) {
      return std::any_of(deceptive_responses.begin(), deceptive_responses.end(),
                         [&](const auto& iv) { return x >= iv.first && x < iv.second; });
    };

    PulseSynthSpec ps;
    ps.seed = rng.next_u64();
    ps.duration_s = spec.duration_s;
    ps.rate_hz = spec.rate_hz;
    const double base_bpm = rng.uniform(62.0, 80.0);
    ps.hr_schedule = {{0.0, base_bpm}};
    for (const auto& [a, b] : deceptive_responses) {
      ps.hr_schedule.push_back({a, base_bpm});
      ps.hr_schedule.push_back({a + 1.0, base_bpm + spec.deceptive_hr_offset_bpm});
      ps.hr_schedule.push_back({b, base_bpm + spec.deceptive_hr_offset_bpm});
      ps.hr_schedule.push_back({b + 1.0, base_bpm});
    }
    ps.drift_amplitude = 0.02;
    ps.with_nir = true;
    SynthPulse pulse = synth_pulse_trace(ps);
    ss.trace = std::move(pulse.trace);
    ss.oximeter = std::move(pulse.oximeter);

    GazeSynthSpec gs;
    gs.seed = rng.next_u64();
    gs.duration_s = spec.duration_s;
    gs.rate_hz = spec.rate_hz;
    const double max_sr = std::max(spec.base_saccade_rate_hz, spec.deceptive_saccade_rate_hz);
    gs.onsets_s = poisson_times(rng, 0.5, spec.duration_s - 0.5, max_sr, 0.4, [&](double x) {
      return deceptive_at(x) ? spec.deceptive_saccade_rate_hz : spec.base_saccade_rate_hz;
    });
    gs.n_saccades = gs.onsets_s.size();
    ss.gaze = synth_gaze_trace(gs).gaze;

    FauSynthSpec fs;
    fs.seed = rng.next_u64();
    fs.duration_s = spec.duration_s;
    fs.rate_hz = spec.rate_hz;
    const double max_mr = std::max(spec.microexpression_rate_hz, spec.deceptive_microexpression_rate_hz);
    for (double x : poisson_times(rng, 0.5, spec.duration_s - 1.0, max_mr, 1.0, [&](double x) {
           return deceptive_at(x) ? spec.deceptive_microexpression_rate_hz : spec.microexpression_rate_hz;
         })) {
      FauEvent e;
      e.onset_s = x;
      e.duration_s = rng.uniform(0.1, 0.5);
      e.amplitude = 1.0;
      e.aus = {static_cast<std::size_t>(rng.uniform_int(0, kAuCount - 1))};
      fs.events.push_back(e);
    }
    if (fs.events.empty()) fs.n_events = 0;
    ss.fau = synth_fau_trace(fs).trace;

    const std::size_t n = ss.trace.frame_count();
    ss.confidence.assign(n, 0.98);
    ss.landmarks_x.resize(n);
    ss.landmarks_y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double ti = static_cast<double>(i) / spec.rate_hz;
      const double cx = 320.0 + 4.0 * std::sin(kTwoPi * 0.1 * ti), cy = 240.0 + 3.0 * std::cos(kTwoPi * 0.07 * ti);
      ss.landmarks_x[i].resize(68);
      ss.landmarks_y[i].resize(68);
      for (std::size_t k = 0; k < 68; ++k) {
        const double a = kTwoPi * static_cast<double>(k) / 68.0;
        ss.landmarks_x[i][k] = cx + 90.0 * std::cos(a);
        ss.landmarks_y[i][k] = cy + 110.0 * std::sin(a);
      }
    }

    const SyncPattern pattern;
    const double video_offset = rng.uniform(0.0, 3.0);
    const double thermal_offset = rng.uniform(0.0, 3.0);
    auto beacon = [&](double rate, double offset) {
      UniformSeries tr = render_pattern(pattern, rate, spec.duration_s, offset, 40.0, 200.0);
      for (double& v : tr.samples) v += rng.normal(0.0, 3.0);
      return tr;
    };
    ss.sync_traces[SensorKind::Rgb] = beacon(spec.rate_hz, video_offset);
    ss.sync_traces[SensorKind::Nir] = beacon(spec.rate_hz, video_offset);
    ss.sync_traces[SensorKind::Lwir] = beacon(spec.thermal_rate_hz, thermal_offset + pattern.lwir_extra_delay_s);
    ss.sync_offsets_s = {{SensorKind::Rgb, video_offset}, {SensorKind::Nir, video_offset},
                         {SensorKind::Lwir, thermal_offset}};
    out.push_back(std::move(ss));
  }
  return out;
}

}  // namespace physiocue
