#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "physiocue/errors.hpp"
#include "physiocue/hr.hpp"
#include "physiocue/oculomotor.hpp"
#include "physiocue/stats.hpp"
#include "physiocue/synth.hpp"

using namespace physiocue;

namespace {

double waveform_at(double phi) {
  return std::sin(2 * std::numbers::pi * phi) + 0.5 * std::sin(4 * std::numbers::pi * phi + std::numbers::pi / 4);
}

std::vector<PairedSample> paired_emr(const std::vector<ResponseValues>& v) {
  std::vector<LabeledValue> lv;
  for (const auto& r : v) lv.push_back({r.subject_id, r.label, r.emr});
  return pair_by_subject(lv);
}

std::uint64_t digest(const SynthPulse& p) {
  auto h = oracle::fnv1a(p.trace.r.samples);
  h = oracle::fnv1a(p.trace.g.samples, h);
  h = oracle::fnv1a(p.trace.b.samples, h);
  return oracle::fnv1a(p.oximeter.waveform.samples, h);
}

}  // namespace

TEST_CASE("pulse: constant schedule without noise") {
  PulseSynthSpec spec;
  spec.noise_sd = 0.0;
  spec.duration_s = 30.0;
  const auto p = synth_pulse_trace(spec);
  for (double v : p.hr.hr_bpm.samples) CHECK(v == 72.0);
  for (std::size_t i = 0; i < p.waveform.size(); i += 7) {
    const double t = static_cast<double>(i) / 90.0;
    CHECK(p.waveform[i] == doctest::Approx(waveform_at(1.2 * t)).epsilon(1e-9));
    CHECK(p.trace.g[i] == doctest::Approx(1.0 + 0.5 * 0.01 * waveform_at(1.2 * t)).epsilon(1e-12));
    CHECK(p.trace.r[i] == doctest::Approx(1.0 + 0.3 * 0.01 * waveform_at(1.2 * t)).epsilon(1e-12));
  }
  CHECK(p.oximeter.rate_hz() == 60.0);
  CHECK_NOTHROW(p.trace.validate());
  CHECK_NOTHROW(p.oximeter.validate());
}

TEST_CASE("pulse: linear ramp schedule is reproduced exactly") {
  PulseSynthSpec spec;
  spec.duration_s = 60.0;
  spec.hr_schedule = {{0.0, 60.0}, {60.0, 90.0}};
  const auto p = synth_pulse_trace(spec);
  for (std::size_t i = 0; i < p.hr.hr_bpm.size(); ++i) {
    const double t = p.hr.hr_bpm.time_at(i);
    CHECK(p.hr.hr_bpm[i] == doctest::Approx(60.0 + 30.0 * t / 60.0).epsilon(1e-12));
  }
  // Phase is the integral of the schedule: 0.5 * (1 + 1 + t / 60) * t cycles.
  const double t = 45.0;
  const double phi = t + 0.25 * t * t / 60.0;
  CHECK(p.waveform[static_cast<std::size_t>(t * 90)] == doctest::Approx(waveform_at(phi)).epsilon(1e-6));
}

TEST_CASE("pulse: schedule helper") {
  const std::vector<HrKnot> s{{10, 60}, {20, 80}, {20, 100}};
  CHECK(hr_at(s, 0) == 60);
  CHECK(hr_at(s, 15) == doctest::Approx(70));
  CHECK(hr_at(s, 25) == 100);
}

TEST_CASE("pulse: no pulse, no false 72 bpm") {
  PulseSynthSpec spec;
  spec.amplitude = 0.0;
  spec.duration_s = 60.0;
  const auto p = synth_pulse_trace(spec);
  for (PulseMethod m : {PulseMethod::Chrom, PulseMethod::Pos}) {
    try {
      const auto hr = windowed_hr(estimate_pulse(p.trace, m, 1)).hr_bpm.samples;
      std::size_t near = 0;
      for (double v : hr) near += std::abs(v - 72.0) <= 1.0 ? 1 : 0;
      CHECK(static_cast<double>(near) < 0.5 * static_cast<double>(hr.size()));
    } catch (const DegenerateSignal&) {
    }
  }
}

TEST_CASE("pulse: baseline scales the pulse") {
  PulseSynthSpec spec;
  spec.noise_sd = 0.0;
  spec.duration_s = 10.0;
  spec.baseline = {2.0, 1.0, 0.5};
  const auto p = synth_pulse_trace(spec);
  for (std::size_t i = 0; i < p.waveform.size(); i += 11) {
    CHECK(p.trace.r[i] == doctest::Approx(2.0 * (1.0 + 0.3 * 0.01 * p.waveform[i])).epsilon(1e-12));
    CHECK(p.trace.b[i] == doctest::Approx(0.5 * (1.0 + 0.2 * 0.01 * p.waveform[i])).epsilon(1e-12));
  }
}

TEST_CASE("pulse: same seed, same bits") {
  PulseSynthSpec spec;
  spec.seed = 2024;
  spec.duration_s = 20.0;
  spec.drift_amplitude = 0.05;
  spec.drift_walk_sd = 0.01;
  const auto a = synth_pulse_trace(spec), b = synth_pulse_trace(spec);
  CHECK(digest(a) == digest(b));
  CHECK(digest(a) == 10219364258678134858ull);
  spec.seed = 2025;
  CHECK(digest(synth_pulse_trace(spec)) != digest(a));
}

TEST_CASE("gaze: no saccades, nothing detected") {
  GazeSynthSpec spec;
  spec.n_saccades = 0;
  const auto g = synth_gaze_trace(spec);
  CHECK(g.saccades.empty());
  CHECK(detect_saccades(angular_velocity(preprocess_gaze(g.gaze, 3))).empty());
}

TEST_CASE("gaze: twenty saccades of 3 to 8 degrees with known frames") {
  GazeSynthSpec spec;
  spec.min_amplitude_deg = 3.0;
  spec.velocity_noise_dps = 0.0;
  const auto g = synth_gaze_trace(spec);
  REQUIRE(g.saccades.size() == 20);
  CHECK_NOTHROW(g.gaze.validate());
  const double to_deg = 180.0 / std::numbers::pi;
  for (const auto& s : g.saccades) {
    CHECK(s.amplitude_deg >= 3.0);
    CHECK(s.amplitude_deg <= 8.0);
    CHECK(s.offset_s - s.onset_s == doctest::Approx(saccade_duration_s(s.amplitude_deg)));
    const std::size_t a = s.raw_event.start_frame, b = s.raw_event.end_frame + 1;
    CHECK(static_cast<double>(a) / 90.0 <= s.onset_s);
    CHECK(static_cast<double>(b) / 90.0 >= s.offset_s);
    const double dx = (g.gaze.gaze_x_rad[b] - g.gaze.gaze_x_rad[a]) * to_deg;
    const double dy = (g.gaze.gaze_y_rad[b] - g.gaze.gaze_y_rad[a]) * to_deg;
    CHECK(std::hypot(dx, dy) == doctest::Approx(s.amplitude_deg).epsilon(1e-9));
  }
  CHECK(saccade_duration_s(10.0) == doctest::Approx(0.043));
}

TEST_CASE("gaze: fixation jitter gives the requested velocity noise") {
  GazeSynthSpec spec;
  spec.n_saccades = 0;
  spec.duration_s = 120.0;
  const auto pre = preprocess_gaze(synth_gaze_trace(spec).gaze, 3);
  const double scale = pre.rate_hz() * 180.0 / std::numbers::pi;
  double ss = 0.0;
  for (std::size_t i = 0; i + 1 < pre.size(); ++i) {
    const double v = (pre.gaze_x_rad[i + 1] - pre.gaze_x_rad[i]) * scale;
    ss += v * v;
  }
  const double sd = std::sqrt(ss / static_cast<double>(pre.size() - 1));
  CHECK(sd == doctest::Approx(10.0).epsilon(0.1));
}

TEST_CASE("FAU: empty schedule and constructed schedule") {
  FauSynthSpec none;
  none.n_events = 0;
  const auto a = synth_fau_trace(none);
  CHECK(a.intervals.empty());
  CHECK_NOTHROW(a.trace.validate());
  CHECK(a.trace.au.size() == kAuCount);

  FauSynthSpec spec;
  spec.noise_sd = 0.0;
  spec.events = {{10.0, 0.2, 1.0, {3}}, {20.0, 0.1, 0.5, {0, 17}}};
  const auto b = synth_fau_trace(spec);
  REQUIRE(b.intervals.size() == 2);
  CHECK(b.intervals[0].start == 900);
  CHECK(b.intervals[0].end == 900 + 17 - 1);
  CHECK(b.intervals[1].start == 1800);
  CHECK(b.intervals[1].end == 1800 + 9 - 1);
  CHECK(b.trace.au[3][900 + 8] == doctest::Approx(2.0));
  CHECK(b.trace.au[3][900] == doctest::Approx(1.0));
  CHECK(b.trace.au[17][1800 + 4] == doctest::Approx(1.5));
  CHECK(b.trace.au[5][1804] == 1.0);
}

TEST_CASE("responses: no offset is rarely significant") {
  int quiet = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    ResponseSynthSpec spec;
    spec.seed = seed;
    if (paired_t_test(paired_emr(synth_responses(spec))).p_two_sided >= 0.01) ++quiet;
  }
  CHECK(quiet >= 95);
}

TEST_CASE("responses: a five-sigma offset is highly significant") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    ResponseSynthSpec spec;
    spec.seed = seed;
    spec.emr_deceptive_offset = 5.0 * spec.emr_within_sd;
    CHECK(paired_t_test(paired_emr(synth_responses(spec))).p_two_sided < 1e-4);
  }
}

TEST_CASE("responses: one subject cannot be tested") {
  ResponseSynthSpec spec;
  spec.n_subjects = 1;
  const auto v = synth_responses(spec);
  CHECK_THROWS_AS(paired_t_test(paired_emr(v)), InvalidInput);
}

TEST_CASE("responses: every subject answers both ways") {
  ResponseSynthSpec spec;
  spec.questions_per_subject = 2;
  spec.deceptive_fraction = 0.0;
  const auto v = synth_responses(spec);
  CHECK(paired_emr(v).size() == spec.n_subjects);
}

TEST_CASE("session: every generated input satisfies its invariants") {
  SessionSynthSpec spec;
  spec.n_subjects = 2;
  spec.duration_s = 90.0;
  const auto s = synth_session(spec);
  REQUIRE(s.size() == 2);
  for (const auto& sub : s) {
    CHECK_NOTHROW(sub.trace.validate());
    CHECK_NOTHROW(sub.oximeter.validate());
    CHECK_NOTHROW(sub.gaze.validate());
    CHECK_NOTHROW(sub.fau.validate());
    for (const auto& a : sub.annotations) CHECK_NOTHROW(a.validate());
    CHECK(sub.landmarks_x.size() == sub.trace.frame_count());
    CHECK(sub.sync_traces.size() == 3);
    CHECK(sub.sync_offsets_s.size() == 3);
  }
  const auto again = synth_session(spec);
  CHECK(oracle::fnv1a(again[1].trace.g.samples) == oracle::fnv1a(s[1].trace.g.samples));
}
