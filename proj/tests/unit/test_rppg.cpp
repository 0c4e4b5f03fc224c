#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "physiocue/dsp.hpp"
#include "physiocue/errors.hpp"
#include "physiocue/hr.hpp"
#include "physiocue/rng.hpp"
#include "physiocue/rppg.hpp"
#include "physiocue/spectrum.hpp"
#include "physiocue/synth.hpp"

using namespace physiocue;

namespace {

ChannelTrace make_trace(std::vector<double> r, std::vector<double> g, std::vector<double> b, double rate) {
  ChannelTrace t;
  t.r = UniformSeries(std::move(r), rate);
  t.g = UniformSeries(std::move(g), rate);
  t.b = UniformSeries(std::move(b), rate);
  return t;
}

// Baseline (1,1,1) + 0.01 (0.3,0.5,0.2) sin(2 pi 1.2 t) + 0.002 white noise.
ChannelTrace example_trace(std::uint64_t seed, double seconds, double drift = 0.0) {
  const double rate = 90.0;
  const auto n = static_cast<std::size_t>(seconds * rate);
  const auto w = oracle::sine(1.2, rate, n);
  const auto d = oracle::sine(0.05, rate, n);
  Rng rng(seed);
  std::vector<double> r(n), g(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double common = 1.0 + drift * d[i];
    r[i] = common * (1.0 + 0.01 * 0.3 * w[i]) + 0.002 * rng.normal();
    g[i] = common * (1.0 + 0.01 * 0.5 * w[i]) + 0.002 * rng.normal();
    b[i] = common * (1.0 + 0.01 * 0.2 * w[i]) + 0.002 * rng.normal();
  }
  return make_trace(r, g, b, rate);
}

double peak_of(const PulseEstimate& p) {
  return spectral_peak_frequency(p.waveform, Taper::Hamming, kHrMinHz, kHrMaxHz);
}

double bin_of(std::size_t n, double rate) { return rate / static_cast<double>(padded_fft_size(n, rate)); }

// Mixture of a 1.2 Hz pulse, a 0.05 Hz drift and white noise through an
// invertible 3x3 matrix, on top of a unit baseline.
ChannelTrace mixture(std::uint64_t seed, double seconds, double drift_amp) {
  const double rate = 90.0;
  const auto n = static_cast<std::size_t>(seconds * rate);
  const auto pulse = oracle::sine(1.2, rate, n, 0.01);
  const auto drift = oracle::sine(0.05, rate, n, 0.01 * drift_amp);
  Rng rng(seed);
  const double m[3][3] = {{0.3, 0.8, 0.2}, {0.5, 0.5, 0.3}, {0.2, 0.9, 0.6}};
  std::vector<double> ch[3];
  for (auto& c : ch) c.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s[3] = {pulse[i], drift[i], 0.004 * rng.normal()};
    for (int c = 0; c < 3; ++c) ch[c][i] = 1.0 + m[c][0] * s[0] + m[c][1] * s[1] + m[c][2] * s[2];
  }
  return make_trace(ch[0], ch[1], ch[2], rate);
}

double hr_mae(const PulseEstimate& p, double truth_bpm) {
  const auto hr = windowed_hr(p);
  double s = 0.0;
  for (double v : hr.hr_bpm.samples) s += std::abs(v - truth_bpm);
  return s / static_cast<double>(hr.hr_bpm.size());
}

}  // namespace

TEST_CASE("face box: worked example") {
  const RoiBox out = expand_face_bbox({100, 100, 200, 220});
  CHECK(out.x_min == doctest::Approx(69));
  CHECK(out.x_max == doctest::Approx(231));
  CHECK(out.y_min == doctest::Approx(64));
  CHECK(out.y_max == doctest::Approx(226));
}

TEST_CASE("face box: zero expansion of a square is the identity") {
  const RoiBox sq{10, 20, 60, 70};
  CHECK(expand_face_bbox(sq, RoiExpansion{0, 0, 0, 0}) == sq);
}

TEST_CASE("face box: wide face squares to the expanded width") {
  const RoiBox out = expand_face_bbox({0, 100, 400, 200});
  CHECK(out.width() == doctest::Approx(440));
  CHECK(out.height() == doctest::Approx(440));
}

TEST_CASE("face box: output always contains the input") {
  Rng rng(17);
  for (int i = 0; i < 500; ++i) {
    const double x0 = rng.uniform(0, 500), y0 = rng.uniform(0, 500);
    const RoiBox in{x0, y0, x0 + rng.uniform(1, 300), y0 + rng.uniform(1, 300)};
    const RoiExpansion e{rng.uniform(0, 0.5), rng.uniform(0, 0.5), rng.uniform(0, 0.5), rng.uniform(0, 0.5)};
    const RoiBox out = expand_face_bbox(in, e);
    CHECK(out.contains(in));
    CHECK(out.width() == doctest::Approx(out.height()));
  }
}

TEST_CASE("face box: landmark bounding box") {
  const RoiBox b = landmark_bbox({3, 1, 7}, {5, 9, 2});
  CHECK(b == RoiBox{1, 2, 7, 9});
}

TEST_CASE("CHROM and POS: constant trace gives a flat waveform") {
  const auto t = make_trace(std::vector<double>(900, 0.4), std::vector<double>(900, 0.4),
                            std::vector<double>(900, 0.4), 90.0);
  CHECK(oracle::max_abs(chrom_pulse(t).waveform.samples) < 1e-12);
  CHECK(oracle::max_abs(pos_pulse(t).waveform.samples) < 1e-12);
}

TEST_CASE("CHROM and POS: 1.2 Hz pulse is recovered") {
  const auto t = example_trace(1, 60.0);
  const double bin = bin_of(t.frame_count(), 90.0);
  CHECK(std::abs(peak_of(chrom_pulse(t)) - 1.2) <= bin);
  CHECK(std::abs(peak_of(pos_pulse(t)) - 1.2) <= bin);
}

TEST_CASE("POS: illumination drift is normalized away") {
  const auto t = example_trace(2, 60.0, 0.3);
  CHECK(std::abs(peak_of(pos_pulse(t)) - 1.2) <= bin_of(t.frame_count(), 90.0));
}

TEST_CASE("CHROM: zero-variance Y chrominance is degenerate") {
  // r == b keeps 1.5 R + G - 1.5 B constant while X = 3R - 2G moves.
  const auto w = oracle::sine(1.2, 90.0, 900, 0.01);
  std::vector<double> r(900), g(900, 1.0);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = 1.0 + w[i];
  CHECK_THROWS_AS(chrom_pulse(make_trace(r, g, r, 90.0)), DegenerateSignal);
}

TEST_CASE("CHROM: zero-mean channel is degenerate") {
  const auto t = make_trace(std::vector<double>(900, 1.0), std::vector<double>(900, 1.0),
                            std::vector<double>(900, 0.0), 90.0);
  CHECK_THROWS_AS(chrom_pulse(t), DegenerateSignal);
}

TEST_CASE("estimators preserve length and rate") {
  const auto t = example_trace(3, 30.0);
  for (PulseMethod m : {PulseMethod::Chrom, PulseMethod::Pos, PulseMethod::Poh10, PulseMethod::Poh11}) {
    const auto p = estimate_pulse(t, m, 1);
    CHECK(p.waveform.size() == t.frame_count());
    CHECK(p.waveform.rate_hz == t.rate_hz());
    CHECK(p.method == m);
  }
  CHECK_THROWS_AS(estimate_pulse(t, PulseMethod::External, 1), InvalidInput);
}

TEST_CASE("estimators are invariant to uniform channel scaling") {
  const auto t = example_trace(4, 60.0);
  ChannelTrace s = t;
  for (auto* c : {&s.r, &s.g, &s.b})
    for (double& v : c->samples) v *= 3.7;
  for (PulseMethod m : {PulseMethod::Chrom, PulseMethod::Pos, PulseMethod::Poh10, PulseMethod::Poh11}) {
    const auto a = estimate_pulse(t, m, 5);
    const auto b = estimate_pulse(s, m, 5);
    CHECK(std::abs(oracle::pearson(a.waveform.samples, b.waveform.samples)) > 0.9999);
    const auto ha = windowed_hr(a).hr_bpm.samples, hb = windowed_hr(b).hr_bpm.samples;
    REQUIRE(ha.size() == hb.size());
    for (std::size_t i = 0; i < ha.size(); ++i) CHECK(ha[i] == doctest::Approx(hb[i]).epsilon(1e-9));
  }
}

TEST_CASE("ICA: identical channels are degenerate") {
  const auto w = oracle::sine(1.2, 90.0, 1800, 0.01);
  std::vector<double> x(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) x[i] = 1.0 + w[i];
  const auto t = make_trace(x, x, x, 90.0);
  CHECK_THROWS_AS(ica_pulse(t, IcaVariant::Poh10, 1), DegenerateSignal);
  CHECK_THROWS_AS(ica_pulse(t, IcaVariant::Poh11, 1), DegenerateSignal);
}

TEST_CASE("ICA: the pulse component is selected from a mixture") {
  const auto t = mixture(7, 60.0, 1.0);
  CHECK(std::abs(peak_of(ica_pulse(t, IcaVariant::Poh11, 3)) - 1.2) <= bin_of(t.frame_count(), 90.0));
}

TEST_CASE("ICA: preprocessing never hurts on a separable mixture with strong drift") {
  // Three sources in three channels separate exactly, so both variants reach
  // the quantization floor; the strict ordering needs unseparable drift.
  const auto t = mixture(8, 120.0, 10.0);
  const double e10 = hr_mae(ica_pulse(t, IcaVariant::Poh10, 3), 72.0);
  const double e11 = hr_mae(ica_pulse(t, IcaVariant::Poh11, 3), 72.0);
  CHECK(e11 <= e10);
  CHECK(e11 < 0.25);
}

TEST_CASE("ICA: preprocessing wins when per-channel drift dominates") {
  PulseSynthSpec spec;
  spec.seed = 41;
  spec.drift_amplitude = 0.1;
  spec.drift_walk_sd = 0.02;
  const auto syn = synth_pulse_trace(spec);
  const double e10 = hr_mae(ica_pulse(syn.trace, IcaVariant::Poh10, 3), 72.0);
  const double e11 = hr_mae(ica_pulse(syn.trace, IcaVariant::Poh11, 3), 72.0);
  CHECK(e10 > e11);
}

TEST_CASE("ICA: unmixing recovers independent sources") {
  Rng rng(12);
  const Eigen::Index n = 5000;
  Eigen::MatrixXd s(2, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    s(0, i) = std::sin(0.05 * static_cast<double>(i));
    s(1, i) = rng.uniform(-1, 1);
  }
  Eigen::Matrix2d a;
  a << 1.0, 0.6, 0.4, 1.0;
  const IcaResult r = fast_ica(a * s, 9);
  CHECK(r.converged);
  for (Eigen::Index k = 0; k < 2; ++k) {
    double best = 0.0;
    for (Eigen::Index c = 0; c < 2; ++c) {
      std::vector<double> x(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
      for (Eigen::Index i = 0; i < n; ++i) {
        x[static_cast<std::size_t>(i)] = r.sources(c, i);
        y[static_cast<std::size_t>(i)] = s(k, i);
      }
      best = std::max(best, std::abs(oracle::pearson(x, y)));
    }
    CHECK(best > 0.99);
  }
}

TEST_CASE("clean synthetic family: every estimator within 1 bpm") {
  for (std::uint64_t seed : {31u, 32u, 33u}) {
    PulseSynthSpec spec;
    spec.seed = seed;
    spec.duration_s = 60.0;
    spec.amplitude = 0.005;
    spec.noise_sd = 0.002;
    const auto syn = synth_pulse_trace(spec);
    for (PulseMethod m : {PulseMethod::Chrom, PulseMethod::Pos, PulseMethod::Poh10, PulseMethod::Poh11}) {
      CHECK(hr_mae(estimate_pulse(syn.trace, m, seed), 72.0) <= 1.0);
    }
  }
}

TEST_CASE("stitch: single clip is standardized and tapered") {
  const auto x = oracle::sine(1.0, 90.0, 135);
  const auto out = stitch_overlap_add({UniformSeries(x, 90.0)}, 135, 67);
  const auto z = standardize_samples(x);
  const auto w = taper_weights(Taper::Hann, 135);
  REQUIRE(out.size() == 135);
  for (std::size_t i = 0; i < 135; ++i) CHECK(out[i] == doctest::Approx(z[i] * w[i]).epsilon(1e-12));
}

TEST_CASE("stitch: sinusoid clips reassemble the source") {
  const auto x = oracle::sine(1.2, 90.0, 90 * 40);
  const UniformSeries s(x, 90.0);
  const auto clips = cut_clips(s, 135, 67);
  const auto out = stitch_overlap_add(clips, 135, 67);
  REQUIRE(out.size() == (clips.size() - 1) * 67 + 135);
  const auto z = standardize_samples(std::vector<double>(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(out.size())));
  const std::vector<double> a(out.samples.begin() + 135, out.samples.end() - 135);
  const std::vector<double> b(z.begin() + 135, z.end() - 135);
  CHECK(oracle::pearson(a, b) >= 0.99);
}

TEST_CASE("stitch: constant clips and mismatched lengths are rejected") {
  const UniformSeries c(std::vector<double>(135, 1.0), 90.0);
  CHECK_THROWS_AS(stitch_overlap_add({c, c}, 135, 67), DegenerateSignal);
  const UniformSeries short_clip(oracle::sine(1.0, 90.0, 100), 90.0);
  CHECK_THROWS_AS(stitch_overlap_add({short_clip}, 135, 67), InvalidInput);
}

TEST_CASE("method names round trip") {
  for (PulseMethod m : {PulseMethod::Chrom, PulseMethod::Pos, PulseMethod::Poh10, PulseMethod::Poh11}) {
    CHECK(parse_method(method_name(m)) == m);
  }
  CHECK_FALSE(parse_method("nope").has_value());
}
