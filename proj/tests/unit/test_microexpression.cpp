#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "physiocue/errors.hpp"
#include "physiocue/microexpression.hpp"
#include "physiocue/rng.hpp"
#include "physiocue/synth.hpp"

using namespace physiocue;

namespace {

FauTrace flat_trace(std::size_t n, double rate = 90.0, double value = 0.0) {
  FauTrace t;
  for (std::size_t k = 0; k < kAuCount; ++k) t.au.emplace_back(std::vector<double>(n, value), rate);
  return t;
}

// Triangle 0 -> peak -> 0 over `span` frames (odd) with its apex at `apex`.
void add_bump(FauTrace& t, std::size_t au, std::size_t apex, std::size_t span, double peak) {
  const auto h = static_cast<double>((span - 1) / 2);
  for (std::size_t k = 0; k < span; ++k) {
    const std::size_t i = apex - (span - 1) / 2 + k;
    t.au[au].samples[i] += peak * (1.0 - std::abs(static_cast<double>(k) - h) / h);
  }
}

LikelihoodMap single_scale(std::vector<double> values, std::size_t len = 9) {
  LikelihoodMap m;
  m.window_lens = {len};
  m.values = {std::move(values)};
  m.rate_hz = 90.0;
  return m;
}

bool pairwise_disjoint(const std::vector<MicroexpressionCandidate>& c) {
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = i + 1; j < c.size(); ++j)
      if (c[i].overlaps(c[j])) return false;
  return true;
}

double phi(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Median and MAD of max(0, max of 18 iid N(0, 1.5 sigma^2)), the likelihood
// at the smallest window under white Gaussian AU noise.
struct NoiseLaw {
  double sigma;
  double cdf(double x) const { return x < 0 ? 0.0 : std::pow(phi(x / (std::sqrt(1.5) * sigma)), 18.0); }
  double median() const {
    double lo = 0, hi = 10 * sigma;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (cdf(mid) < 0.5 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }
  double mad() const {
    const double m = median();
    double lo = 0, hi = 10 * sigma;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (cdf(m + mid) - cdf(m - mid) < 0.5 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }
};

}  // namespace

TEST_CASE("window lengths at 90 Hz") {
  CHECK(default_window_lengths(90.0) == std::vector<std::size_t>{9, 15, 27, 45});
  for (std::size_t l : default_window_lengths(30.0)) CHECK(l % 2 == 1);
}

TEST_CASE("scan: a bump spanning the window scores its height") {
  auto t = flat_trace(200);
  add_bump(t, 4, 100, 15, 1.0);
  const std::vector<std::size_t> lens{9, 15, 27};
  const auto m = scan_window_likelihood(t, lens);
  CHECK(m.values[1][100] == doctest::Approx(1.0));
  for (std::size_t s = 0; s < lens.size(); ++s) {
    for (double v : m.values[s]) CHECK(v <= 1.0 + 1e-12);
  }
}

TEST_CASE("scan: flat trace scores zero everywhere") {
  const auto m = scan_window_likelihood(flat_trace(200, 90.0, 2.5), default_window_lengths(90.0));
  for (const auto& row : m.values)
    for (double v : row) CHECK(v == 0.0);
}

TEST_CASE("scan: a bump twice the window length scores lower at that window") {
  const std::size_t L = 9;
  auto t = flat_trace(200);
  add_bump(t, 0, 100, 2 * L - 1, 1.0);
  const std::vector<std::size_t> lens{L, 2 * L - 1};
  const auto m = scan_window_likelihood(t, lens);
  // Direct evaluation: endpoints of the short window sit at height 1 - 4/8.
  CHECK(m.values[0][100] == doctest::Approx(0.5));
  CHECK(m.values[1][100] == doctest::Approx(1.0));
  CHECK(m.values[0][100] < m.values[1][100]);
}

TEST_CASE("scan: invariant to adding a constant to a channel") {
  const auto syn = synth_fau_trace(FauSynthSpec{});
  FauTrace shifted = syn.trace;
  for (double& v : shifted.au[7].samples) v += 3.0;
  const auto lens = default_window_lengths(90.0);
  const auto a = scan_window_likelihood(syn.trace, lens);
  const auto b = scan_window_likelihood(shifted, lens);
  for (std::size_t s = 0; s < lens.size(); ++s)
    for (std::size_t i = 0; i < a.values[s].size(); ++i)
      CHECK(a.values[s][i] == doctest::Approx(b.values[s][i]).epsilon(1e-9));
}

TEST_CASE("threshold: flat trace, linearity in k, short trace") {
  CHECK(dynamic_threshold(flat_trace(900), 3.0) == 0.0);
  const auto syn = synth_fau_trace(FauSynthSpec{});
  const double m = dynamic_threshold(syn.trace, 0.0);
  const double t1 = dynamic_threshold(syn.trace, 2.5);
  const double t2 = dynamic_threshold(syn.trace, 5.0);
  CHECK(t2 - m == doctest::Approx(2.0 * (t1 - m)).epsilon(1e-12));
  CHECK_THROWS_AS(dynamic_threshold(flat_trace(899), 3.0), InvalidInput);
}

TEST_CASE("threshold: Gaussian noise matches the analytic median and MAD") {
  const double sigma = 0.05;
  const NoiseLaw law{sigma};
  const double med = law.median(), mad = law.mad();
  double sum_med = 0, sum_mad = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    FauSynthSpec spec;
    spec.seed = seed;
    spec.n_events = 0;
    spec.noise_sd = sigma;
    const auto syn = synth_fau_trace(spec);
    const double m = dynamic_threshold(syn.trace, 0.0);
    const double d = dynamic_threshold(syn.trace, 1.0) - m;
    CHECK(std::abs(m - med) <= 0.05 * med);
    CHECK(std::abs(d - mad) <= 0.15 * mad);
    sum_med += m;
    sum_mad += d;
  }
  CHECK(sum_med / 100 == doctest::Approx(med).epsilon(0.01));
  CHECK(sum_mad / 100 == doctest::Approx(mad).epsilon(0.02));
}

TEST_CASE("select: disjoint peaks kept, overlapping peak dropped, sub-threshold empty") {
  std::vector<double> v(120, 0.0);
  v[20] = 0.9;
  v[60] = 0.8;
  auto c = select_candidates(single_scale(v), 0.5);
  REQUIRE(c.size() == 2);
  CHECK(c[0].apex_frame == 20);
  CHECK(c[0].onset_frame == 16);
  CHECK(c[0].offset_frame == 24);
  CHECK(c[1].apex_frame == 60);

  v[60] = 0.0;
  v[24] = 0.8;
  c = select_candidates(single_scale(v), 0.5);
  REQUIRE(c.size() == 1);
  CHECK(c[0].likelihood == 0.9);

  CHECK(select_candidates(single_scale(v), 0.95).empty());
}

TEST_CASE("select: output is non-overlapping and shrinks as the threshold rises") {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    LikelihoodMap m;
    m.window_lens = {9, 15, 27, 45};
    m.rate_hz = 90.0;
    for (std::size_t s = 0; s < 4; ++s) {
      std::vector<double> row(900);
      for (double& x : row) x = std::max(0.0, rng.normal(0.2, 0.3));
      m.values.push_back(row);
    }
    std::size_t prev = SIZE_MAX;
    for (double thr = 0.0; thr <= 1.5; thr += 0.05) {
      const auto c = select_candidates(m, thr);
      CHECK(pairwise_disjoint(c));
      CHECK(c.size() <= prev);
      prev = c.size();
      for (std::size_t i = 1; i < c.size(); ++i) CHECK(c[i - 1].onset_frame < c[i].onset_frame);
    }
  }
}

TEST_CASE("spotting: candidate count is non-increasing in k") {
  FauSynthSpec spec;
  spec.seed = 3;
  spec.amplitude = 0.5;
  const auto syn = synth_fau_trace(spec);
  std::size_t prev = SIZE_MAX;
  for (double k = 0.0; k <= 30.0; k += 1.0) {
    SpottingOptions o;
    o.k = k;
    const auto c = spot_microexpressions(syn.trace, o);
    CHECK(pairwise_disjoint(c));
    CHECK(c.size() <= prev);
    prev = c.size();
  }
}

TEST_CASE("interval F1: worked examples") {
  const std::vector<Interval> a{{10, 20}};
  auto s = interval_f1(a, a);
  CHECK(s.precision == 1.0);
  CHECK(s.recall == 1.0);
  CHECK(s.f1 == 1.0);

  CHECK(interval_iou({10, 20}, {15, 25}) == doctest::Approx(5.0 / 15.0));
  CHECK(interval_f1(a, std::vector<Interval>{{15, 25}}).f1 == 0.0);

  s = interval_f1(std::vector<Interval>{{10, 20}, {40, 50}}, std::vector<Interval>{{11, 20}});
  CHECK(s.true_positives == 1);
  CHECK(s.precision == doctest::Approx(0.5));
  CHECK(s.recall == doctest::Approx(1.0));
  CHECK(s.f1 == doctest::Approx(2.0 / 3.0));

  CHECK(interval_f1({}, {}).f1 == 1.0);
  const auto e = interval_f1({}, a);
  CHECK(e.precision == 0.0);
  CHECK(e.f1 == 0.0);
  CHECK(interval_f1(a, {}).f1 == 0.0);
}

TEST_CASE("interval F1: swapping sets exchanges precision and recall") {
  Rng rng(6);
  for (int t = 0; t < 100; ++t) {
    std::vector<Interval> p, g;
    for (int i = 0; i < 6; ++i) {
      const double s1 = rng.uniform(0, 100), s2 = rng.uniform(0, 100);
      p.push_back({s1, s1 + rng.uniform(2, 10)});
      g.push_back({s2, s2 + rng.uniform(2, 10)});
    }
    p.resize(static_cast<std::size_t>(rng.uniform_int(1, 6)));
    const auto a = interval_f1(p, g), b = interval_f1(g, p);
    CHECK(a.precision == doctest::Approx(b.recall));
    CHECK(a.recall == doctest::Approx(b.precision));
    CHECK(a.f1 == doctest::Approx(b.f1));
  }
}

TEST_CASE("ME rate: worked examples") {
  IntervalAnnotation iv;
  iv.start_s = 0.0;
  iv.end_s = 8.0;
  std::vector<MicroexpressionCandidate> c(2);
  c[0].apex_frame = 90;
  c[1].apex_frame = 450;
  CHECK(me_rate_over_interval(c, iv, 90.0) == doctest::Approx(0.25));
  CHECK(me_rate_over_interval({}, iv, 90.0) == 0.0);
  c[1].apex_frame = 720;  // exactly at 8 s
  CHECK(me_rate_over_interval(c, iv, 90.0) == doctest::Approx(0.125));
}

TEST_CASE("k calibration picks a threshold that separates bumps from noise") {
  std::vector<SpottingExample> ex;
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    FauSynthSpec spec;
    spec.seed = seed;
    spec.amplitude = 0.5;
    const auto syn = synth_fau_trace(spec);
    ex.push_back({syn.trace, syn.intervals});
  }
  const std::vector<double> grid{1, 3, 6, 10, 15, 20, 40};
  const auto fit = fit_threshold_k(ex, grid);
  CHECK(fit.k > 3.0);
  CHECK(fit.f1 >= 0.9);
  SpottingOptions o;
  o.k = fit.k;
  std::size_t tp = 0, np = 0, ng = 0;
  for (const auto& e : ex) {
    const auto pred = candidate_intervals(spot_microexpressions(e.trace, o));
    tp += interval_f1(pred, e.truth).true_positives;
    np += pred.size();
    ng += e.truth.size();
  }
  CHECK(2.0 * static_cast<double>(tp) / static_cast<double>(np + ng) == doctest::Approx(fit.f1));
}

TEST_CASE("trace validation") {
  auto t = flat_trace(100);
  CHECK_NOTHROW(t.validate());
  t.au.pop_back();
  CHECK_THROWS(t.validate());
}
