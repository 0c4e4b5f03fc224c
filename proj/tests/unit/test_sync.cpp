#include <doctest.h>

#include <cmath>
#include <vector>

#include "physiocue/errors.hpp"
#include "physiocue/rng.hpp"
#include "physiocue/sync.hpp"

using namespace physiocue;

namespace {

EdgeSequence shifted(const EdgeSequence& e, double by) {
  EdgeSequence out = e;
  for (auto& x : out.edges) x.time_s += by;
  return out;
}

}  // namespace

TEST_CASE("pattern: first edges and cycle length") {
  const SyncPattern p;
  CHECK(p.cycle_s() == doctest::Approx(81.0));
  const auto e = generate_pattern(p, 1);
  REQUIRE(e.edges.size() == 18);
  const double times[] = {0.0, 2.5, 5.0, 8.0, 11.0};
  for (int i = 0; i < 5; ++i) {
    CHECK(e.edges[static_cast<std::size_t>(i)].time_s == doctest::Approx(times[i]));
    CHECK(e.edges[static_cast<std::size_t>(i)].direction == (i % 2 == 0 ? EdgeDirection::Rising : EdgeDirection::Falling));
  }
  CHECK_NOTHROW(e.validate());
}

TEST_CASE("pattern: cycles repeat every 81 s") {
  const auto one = generate_pattern(SyncPattern{}, 1);
  const auto two = generate_pattern(SyncPattern{}, 2);
  REQUIRE(two.edges.size() == 36);
  for (std::size_t i = 0; i < 18; ++i) {
    CHECK(two.edges[18 + i].time_s == doctest::Approx(one.edges[i].time_s + 81.0));
    CHECK(two.edges[18 + i].direction == one.edges[i].direction);
  }
}

TEST_CASE("pattern: on/off state agrees with the edges") {
  const SyncPattern p;
  CHECK(pattern_is_on(p, 0.1));
  CHECK_FALSE(pattern_is_on(p, 2.6));
  CHECK(pattern_is_on(p, 5.1));
  CHECK(pattern_is_on(p, 81.1));
}

TEST_CASE("edge sequences must alternate") {
  EdgeSequence bad{{{0.0, EdgeDirection::Rising}, {1.0, EdgeDirection::Rising}}};
  CHECK_THROWS(bad.validate());
  EdgeSequence unordered{{{1.0, EdgeDirection::Rising}, {0.5, EdgeDirection::Falling}}};
  CHECK_THROWS(unordered.validate());
}

TEST_CASE("binarize: clean square wave edges within half a sample") {
  const SyncPattern p;
  const double rate = 30.0, offset = 0.0137;
  const auto trace = render_pattern(p, rate, 100.0, offset, 10.0, 200.0);
  const auto e = binarize_intensity(trace);
  const auto truth = generate_pattern(p, 2);
  std::size_t k = 0;
  for (const auto& edge : e.edges) {
    while (k < truth.edges.size() && truth.edges[k].time_s + offset < edge.time_s - 1.0) ++k;
    REQUIRE(k < truth.edges.size());
    CHECK(std::abs(edge.time_s - (truth.edges[k].time_s + offset)) <= 0.5 / rate + 1e-9);
    CHECK(edge.direction == truth.edges[k].direction);
    ++k;
  }
  CHECK(e.edges.size() >= 20);
}

TEST_CASE("binarize: flat trace has no edges") {
  CHECK_THROWS_AS(binarize_intensity(UniformSeries(std::vector<double>(900, 5.0), 90.0)), InsufficientEvidence);
}

TEST_CASE("binarize: hysteresis rejects noise in at least 99 of 100 trials") {
  const SyncPattern p;
  const auto clean = render_pattern(p, 90.0, 90.0, 0.0);
  const std::size_t expected = binarize_intensity(clean).edges.size();
  int ok = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Rng rng(seed);
    auto noisy = clean;
    for (double& v : noisy.samples) v += rng.normal(0.0, 0.05);
    if (binarize_intensity(noisy).edges.size() == expected) ++ok;
  }
  CHECK(ok >= 99);
}

TEST_CASE("offset: constructed shift for each sensor") {
  const SyncPattern p;
  const auto obs = shifted(generate_pattern(p, 1), 1.0);
  CHECK(estimate_offset(obs, p, SensorKind::Rgb).offset_s == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(estimate_offset(obs, p, SensorKind::Nir).offset_s - 1.0) <= 1e-3);
  CHECK(std::abs(estimate_offset(obs, p, SensorKind::Lwir).offset_s - 0.95) <= 1e-3);
  CHECK(estimate_offset(obs, p, SensorKind::Rgb).offset_s - estimate_offset(obs, p, SensorKind::Lwir).offset_s ==
        doctest::Approx(0.05).epsilon(1e-9));
}

TEST_CASE("offset: thermal-rate sampling recovers the shift within half a sample") {
  const SyncPattern p;
  const auto trace = render_pattern(p, 9.0, 120.0, 1.0);
  const auto est = estimate_offset(binarize_intensity(trace), p, SensorKind::Rgb);
  CHECK(std::abs(est.offset_s - 1.0) <= 1.0 / 18.0);
}

TEST_CASE("offset: too few edges") {
  const SyncPattern p;
  EdgeSequence e = generate_pattern(p, 1);
  e.edges.resize(5);
  CHECK_THROWS_AS(estimate_offset(e, p, SensorKind::Rgb), InsufficientEvidence);
}

TEST_CASE("offset: exact on the grid across the whole cycle") {
  const SyncPattern p;
  const auto tmpl = generate_pattern(p, 2);
  Rng rng(3);
  for (int i = 0; i < 40; ++i) {
    const double shift = static_cast<double>(rng.uniform_int(0, 80999)) * 1e-3;
    const auto est = estimate_offset(shifted(tmpl, shift), p, SensorKind::Rgb);
    CHECK(est.offset_s == doctest::Approx(shift).epsilon(1e-9));
    CHECK(est.residual_rms_s < 1e-9);
  }
}

TEST_CASE("offset: template self-match has a unique minimum at rotation zero") {
  const SyncPattern p;
  const auto tmpl = generate_pattern(p, 1);
  CHECK(offset_cost(tmpl, p, 0.0) < 1e-18);
  double runner_up = 1e300;
  for (int r = 1; r < 81000; ++r) runner_up = std::min(runner_up, offset_cost(tmpl, p, r * 1e-3));
  CHECK(runner_up > 0.0);
}

TEST_CASE("offset: binarize then estimate at several rates") {
  const SyncPattern p;
  Rng rng(12);
  for (double rate : {2.0, 9.0, 30.0, 90.0}) {
    for (int i = 0; i < 5; ++i) {
      const double off = rng.uniform(0.0, 81.0);
      const auto trace = render_pattern(p, rate, 100.0, off);
      const auto est = estimate_offset(binarize_intensity(trace), p, SensorKind::Rgb);
      double err = std::fmod(std::abs(est.offset_s - off), 81.0);
      err = std::min(err, 81.0 - err);
      CHECK(err <= 0.5 / rate + 1e-3);
    }
  }
}

TEST_CASE("sensor names round trip") {
  for (SensorKind s : {SensorKind::Rgb, SensorKind::Nir, SensorKind::Lwir}) CHECK(parse_sensor(sensor_name(s)) == s);
  CHECK_THROWS(parse_sensor("uv"));
}
