#include "physiocue/sync.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>

#include "physiocue/errors.hpp"

namespace physiocue {

double SyncPattern::cycle_s() const { return std::accumulate(periods_s.begin(), periods_s.end(), 0.0); }

void SyncPattern::validate() const {
  if (periods_s.empty()) throw InvalidInput("SyncPattern: no periods");
  for (double p : periods_s) {
    if (!(p > 0.0)) throw InvalidInput("SyncPattern: periods must be positive");
  }
  if (!(duty > 0.0 && duty < 1.0)) throw InvalidInput("SyncPattern: duty must lie in (0, 1)");
  if (!(lwir_extra_delay_s >= 0.0)) throw InvalidInput("SyncPattern: negative thermal delay");
}

void EdgeSequence::validate() const {
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i].time_s > edges[i - 1].time_s)) throw InvalidInput("EdgeSequence: times must increase");
    if (edges[i].direction == edges[i - 1].direction) throw InvalidInput("EdgeSequence: directions must alternate");
  }
}

const char* sensor_name(SensorKind s) noexcept {
  switch (s) {
    case SensorKind::Rgb: return "rgb";
    case SensorKind::Nir: return "nir";
    case SensorKind::Lwir: return "lwir";
  }
  return "?";
}

SensorKind parse_sensor(const std::string& name) {
  std::string s;
  for (char c : name) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "rgb") return SensorKind::Rgb;
  if (s == "nir") return SensorKind::Nir;
  if (s == "lwir") return SensorKind::Lwir;
  throw InvalidInput("unknown sensor '" + name + "'");
}

EdgeSequence generate_pattern(const SyncPattern& pattern, std::size_t n_cycles) {
  pattern.validate();
  if (n_cycles < 1) throw InvalidInput("generate_pattern: n_cycles must be >= 1");
  const auto first = pattern.rising_first ? EdgeDirection::Rising : EdgeDirection::Falling;
  const auto second = pattern.rising_first ? EdgeDirection::Falling : EdgeDirection::Rising;
  const double cycle = pattern.cycle_s();
  EdgeSequence seq;
  for (std::size_t c = 0; c < n_cycles; ++c) {
    double t = cycle * static_cast<double>(c);
    for (double p : pattern.periods_s) {
      seq.edges.push_back({t, first});
      seq.edges.push_back({t + p * pattern.duty, second});
      t += p;
    }
  }
  return seq;
}

bool pattern_is_on(const SyncPattern& pattern, double t) {
  const double cycle = pattern.cycle_s();
  double u = std::fmod(t, cycle);
  if (u < 0) u += cycle;
  for (double p : pattern.periods_s) {
    if (u < p) {
      const bool first_half = u < p * pattern.duty;
      return first_half == pattern.rising_first;
    }
    u -= p;
  }
  return !pattern.rising_first;
}

UniformSeries render_pattern(const SyncPattern& pattern, double rate_hz, double duration_s, double offset_s,
                             double low, double high, double start_time_s) {
  pattern.validate();
  if (!(rate_hz > 0.0) || !(duration_s > 0.0)) throw InvalidInput("render_pattern: rate and duration must be positive");
  const auto n = static_cast<std::size_t>(std::floor(duration_s * rate_hz + 1e-9));
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = start_time_s + static_cast<double>(i) / rate_hz;
    x[i] = pattern_is_on(pattern, t - offset_s) ? high : low;
  }
  return UniformSeries(std::move(x), rate_hz, start_time_s);
}

EdgeSequence binarize_intensity(const UniformSeries& trace, const BinarizeOptions& options) {
  if (trace.size() < 2) throw InsufficientEvidence("binarize_intensity: trace too short");
  const auto& x = trace.samples;
  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  const double lo = *lo_it, hi = *hi_it;
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw InvalidInput("binarize_intensity: non-finite samples");
  if (!(hi - lo > 1e-12 * std::max(std::abs(hi), std::abs(lo))) || hi == lo) {
    throw InsufficientEvidence("binarize_intensity: flat trace, no edges");
  }
  const double th = options.threshold;
  const double up = th + options.hysteresis, down = th - options.hysteresis;
  auto norm = [&](std::size_t i) { return (x[i] - lo) / (hi - lo); };

  EdgeSequence seq;
  bool on = norm(0) >= th;
  std::size_t last = 0;  // search floor for the crossing
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double v = norm(i);
    const bool flip = on ? v <= down : v >= up;
    if (!flip) continue;
    // Latest threshold crossing at or before i.
    std::size_t j = i;
    while (j > last + 1 && ((norm(j - 1) >= th) != on)) --j;
    const double a = norm(j - 1), b = norm(j);
    const double frac = b != a ? std::clamp((th - a) / (b - a), 0.0, 1.0) : 0.5;
    const double t = trace.time_at(j - 1) + frac / trace.rate_hz;
    on = !on;
    seq.edges.push_back({t, on ? EdgeDirection::Rising : EdgeDirection::Falling});
    last = i;
  }
  if (seq.edges.empty()) throw InsufficientEvidence("binarize_intensity: no edges found");
  return seq;
}

namespace {

struct Template {
  double cycle = 0.0;
  std::array<std::vector<double>, 2> times;  // by direction, within [0, cycle)
};

Template make_template(const SyncPattern& pattern) {
  Template tp;
  tp.cycle = pattern.cycle_s();
  for (const auto& e : generate_pattern(pattern, 1).edges) {
    tp.times[e.direction == EdgeDirection::Rising ? 0 : 1].push_back(e.time_s);
  }
  return tp;
}

double nearest_sq(const Template& tp, double t, EdgeDirection dir) {
  double u = std::fmod(t, tp.cycle);
  if (u < 0) u += tp.cycle;
  double best = std::numeric_limits<double>::infinity();
  for (double s : tp.times[dir == EdgeDirection::Rising ? 0 : 1]) {
    double d = std::abs(u - s);
    d = std::min(d, tp.cycle - d);
    best = std::min(best, d * d);
  }
  return best;
}

}  // namespace

double offset_cost(const EdgeSequence& observed, const SyncPattern& pattern, double offset_s) {
  pattern.validate();
  const Template tp = make_template(pattern);
  double cost = 0.0;
  for (const auto& e : observed.edges) cost += nearest_sq(tp, e.time_s - offset_s, e.direction);
  return cost;
}

OffsetEstimate estimate_offset(const EdgeSequence& observed, const SyncPattern& pattern, SensorKind sensor,
                               double grid_s) {
  pattern.validate();
  if (!(grid_s > 0.0)) throw InvalidInput("estimate_offset: grid step must be positive");
  const std::size_t n = observed.edges.size();
  if (n < 6) throw InsufficientEvidence("estimate_offset: need at least 6 edges, got " + std::to_string(n));
  const Template tp = make_template(pattern);
  const auto steps = static_cast<std::size_t>(std::llround(tp.cycle / grid_s));

  double best_cost = std::numeric_limits<double>::infinity();
  std::size_t best_k = 0;
  for (std::size_t k = 0; k < steps; ++k) {
    const double o = static_cast<double>(k) * grid_s;
    double cost = 0.0;
    for (const auto& e : observed.edges) {
      cost += nearest_sq(tp, e.time_s - o, e.direction);
      if (cost >= best_cost) break;
    }
    if (cost < best_cost) {
      best_cost = cost;
      best_k = k;
    }
  }
  OffsetEstimate r;
  r.offset_s = static_cast<double>(best_k) * grid_s;
  if (sensor == SensorKind::Lwir) r.offset_s -= pattern.lwir_extra_delay_s;
  r.residual_rms_s = std::sqrt(best_cost / static_cast<double>(n));
  r.n_edges = n;
  return r;
}

}  // namespace physiocue
