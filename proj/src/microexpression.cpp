#include "physiocue/microexpression.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <numeric>
#include <set>
#include <string>

#include "physiocue/errors.hpp"

namespace physiocue {

const std::array<const char*, kAuCount> kAuNames = {
    "AU01_r", "AU02_r", "AU04_r", "AU05_r", "AU06_r", "AU07_r", "AU09_r", "AU10_r", "AU12_r",
    "AU14_r", "AU15_r", "AU17_r", "AU20_r", "AU23_r", "AU25_r", "AU26_r", "AU28_r", "AU45_r"};

void FauTrace::validate() const {
  if (au.size() != kAuCount) {
    throw InvalidInput("FauTrace needs " + std::to_string(kAuCount) + " channels, got " +
                       std::to_string(au.size()));
  }
  for (const auto& s : au) {
    if (s.size() != au.front().size()) throw InvalidInput("FauTrace: channel length mismatch");
    if (std::abs(s.rate_hz - au.front().rate_hz) > 1e-9 * au.front().rate_hz) {
      throw InvalidInput("FauTrace: channel rate mismatch");
    }
    for (double v : s.samples) {
      if (!std::isfinite(v) || v < 0.0) throw InvalidInput("FauTrace: intensities must be finite and >= 0");
    }
  }
}

std::vector<std::size_t> window_lengths_for(const std::vector<double>& durations_s, double rate_hz) {
  std::set<std::size_t> lens;
  const auto cap = static_cast<std::size_t>(std::floor(0.5 * rate_hz + 1e-9));
  for (double d : durations_s) {
    auto len = static_cast<std::size_t>(std::lround(d * rate_hz));
    if (len % 2 == 0) len = len > 0 ? len - 1 : 1;
    if (len > cap) len = cap % 2 == 1 ? cap : cap - 1;
    if (len >= 3) lens.insert(len);
  }
  if (lens.empty()) throw InvalidInput("no usable microexpression window at this frame rate");
  return {lens.begin(), lens.end()};
}

std::vector<std::size_t> default_window_lengths(double rate_hz) {
  return window_lengths_for({0.1, 1.0 / 6.0, 0.3, 0.5}, rate_hz);
}

LikelihoodMap scan_window_likelihood(const FauTrace& trace, std::span<const std::size_t> window_lens) {
  trace.validate();
  const double rate = trace.rate_hz();
  const std::size_t n = trace.size();
  LikelihoodMap map;
  map.rate_hz = rate;
  map.window_lens.assign(window_lens.begin(), window_lens.end());
  for (std::size_t len : map.window_lens) {
    if (len < 3 || len % 2 == 0) throw InvalidInput("window lengths must be odd and >= 3");
    if (static_cast<double>(len) > 0.5 * rate + 1e-9) {
      throw InvalidInput("window length " + std::to_string(len) + " exceeds half a second of frames");
    }
  }

  for (std::size_t len : map.window_lens) {
    const std::size_t h = (len - 1) / 2;
    std::vector<double> best(n, 0.0);
    if (n > 2 * h) {
      for (const auto& ch : trace.au) {
        const auto& s = ch.samples;
        for (std::size_t t = h; t + h < n; ++t) {
          const double l = s[t] - 0.5 * (s[t - h] + s[t + h]);
          if (l > best[t]) best[t] = l;
        }
      }
    }
    map.values.push_back(std::move(best));
  }
  return map;
}

double dynamic_threshold(const LikelihoodMap& map, double k) {
  if (map.window_lens.empty()) throw InvalidInput("dynamic_threshold: empty likelihood map");
  if (!(k >= 0.0)) throw InvalidInput("dynamic_threshold: k must be >= 0");
  const auto smallest = static_cast<std::size_t>(
      std::distance(map.window_lens.begin(), std::min_element(map.window_lens.begin(), map.window_lens.end())));
  const std::size_t h = (map.window_lens[smallest] - 1) / 2;
  const auto& v = map.values[smallest];
  if (v.size() <= 2 * h) throw InvalidInput("dynamic_threshold: trace shorter than the smallest window");
  std::vector<double> valid(v.begin() + static_cast<std::ptrdiff_t>(h), v.end() - static_cast<std::ptrdiff_t>(h));
  const double med = median(valid);
  for (double& x : valid) x = std::abs(x - med);
  const double mad = median(std::move(valid));
  return med + k * mad;
}

double dynamic_threshold(const FauTrace& trace, double k, std::span<const std::size_t> window_lens) {
  if (static_cast<double>(trace.size()) < 10.0 * trace.rate_hz()) {
    throw InvalidInput("dynamic_threshold: need at least 10 s of baseline");
  }
  const auto lens = window_lens.empty() ? default_window_lengths(trace.rate_hz())
                                        : std::vector<std::size_t>(window_lens.begin(), window_lens.end());
  return dynamic_threshold(scan_window_likelihood(trace, lens), k);
}

std::vector<MicroexpressionCandidate> select_candidates(const LikelihoodMap& map, double threshold,
                                                        const SelectionOptions& options) {
  if (!(threshold >= 0.0)) throw InvalidInput("select_candidates: threshold must be >= 0");
  if (!(options.scale_keep_ratio > 0.0 && options.scale_keep_ratio <= 1.0)) {
    throw InvalidInput("select_candidates: scale_keep_ratio must lie in (0, 1]");
  }
  // Scales in ascending window order.
  std::vector<std::size_t> order(map.window_lens.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return map.window_lens[a] < map.window_lens[b]; });

  const std::size_t n = map.values.empty() ? 0 : map.values.front().size();
  std::vector<MicroexpressionCandidate> pool;
  for (std::size_t t = 0; t < n; ++t) {
    double best = 0.0;
    for (std::size_t s : order) best = std::max(best, map.values[s][t]);
    if (!(best > threshold)) continue;
    // The representative window does not depend on the threshold, so a
    // higher threshold only removes candidates from the pool.
    for (std::size_t s : order) {
      const double v = map.values[s][t];
      if (v >= options.scale_keep_ratio * best) {
        if (v > threshold) {
          const std::size_t h = (map.window_lens[s] - 1) / 2;
          pool.push_back({t - h, t, t + h, v, map.window_lens[s]});
        }
        break;
      }
    }
  }

  std::sort(pool.begin(), pool.end(), [](const auto& a, const auto& b) {
    if (a.likelihood != b.likelihood) return a.likelihood > b.likelihood;
    if (a.apex_frame != b.apex_frame) return a.apex_frame < b.apex_frame;
    return a.window_len < b.window_len;
  });

  // Kept intervals ordered by onset; they never overlap, so only the
  // neighbours of an insertion point can collide.
  auto by_onset = [](const MicroexpressionCandidate& a, const MicroexpressionCandidate& b) {
    return a.onset_frame < b.onset_frame;
  };
  std::set<MicroexpressionCandidate, decltype(by_onset)> kept(by_onset);
  for (const auto& c : pool) {
    auto it = kept.lower_bound(c);
    if (it != kept.end() && it->overlaps(c)) continue;
    if (it != kept.begin() && std::prev(it)->overlaps(c)) continue;
    kept.insert(c);
  }
  return {kept.begin(), kept.end()};
}

double interval_iou(const Interval& a, const Interval& b) noexcept {
  const double inter = std::max(0.0, std::min(a.end, b.end) - std::max(a.start, b.start));
  const double uni = std::max(a.end, b.end) - std::min(a.start, b.start);
  return uni > 0.0 ? inter / uni : (a.start == b.start && a.end == b.end ? 1.0 : 0.0);
}

SpottingScore interval_f1(std::span<const Interval> predicted, std::span<const Interval> ground_truth,
                          double iou_min) {
  if (!(iou_min > 0.0 && iou_min <= 1.0)) throw InvalidInput("interval_f1: iou_min must lie in (0, 1]");
  SpottingScore score;
  if (predicted.empty() && ground_truth.empty()) {
    score.precision = score.recall = score.f1 = 1.0;
    return score;
  }
  struct Pair {
    double iou;
    std::size_t p, g;
  };
  std::vector<Pair> pairs;
  for (std::size_t p = 0; p < predicted.size(); ++p) {
    for (std::size_t g = 0; g < ground_truth.size(); ++g) {
      const double iou = interval_iou(predicted[p], ground_truth[g]);
      if (iou >= iou_min) pairs.push_back({iou, p, g});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    if (a.p != b.p) return a.p < b.p;
    return a.g < b.g;
  });
  std::vector<bool> used_p(predicted.size(), false), used_g(ground_truth.size(), false);
  for (const auto& pr : pairs) {
    if (used_p[pr.p] || used_g[pr.g]) continue;
    used_p[pr.p] = used_g[pr.g] = true;
    ++score.true_positives;
  }
  const double tp = static_cast<double>(score.true_positives);
  score.precision = predicted.empty() ? 0.0 : tp / static_cast<double>(predicted.size());
  score.recall = ground_truth.empty() ? 0.0 : tp / static_cast<double>(ground_truth.size());
  const double denom = score.precision + score.recall;
  score.f1 = denom > 0.0 ? 2.0 * score.precision * score.recall / denom : 0.0;
  return score;
}

std::vector<Interval> candidate_intervals(std::span<const MicroexpressionCandidate> candidates) {
  std::vector<Interval> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) {
    out.push_back({static_cast<double>(c.onset_frame), static_cast<double>(c.offset_frame)});
  }
  return out;
}

double me_rate_over_interval(std::span<const MicroexpressionCandidate> candidates,
                             const IntervalAnnotation& interval, double rate_hz, double start_time_s) {
  if (!(rate_hz > 0.0)) throw InvalidInput("me_rate_over_interval: rate must be positive");
  std::vector<double> times;
  times.reserve(candidates.size());
  for (const auto& c : candidates) times.push_back(start_time_s + static_cast<double>(c.apex_frame) / rate_hz);
  return emr_over_interval(times, interval);
}

std::vector<MicroexpressionCandidate> spot_microexpressions(const FauTrace& trace,
                                                            const SpottingOptions& options) {
  const auto lens = window_lengths_for(options.window_durations_s, trace.rate_hz());
  const LikelihoodMap map = scan_window_likelihood(trace, lens);
  return select_candidates(map, dynamic_threshold(map, options.k), options.selection);
}

KFit fit_threshold_k(std::span<const SpottingExample> examples, std::span<const double> k_grid, double iou_min,
                     const SpottingOptions& options) {
  if (examples.empty() || k_grid.empty()) throw InvalidInput("fit_threshold_k needs examples and a k grid");
  // Scan once per example; only the threshold changes across the grid.
  std::vector<LikelihoodMap> maps;
  std::vector<double> medians, spreads;
  for (const auto& ex : examples) {
    const auto lens = window_lengths_for(options.window_durations_s, ex.trace.rate_hz());
    maps.push_back(scan_window_likelihood(ex.trace, lens));
    const double m = dynamic_threshold(maps.back(), 0.0);
    medians.push_back(m);
    spreads.push_back(dynamic_threshold(maps.back(), 1.0) - m);
  }
  KFit best;
  best.f1 = -1.0;
  for (double k : k_grid) {
    std::size_t tp = 0, n_pred = 0, n_truth = 0;
    for (std::size_t i = 0; i < examples.size(); ++i) {
      const auto cands = select_candidates(maps[i], medians[i] + k * spreads[i], options.selection);
      const auto pred = candidate_intervals(cands);
      tp += interval_f1(pred, examples[i].truth, iou_min).true_positives;
      n_pred += pred.size();
      n_truth += examples[i].truth.size();
    }
    const double f1 = n_pred + n_truth == 0 ? 1.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(n_pred + n_truth);
    if (f1 > best.f1) best = {k, f1};
  }
  return best;
}

}  // namespace physiocue
