#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "physiocue/oculomotor.hpp"
#include "physiocue/series.hpp"

namespace physiocue {

inline constexpr std::size_t kAuCount = 18;

// Intensity column names in the facial-analysis export, in channel order.
extern const std::array<const char*, kAuCount> kAuNames;

struct FauTrace {
  std::vector<UniformSeries> au;  // kAuCount channels

  double rate_hz() const noexcept { return au.empty() ? 0.0 : au.front().rate_hz; }
  std::size_t size() const noexcept { return au.empty() ? 0 : au.front().size(); }
  double start_time_s() const noexcept { return au.empty() ? 0.0 : au.front().start_time_s; }
  // 18 channels, equal lengths and rates, finite non-negative intensities.
  void validate() const;
};

struct MicroexpressionCandidate {
  std::size_t onset_frame = 0;
  std::size_t apex_frame = 0;
  std::size_t offset_frame = 0;
  double likelihood = 0.0;
  std::size_t window_len = 0;

  bool overlaps(const MicroexpressionCandidate& o) const noexcept {
    return onset_frame <= o.offset_frame && o.onset_frame <= offset_frame;
  }
};

// values[s][t]: likelihood of an apex at frame t for window_lens[s].
struct LikelihoodMap {
  std::vector<std::size_t> window_lens;
  std::vector<std::vector<double>> values;
  double rate_hz = 0.0;
};

// Odd window lengths for durations 0.1, 1/6, 0.3 and 0.5 s at the given rate
// ({9, 15, 27, 45} at 90 Hz).
std::vector<std::size_t> default_window_lengths(double rate_hz);

// For each frame t and window length L (odd, >= 3, at most half a second of
// frames): max over action units of s(t) - (s(t - h) + s(t + h)) / 2 with
// h = (L - 1) / 2, clamped at zero. Frames closer than h to either end get 0.
LikelihoodMap scan_window_likelihood(const FauTrace& trace, std::span<const std::size_t> window_lens);

// Baseline threshold: median + k * MAD of the valid (non-edge) likelihoods at
// the smallest window length. The trace must be at least 10 s long.
double dynamic_threshold(const FauTrace& trace, double k = 3.0,
                         std::span<const std::size_t> window_lens = {});
double dynamic_threshold(const LikelihoodMap& map, double k = 3.0);

struct SelectionOptions {
  // Per apex frame, the smallest window whose likelihood reaches this
  // fraction of that frame's best likelihood represents the frame; the frame
  // is a candidate when that window's likelihood exceeds the threshold. 1.0
  // keeps only the strongest window (ties to the smaller one).
  double scale_keep_ratio = 0.85;
};

// Candidates with likelihood above the threshold, chosen greedily by
// descending likelihood (ties: earlier apex, then smaller window) so that no
// two kept [onset, offset] intervals overlap. Output is sorted by onset.
std::vector<MicroexpressionCandidate> select_candidates(const LikelihoodMap& map, double threshold,
                                                        const SelectionOptions& options = {});

struct Interval {
  double start = 0.0;
  double end = 0.0;
};

double interval_iou(const Interval& a, const Interval& b) noexcept;

struct SpottingScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t true_positives = 0;
};

// One-to-one greedy matching by descending IoU; a pair matches when
// IoU >= iou_min. Both sets empty scores 1; exactly one empty scores 0.
SpottingScore interval_f1(std::span<const Interval> predicted, std::span<const Interval> ground_truth,
                          double iou_min = 0.5);

std::vector<Interval> candidate_intervals(std::span<const MicroexpressionCandidate> candidates);

// Candidates per second whose apex time lies in [start_s, end_s).
double me_rate_over_interval(std::span<const MicroexpressionCandidate> candidates,
                             const IntervalAnnotation& interval, double rate_hz, double start_time_s = 0.0);

struct SpottingOptions {
  std::vector<double> window_durations_s{0.1, 1.0 / 6.0, 0.3, 0.5};
  double k = 3.0;
  SelectionOptions selection;
};

std::vector<std::size_t> window_lengths_for(const std::vector<double>& durations_s, double rate_hz);

// scan -> dynamic threshold -> selection.
std::vector<MicroexpressionCandidate> spot_microexpressions(const FauTrace& trace,
                                                            const SpottingOptions& options = {});

struct SpottingExample {
  FauTrace trace;
  std::vector<Interval> truth;  // [onset, offset] frames
};

struct KFit {
  double k = 0.0;
  double f1 = 0.0;  // pooled over all examples
};

// Threshold multiplier from k_grid that maximizes the pooled interval F1 on
// labelled examples (ties keep the smaller k).
KFit fit_threshold_k(std::span<const SpottingExample> examples, std::span<const double> k_grid, double iou_min = 0.5,
                     const SpottingOptions& options = {});

}  // namespace physiocue
