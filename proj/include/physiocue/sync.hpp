#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "physiocue/series.hpp"

namespace physiocue {

struct SyncPattern {
  std::vector<double> periods_s{5, 6, 7, 8, 9, 10, 11, 12, 13};
  double duty = 0.5;
  double lwir_extra_delay_s = 0.05;
  bool rising_first = true;  // each period starts with its on-segment

  double cycle_s() const;
  void validate() const;
};

enum class EdgeDirection { Rising, Falling };

struct Edge {
  double time_s = 0.0;
  EdgeDirection direction = EdgeDirection::Rising;
};

struct EdgeSequence {
  std::vector<Edge> edges;
  // Strictly increasing times, alternating directions.
  void validate() const;
};

enum class SensorKind { Rgb, Nir, Lwir };

const char* sensor_name(SensorKind s) noexcept;
SensorKind parse_sensor(const std::string& name);

// Template edges of n_cycles consecutive cycles starting at time 0.
EdgeSequence generate_pattern(const SyncPattern& pattern, std::size_t n_cycles);

// True when the beacon is on at pattern time t (taken modulo the cycle).
bool pattern_is_on(const SyncPattern& pattern, double t);

// Point-sampled beacon intensity as seen by a sensor whose clock reads
// pattern_time + offset_s.
UniformSeries render_pattern(const SyncPattern& pattern, double rate_hz, double duration_s, double offset_s,
                             double low = 0.0, double high = 1.0, double start_time_s = 0.0);

struct BinarizeOptions {
  double threshold = 0.5;
  double hysteresis = 0.1;
};

// Min-max normalization, then hysteresis switching around the threshold.
// Each edge time is interpolated at the threshold crossing.
EdgeSequence binarize_intensity(const UniformSeries& trace, const BinarizeOptions& options = {});

struct OffsetEstimate {
  double offset_s = 0.0;
  double residual_rms_s = 0.0;
  std::size_t n_edges = 0;
};

// Sum of squared distances from each observed edge, shifted by -offset, to
// the nearest template edge of the same direction (cyclically).
double offset_cost(const EdgeSequence& observed, const SyncPattern& pattern, double offset_s);

// Exhaustive 1 ms grid search over one cycle; observed - offset = pattern.
// For the thermal sensor the extra beacon delay is subtracted.
OffsetEstimate estimate_offset(const EdgeSequence& observed, const SyncPattern& pattern, SensorKind sensor,
                               double grid_s = 1e-3);

}  // namespace physiocue
