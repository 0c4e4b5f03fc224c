#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "physiocue/ica.hpp"
#include "physiocue/series.hpp"

namespace physiocue {

// Axis-aligned box in image pixels; y grows downward.
struct RoiBox {
  double x_min = 0, y_min = 0, x_max = 0, y_max = 0;

  double width() const noexcept { return x_max - x_min; }
  double height() const noexcept { return y_max - y_min; }
  bool valid() const noexcept { return x_min < x_max && y_min < y_max; }
  bool contains(const RoiBox& other) const noexcept {
    return x_min <= other.x_min && y_min <= other.y_min && x_max >= other.x_max &&
           y_max >= other.y_max;
  }
  bool operator==(const RoiBox&) const = default;
};

// Fractions of the landmark box size added on each side.
struct RoiExpansion {
  double left = 0.05;
  double right = 0.05;
  double top = 0.30;
  double bottom = 0.05;
};

// Grows the landmark box by the expansion fractions, then squares it around
// the expanded box's center using the larger of its width and height.
RoiBox expand_face_bbox(const RoiBox& landmark_bbox, const RoiExpansion& expansion = {});

// Bounding box of a landmark set.
RoiBox landmark_bbox(const std::vector<double>& xs, const std::vector<double>& ys);

// Per-frame spatial means of the face region.
struct ChannelTrace {
  UniformSeries r, g, b;
  std::optional<UniformSeries> nir;

  std::size_t frame_count() const noexcept { return g.size(); }
  double rate_hz() const noexcept { return g.rate_hz; }
  // Throws InvalidInput on unequal lengths or rates, negative or non-finite
  // values.
  void validate() const;
};

enum class PulseMethod { Chrom, Pos, Poh10, Poh11, External };

const char* method_name(PulseMethod m) noexcept;
std::optional<PulseMethod> parse_method(std::string_view name) noexcept;

struct PulseEstimate {
  UniformSeries waveform;
  PulseMethod method = PulseMethod::External;
};

struct RppgOptions {
  double window_s = 1.6;  // internal CHROM / POS window
  double band_low_hz = 0.65;
  double band_high_hz = 3.0;
  int band_order = 2;
  // <= 0 selects default_detrend_lambda(rate).
  double detrend_lambda = 0.0;
  std::size_t poh11_smooth_points = 5;
  double ica_min_duration_s = 10.0;
  FastIcaOptions ica;
};

// CHROM: per half-overlapping window, chrominance signals X = 3R - 2G and
// Y = 1.5R + G - 1.5B of the mean-normalized channels are band-passed and
// combined as X - (sd X / sd Y) Y, then Hann-weighted and overlap-added.
PulseEstimate chrom_pulse(const ChannelTrace& trace, const RppgOptions& options = {});

// POS: per window with a one-frame stride, projects mean-normalized channels
// onto S1 = G - B and S2 = G + B - 2R and overlap-adds the mean-free
// S1 + (sd S1 / sd S2) S2. No band-pass.
PulseEstimate pos_pulse(const ChannelTrace& trace, const RppgOptions& options = {});

enum class IcaVariant { Poh10, Poh11 };

// Blind source separation: z-scored channels -> ICA -> the component with the
// largest in-band spectral peak relative to its total power. The Poh11
// variant detrends and band-passes each channel first and smooths the chosen
// component with a short moving average.
PulseEstimate ica_pulse(const ChannelTrace& trace, IcaVariant variant, std::uint64_t seed,
                        const RppgOptions& options = {});

// Dispatches on method; External is rejected.
PulseEstimate estimate_pulse(const ChannelTrace& trace, PulseMethod method, std::uint64_t seed,
                             const RppgOptions& options = {});

// Standardizes each clip, applies a symmetric Hann taper and sums the clips at
// offsets 0, stride, 2*stride, ... Output length is
// (clips - 1) * stride + clip_len.
UniformSeries stitch_overlap_add(const std::vector<UniformSeries>& clips, std::size_t clip_len,
                                 std::size_t stride);

// Cuts a series into clips of clip_len samples at the given stride (trailing
// samples that do not fill a clip are dropped).
std::vector<UniformSeries> cut_clips(const UniformSeries& s, std::size_t clip_len,
                                     std::size_t stride);

inline constexpr std::size_t kDefaultClipLength = 135;

}  // namespace physiocue
