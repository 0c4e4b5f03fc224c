#include "physiocue/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <sstream>

#include "physiocue/errors.hpp"
#include "physiocue/io.hpp"

namespace physiocue {

namespace {

struct Entry {
  const char* key;
  const char* help;
  std::function<std::string(const AppConfig&)> get;
  std::function<void(AppConfig&, const std::string&)> set;
};

double to_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError("expected a number, got '" + s + "'");
  }
  return v;
}

std::size_t to_size(const std::string& s) {
  std::size_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError("expected a non-negative integer, got '" + s + "'");
  }
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError("expected true or false, got '" + s + "'");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto a = item.find_first_not_of(" \t");
    const auto b = item.find_last_not_of(" \t");
    if (a == std::string::npos) throw ConfigError("empty list element in '" + s + "'");
    out.push_back(item.substr(a, b - a + 1));
  }
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
  return s;
}

std::vector<double> to_doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& x : split_list(s)) out.push_back(to_double(x));
  return out;
}

Taper to_taper(const std::string& s) {
  if (s == "hamming") return Taper::Hamming;
  if (s == "hann") return Taper::Hann;
  if (s == "rectangular") return Taper::Rectangular;
  throw ConfigError("unknown taper '" + s + "'");
}

#define PC_DOUBLE(key, help, field)                                              \
  Entry {                                                                        \
    key, help, [](const AppConfig& c) { return format_double(c.field); },        \
        [](AppConfig& c, const std::string& v) { c.field = to_double(v); }       \
  }
#define PC_SIZE(key, help, field)                                                   \
  Entry {                                                                           \
    key, help, [](const AppConfig& c) { return std::to_string(c.field); },          \
        [](AppConfig& c, const std::string& v) { c.field = to_size(v); }            \
  }

const std::vector<Entry>& entries() {
  static const std::vector<Entry> e = {
      PC_DOUBLE("rppg.window_s", "CHROM/POS internal window length (s)", rppg.window_s),
      PC_DOUBLE("rppg.band_low_hz", "pulse band-pass lower edge (Hz)", rppg.band_low_hz),
      PC_DOUBLE("rppg.band_high_hz", "pulse band-pass upper edge (Hz)", rppg.band_high_hz),
      Entry{"rppg.band_order", "Butterworth prototype order of the band-pass",
            [](const AppConfig& c) { return std::to_string(c.rppg.band_order); },
            [](AppConfig& c, const std::string& v) { c.rppg.band_order = static_cast<int>(to_size(v)); }},
      PC_DOUBLE("rppg.detrend_lambda", "smoothness-priors lambda; 0 scales 2000 at 90 Hz by (rate/90)^2",
                rppg.detrend_lambda),
      PC_SIZE("rppg.poh11_smooth_points", "moving-average points after ICA (POH11)", rppg.poh11_smooth_points),
      PC_DOUBLE("rppg.ica_min_duration_s", "shortest trace accepted by the ICA methods (s)", rppg.ica_min_duration_s),
      Entry{"rppg.ica_max_iterations", "FastICA iteration cap per component",
            [](const AppConfig& c) { return std::to_string(c.rppg.ica.max_iterations); },
            [](AppConfig& c, const std::string& v) { c.rppg.ica.max_iterations = static_cast<int>(to_size(v)); }},
      PC_DOUBLE("rppg.ica_tolerance", "FastICA convergence tolerance", rppg.ica.tolerance),
      PC_DOUBLE("roi.expand_left", "face box growth, left (fraction of width)", roi.left),
      PC_DOUBLE("roi.expand_right", "face box growth, right (fraction of width)", roi.right),
      PC_DOUBLE("roi.expand_top", "face box growth, top (fraction of height)", roi.top),
      PC_DOUBLE("roi.expand_bottom", "face box growth, bottom (fraction of height)", roi.bottom),
      Entry{"pulse.methods", "pulse estimators evaluated by hr-eval",
            [](const AppConfig& c) {
              std::string s;
              for (std::size_t i = 0; i < c.pulse_methods.size(); ++i) s += (i ? "," : "") + std::string(method_name(c.pulse_methods[i]));
              return s;
            },
            [](AppConfig& c, const std::string& v) {
              c.pulse_methods.clear();
              for (const auto& m : split_list(v)) {
                auto p = parse_method(m);
                if (!p || *p == PulseMethod::External) throw ConfigError("unknown pulse method '" + m + "'");
                c.pulse_methods.push_back(*p);
              }
            }},
      PC_DOUBLE("hr.window_s", "heart-rate window length (s)", hr.window_s),
      PC_SIZE("hr.stride_frames", "heart-rate window stride (frames)", hr.stride_frames),
      Entry{"hr.taper", "window taper: hamming, hann or rectangular",
            [](const AppConfig& c) { return std::string(taper_name(c.hr.taper)); },
            [](AppConfig& c, const std::string& v) { c.hr.taper = to_taper(v); }},
      PC_DOUBLE("hr.min_hz", "lowest admissible pulse frequency (Hz)", hr.min_hz),
      PC_DOUBLE("hr.max_hz", "highest admissible pulse frequency (Hz)", hr.max_hz),
      PC_DOUBLE("hr.smooth_s", "moving-average length over the HR track (s)", hr.smooth_s),
      PC_DOUBLE("ground_truth.max_lag_s", "largest oximeter lag searched by cross-correlation (s)",
                ground_truth.max_lag_s),
      PC_SIZE("gaze.block", "frames averaged per gaze sample", gaze_block),
      PC_DOUBLE("saccade.threshold_dps", "saccade velocity threshold (deg/s)", saccade.threshold_dps),
      PC_SIZE("saccade.max_duration_frames", "longest saccade kept (frames after averaging)",
              saccade.max_duration_frames),
      Entry{"microexp.window_durations_s", "scan window durations (s), rounded to odd frame counts",
            [](const AppConfig& c) { return join_doubles(c.spotting.window_durations_s); },
            [](AppConfig& c, const std::string& v) { c.spotting.window_durations_s = to_doubles(v); }},
      PC_DOUBLE("microexp.k", "threshold = median + k * MAD", spotting.k),
      PC_DOUBLE("microexp.scale_keep_ratio", "per-frame window choice: smallest within this fraction of the best",
                spotting.selection.scale_keep_ratio),
      PC_DOUBLE("microexp.iou_min", "IoU needed for an interval match", iou_min),
      PC_DOUBLE("classifier.lambda", "margin classifier L2 strength", classifier.lambda),
      PC_SIZE("classifier.epochs", "margin classifier passes over the data", classifier.epochs),
      PC_DOUBLE("classifier.rbf_gamma", "RBF gamma; 0 uses 1/(2 median squared distance)", classifier.rbf_gamma),
      Entry{"sync.periods_s", "beacon periods within one cycle (s)",
            [](const AppConfig& c) { return join_doubles(c.sync.periods_s); },
            [](AppConfig& c, const std::string& v) { c.sync.periods_s = to_doubles(v); }},
      PC_DOUBLE("sync.duty", "beacon on-fraction of each period", sync.duty),
      PC_DOUBLE("sync.lwir_extra_delay_s", "extra delay of the thermal beacon (s)", sync.lwir_extra_delay_s),
      Entry{"sync.rising_first", "each period starts with its on-segment",
            [](const AppConfig& c) { return std::string(c.sync.rising_first ? "true" : "false"); },
            [](AppConfig& c, const std::string& v) { c.sync.rising_first = to_bool(v); }},
      PC_DOUBLE("sync.hysteresis", "half-width of the switching band around 0.5", binarize.hysteresis),
      PC_DOUBLE("sync.grid_s", "offset search step (s)", sync_grid_s),
      PC_SIZE("stitch.clip_len", "clip length for overlap-add stitching (stride is half)", stitch_clip_len),
  };
  return e;
}

#undef PC_DOUBLE
#undef PC_SIZE

void check(const AppConfig& c) {
  if (!(c.rppg.band_low_hz > 0.0 && c.rppg.band_low_hz < c.rppg.band_high_hz)) throw ConfigError("bad pulse band");
  if (c.rppg.band_order < 1) throw ConfigError("rppg.band_order must be >= 1");
  if (!(c.rppg.window_s > 0.0)) throw ConfigError("rppg.window_s must be positive");
  if (!(c.hr.window_s > 0.0) || c.hr.stride_frames < 1) throw ConfigError("bad hr window");
  if (!(c.hr.min_hz > 0.0 && c.hr.min_hz < c.hr.max_hz)) throw ConfigError("bad hr band");
  if (c.pulse_methods.empty()) throw ConfigError("pulse.methods is empty");
  if (c.gaze_block < 1) throw ConfigError("gaze.block must be >= 1");
  if (!(c.saccade.threshold_dps > 0.0)) throw ConfigError("saccade.threshold_dps must be positive");
  if (!(c.spotting.k >= 0.0)) throw ConfigError("microexp.k must be >= 0");
  if (!(c.spotting.selection.scale_keep_ratio > 0.0 && c.spotting.selection.scale_keep_ratio <= 1.0)) {
    throw ConfigError("microexp.scale_keep_ratio must lie in (0, 1]");
  }
  if (!(c.iou_min > 0.0 && c.iou_min <= 1.0)) throw ConfigError("microexp.iou_min must lie in (0, 1]");
  if (!(c.classifier.lambda > 0.0)) throw ConfigError("classifier.lambda must be positive");
  if (!(c.sync_grid_s > 0.0)) throw ConfigError("sync.grid_s must be positive");
  if (c.stitch_clip_len < 3) throw ConfigError("stitch.clip_len must be >= 3");
  try {
    c.sync.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

AppConfig parse_config(const std::string& text, const std::string& source_name) {
  AppConfig c;
  std::istringstream in(text);
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto a = line.find_first_not_of(" \t\r");
    if (a == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(source_name + ":" + std::to_string(no) + ": expected key = value");
    auto strip = [](std::string s) {
      const auto x = s.find_first_not_of(" \t\r");
      const auto y = s.find_last_not_of(" \t\r");
      return x == std::string::npos ? std::string() : s.substr(x, y - x + 1);
    };
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    const auto& es = entries();
    auto it = std::find_if(es.begin(), es.end(), [&](const Entry& e) { return key == e.key; });
    if (it == es.end()) throw ConfigError(source_name + ":" + std::to_string(no) + ": unknown key '" + key + "'");
    try {
      it->set(c, value);
    } catch (const ConfigError& e) {
      throw ConfigError(source_name + ":" + std::to_string(no) + ": " + key + ": " + e.what());
    }
  }
  check(c);
  return c;
}

AppConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const ParseError&) {
    throw ConfigError("cannot read config file " + path.string());
  }
  return parse_config(text, path.string());
}

std::string print_config(const AppConfig& config) {
  std::string out;
  for (const auto& e : entries()) {
    out += "# ";
    out += e.help;
    out += '\n';
    out += e.key;
    out += " = " + e.get(config) + "\n";
  }
  return out;
}

std::string print_defaults() { return print_config(AppConfig{}); }

}  // namespace physiocue
