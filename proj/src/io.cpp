#include "physiocue/io.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <fstream>
#include <sstream>
#include <system_error>

#include <nlohmann/json.hpp>

#include "physiocue/errors.hpp"

namespace physiocue {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
  if (!std::isfinite(v)) throw InvalidInput("format_double: non-finite value");
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), 0, "", "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInput("cannot write " + tmp.string());
    out << text;
    if (!out) throw InvalidInput("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && (s[a] == ' ' || s[a] == '\t' || s[a] == '\r')) ++a;
  while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) --b;
  return std::string(s.substr(a, b - a));
}

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

CsvTable CsvTable::parse(const std::string& text, const std::string& source_name) {
  CsvTable t;
  t.source_ = source_name;
  std::istringstream in(text);
  std::string line;
  bool have_header = false;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    if (!have_header) {
      t.header_ = split_line(line);
      have_header = true;
      continue;
    }
    ++row;
    auto cells = split_line(line);
    if (cells.size() != t.header_.size()) {
      throw ParseError(source_name, row, "",
                       "expected " + std::to_string(t.header_.size()) + " fields, got " + std::to_string(cells.size()));
    }
    t.cells_.push_back(std::move(cells));
  }
  if (!have_header) throw ParseError(source_name, 0, "", "empty file");
  return t;
}

CsvTable CsvTable::read(const fs::path& path) { return parse(read_text_file(path), path.string()); }

std::optional<std::size_t> CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (header_[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t CsvTable::require_column(const std::string& name) const {
  if (auto c = column(name)) return *c;
  throw ParseError(source_, 0, name, "missing column");
}

double CsvTable::number(std::size_t row, std::size_t col) const {
  const std::string& s = cells_.at(row).at(col);
  double v = 0.0;
  const char* first = s.data();
  if (!s.empty() && s.front() == '+') ++first;
  const auto res = std::from_chars(first, s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ParseError(source_, row + 1, header_[col], "not a number: '" + s + "'");
  }
  if (!std::isfinite(v)) throw ParseError(source_, row + 1, header_[col], "non-finite value '" + s + "'");
  return v;
}

double rate_from_timestamps(const CsvTable& table, std::size_t t_col) {
  const std::size_t n = table.rows();
  if (n < 2) throw ParseError(table.source(), 0, table.header()[t_col], "need at least 2 rows to infer a rate");
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = table.number(i, t_col);
    if (i > 0 && !(t[i] > t[i - 1])) {
      throw ParseError(table.source(), i + 1, table.header()[t_col], "timestamps must increase strictly");
    }
  }
  double rate = static_cast<double>(n - 1) / (t[n - 1] - t[0]);
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs((t[i] - t[i - 1]) * rate - 1.0) > 0.25) {
      throw ParseError(table.source(), i + 1, table.header()[t_col], "irregular sampling interval");
    }
  }
  // Snap to a micro-hertz grid so written rates read back exactly.
  const double snapped = std::round(rate * 1e6) / 1e6;
  if (std::abs(snapped - rate) <= 1e-9 * rate) rate = snapped;
  return rate;
}

namespace {

std::vector<double> column_values(const CsvTable& t, std::size_t col) {
  std::vector<double> v(t.rows());
  for (std::size_t i = 0; i < t.rows(); ++i) v[i] = t.number(i, col);
  return v;
}

void check_frame_index(const CsvTable& t) {
  const std::size_t col = t.require_column("frame_idx");
  for (std::size_t i = 1; i < t.rows(); ++i) {
    if (!(t.number(i, col) > t.number(i - 1, col))) {
      throw ParseError(t.source(), i + 1, "frame_idx", "frame indices must increase");
    }
  }
}

template <typename F>
void rethrow_as_parse(const std::string& source, F&& fn) {
  try {
    fn();
  } catch (const ParseError&) {
    throw;
  } catch (const InvalidInput& e) {
    throw ParseError(source, 0, "", e.what());
  }
}

void append_row(std::string& out, const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    out += format_double(values[i]);
  }
  out += '\n';
}

}  // namespace

ChannelTrace ingest_channel_trace(const fs::path& path) {
  const CsvTable t = CsvTable::read(path);
  check_frame_index(t);
  const std::size_t tc = t.require_column("t_sec");
  const double rate = rate_from_timestamps(t, tc);
  const double start = t.number(0, tc);
  ChannelTrace tr;
  tr.r = UniformSeries(column_values(t, t.require_column("mean_r")), rate, start);
  tr.g = UniformSeries(column_values(t, t.require_column("mean_g")), rate, start);
  tr.b = UniformSeries(column_values(t, t.require_column("mean_b")), rate, start);
  if (auto nir = t.column("mean_nir")) tr.nir = UniformSeries(column_values(t, *nir), rate, start);
  rethrow_as_parse(path.string(), [&] { tr.validate(); });
  return tr;
}

void write_channel_trace(const fs::path& path, const ChannelTrace& trace) {
  trace.validate();
  std::string out = trace.nir ? "frame_idx,t_sec,mean_r,mean_g,mean_b,mean_nir\n" : "frame_idx,t_sec,mean_r,mean_g,mean_b\n";
  for (std::size_t i = 0; i < trace.frame_count(); ++i) {
    std::vector<double> row{static_cast<double>(i), trace.g.time_at(i), trace.r[i], trace.g[i], trace.b[i]};
    if (trace.nir) row.push_back((*trace.nir)[i]);
    append_row(out, row);
  }
  write_text_file(path, out);
}

namespace {

const char* kGazeColumns[] = {"gaze_x_rad_left", "gaze_y_rad_left", "gaze_x_rad_right", "gaze_y_rad_right"};

}  // namespace

FacialData ingest_facial_csv(const fs::path& path) {
  const CsvTable t = CsvTable::read(path);
  check_frame_index(t);
  const std::size_t tc = t.require_column("t_sec");
  const double rate = rate_from_timestamps(t, tc);
  const double start = t.number(0, tc);
  FacialData d;
  d.confidence = column_values(t, t.require_column("confidence"));
  std::vector<UniformSeries> gaze;
  for (const char* name : kGazeColumns) {
    const std::size_t c = t.require_column(name);
    auto v = column_values(t, c);
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (std::abs(v[i]) > std::numbers::pi / 2) throw ParseError(path.string(), i + 1, name, "gaze angle beyond +-pi/2");
    }
    gaze.emplace_back(std::move(v), rate, start);
  }
  d.gaze.gaze_x_rad = std::move(gaze[0]);
  d.gaze.gaze_y_rad = std::move(gaze[1]);
  d.gaze.right_x_rad = std::move(gaze[2]);
  d.gaze.right_y_rad = std::move(gaze[3]);
  for (const char* name : kAuNames) {
    const std::size_t c = t.require_column(name);
    auto v = column_values(t, c);
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] < 0.0) throw ParseError(path.string(), i + 1, name, "negative AU intensity");
    }
    d.fau.au.emplace_back(std::move(v), rate, start);
  }
  std::vector<std::size_t> xc(68), yc(68);
  for (std::size_t k = 0; k < 68; ++k) {
    xc[k] = t.require_column("x_" + std::to_string(k));
    yc[k] = t.require_column("y_" + std::to_string(k));
  }
  d.face_boxes.reserve(t.rows());
  std::vector<double> xs(68), ys(68);
  for (std::size_t i = 0; i < t.rows(); ++i) {
    for (std::size_t k = 0; k < 68; ++k) {
      xs[k] = t.number(i, xc[k]);
      ys[k] = t.number(i, yc[k]);
    }
    try {
      d.face_boxes.push_back(expand_face_bbox(landmark_bbox(xs, ys)));
    } catch (const InvalidInput& e) {
      throw ParseError(path.string(), i + 1, "x_0", e.what());
    }
  }
  rethrow_as_parse(path.string(), [&] {
    d.gaze.validate();
    d.fau.validate();
  });
  return d;
}

void write_facial_csv(const fs::path& path, const GazeTrace& gaze, const FauTrace& fau,
                      const std::vector<double>& confidence, const std::vector<std::vector<double>>& landmarks_x,
                      const std::vector<std::vector<double>>& landmarks_y) {
  gaze.validate();
  fau.validate();
  if (!gaze.binocular()) throw InvalidInput("write_facial_csv: per-eye gaze required");
  const std::size_t n = gaze.size();
  if (fau.size() != n || confidence.size() != n || landmarks_x.size() != n || landmarks_y.size() != n) {
    throw InvalidInput("write_facial_csv: inputs differ in length");
  }
  std::string out = "frame_idx,t_sec,confidence";
  for (const char* name : kGazeColumns) out += std::string(",") + name;
  for (const char* name : kAuNames) out += std::string(",") + name;
  for (std::size_t k = 0; k < 68; ++k) out += ",x_" + std::to_string(k);
  for (std::size_t k = 0; k < 68; ++k) out += ",y_" + std::to_string(k);
  out += '\n';
  std::vector<double> row;
  for (std::size_t i = 0; i < n; ++i) {
    if (landmarks_x[i].size() != 68 || landmarks_y[i].size() != 68) {
      throw InvalidInput("write_facial_csv: 68 landmarks required per frame");
    }
    row = {static_cast<double>(i), gaze.gaze_x_rad.time_at(i), confidence[i], gaze.gaze_x_rad[i],
           gaze.gaze_y_rad[i], (*gaze.right_x_rad)[i], (*gaze.right_y_rad)[i]};
    for (const auto& a : fau.au) row.push_back(a[i]);
    row.insert(row.end(), landmarks_x[i].begin(), landmarks_x[i].end());
    row.insert(row.end(), landmarks_y[i].begin(), landmarks_y[i].end());
    append_row(out, row);
  }
  write_text_file(path, out);
}

OximeterRecord ingest_oximeter(const fs::path& path) {
  const CsvTable t = CsvTable::read(path);
  const std::size_t tc = t.require_column("t_sec");
  const double rate = rate_from_timestamps(t, tc);
  const double start = t.number(0, tc);
  OximeterRecord ox;
  ox.spo2_pct = UniformSeries(column_values(t, t.require_column("spo2_pct")), rate, start);
  ox.hr_bpm = UniformSeries(column_values(t, t.require_column("hr_bpm")), rate, start);
  ox.waveform = UniformSeries(column_values(t, t.require_column("waveform")), rate, start);
  rethrow_as_parse(path.string(), [&] { ox.validate(); });
  return ox;
}

void write_oximeter(const fs::path& path, const OximeterRecord& ox) {
  ox.validate();
  std::string out = "t_sec,spo2_pct,hr_bpm,waveform\n";
  for (std::size_t i = 0; i < ox.waveform.size(); ++i) {
    append_row(out, {ox.waveform.time_at(i), ox.spo2_pct[i], ox.hr_bpm[i], ox.waveform[i]});
  }
  write_text_file(path, out);
}

namespace {

Phase parse_phase(const std::string& s) {
  if (s == "question") return Phase::Question;
  if (s == "response") return Phase::Response;
  throw InvalidInput("unknown phase '" + s + "'");
}

Label parse_label(const std::string& s) {
  if (s == "truthful") return Label::Truthful;
  if (s == "deceptive") return Label::Deceptive;
  throw InvalidInput("unknown label '" + s + "'");
}

json parse_json_file(const fs::path& path) {
  const std::string text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string(), 0, "", std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace

std::vector<IntervalAnnotation> ingest_annotations(const fs::path& path) {
  const json j = parse_json_file(path);
  if (!j.is_array()) throw ParseError(path.string(), 0, "", "annotations must be a JSON array");
  std::vector<IntervalAnnotation> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const json& o = j[i];
    std::string field;
    try {
      IntervalAnnotation a;
      field = "subject_id";
      a.subject_id = o.at(field).get<std::string>();
      field = "question_id";
      a.question_id = o.at(field).get<int>();
      field = "phase";
      a.phase = parse_phase(o.at(field).get<std::string>());
      field = "start_s";
      a.start_s = o.at(field).get<double>();
      field = "end_s";
      a.end_s = o.at(field).get<double>();
      field = "label";
      if (o.contains(field) && !o.at(field).is_null()) a.label = parse_label(o.at(field).get<std::string>());
      field.clear();
      a.validate();
      out.push_back(std::move(a));
    } catch (const json::exception& e) {
      throw ParseError(path.string(), i + 1, field, e.what());
    } catch (const InvalidInput& e) {
      throw ParseError(path.string(), i + 1, field, e.what());
    }
  }
  return out;
}

void write_annotations(const fs::path& path, const std::vector<IntervalAnnotation>& annotations) {
  json j = json::array();
  for (const auto& a : annotations) {
    a.validate();
    json o;
    o["subject_id"] = a.subject_id;
    o["question_id"] = a.question_id;
    o["phase"] = phase_name(a.phase);
    o["start_s"] = a.start_s;
    o["end_s"] = a.end_s;
    o["label"] = a.label ? json(label_name(*a.label)) : json(nullptr);
    j.push_back(std::move(o));
  }
  write_text_file(path, j.dump(2) + "\n");
}

UniformSeries ingest_sync_trace(const fs::path& path) {
  const CsvTable t = CsvTable::read(path);
  const std::size_t tc = t.require_column("t_sec");
  const double rate = rate_from_timestamps(t, tc);
  return UniformSeries(column_values(t, t.require_column("intensity")), rate, t.number(0, tc));
}

void write_sync_trace(const fs::path& path, const UniformSeries& trace) {
  std::string out = "t_sec,intensity\n";
  for (std::size_t i = 0; i < trace.size(); ++i) append_row(out, {trace.time_at(i), trace[i]});
  write_text_file(path, out);
}

std::vector<RecordingManifest> read_manifest(const fs::path& path) {
  const json j = parse_json_file(path);
  const fs::path base = path.parent_path();
  if (!j.is_object() || !j.contains("recordings") || !j["recordings"].is_array()) {
    throw ParseError(path.string(), 0, "recordings", "manifest needs a 'recordings' array");
  }
  std::vector<RecordingManifest> out;
  const json& recs = j["recordings"];
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const json& o = recs[i];
    std::string field;
    auto file = [&](const std::string& name) {
      field = name;
      fs::path p = o.at(name).get<std::string>();
      if (p.is_relative()) p = base / p;
      if (!fs::exists(p)) throw ParseError(path.string(), i + 1, name, "file not found: " + p.string());
      return p;
    };
    try {
      RecordingManifest m;
      field = "subject_id";
      m.subject_id = o.at(field).get<std::string>();
      field = "split";
      m.split = o.at(field).get<std::string>();
      if (m.split != "train" && m.split != "val" && m.split != "test") {
        throw ParseError(path.string(), i + 1, field, "split must be train, val or test");
      }
      if (o.contains("channel_trace")) m.channel_trace = file("channel_trace");
      if (o.contains("facial")) m.facial = file("facial");
      if (o.contains("oximeter")) m.oximeter = file("oximeter");
      if (o.contains("annotations")) m.annotations = file("annotations");
      if (o.contains("sync_traces")) {
        for (const auto& [sensor, p] : o.at("sync_traces").items()) {
          field = "sync_traces." + sensor;
          fs::path q = p.get<std::string>();
          if (q.is_relative()) q = base / q;
          if (!fs::exists(q)) throw ParseError(path.string(), i + 1, field, "file not found: " + q.string());
          m.sync_traces[parse_sensor(sensor)] = q;
        }
      }
      out.push_back(std::move(m));
    } catch (const json::exception& e) {
      throw ParseError(path.string(), i + 1, field, e.what());
    } catch (const InvalidInput& e) {
      throw ParseError(path.string(), i + 1, field, e.what());
    }
  }
  return out;
}

void write_manifest(const fs::path& path, const std::vector<RecordingManifest>& recordings) {
  const fs::path base = path.parent_path();
  auto rel = [&](const fs::path& p) {
    const fs::path r = p.lexically_relative(base);
    return (r.empty() ? p : r).generic_string();
  };
  json arr = json::array();
  for (const auto& m : recordings) {
    json o;
    o["subject_id"] = m.subject_id;
    o["split"] = m.split;
    if (!m.channel_trace.empty()) o["channel_trace"] = rel(m.channel_trace);
    if (!m.facial.empty()) o["facial"] = rel(m.facial);
    if (!m.oximeter.empty()) o["oximeter"] = rel(m.oximeter);
    if (!m.annotations.empty()) o["annotations"] = rel(m.annotations);
    if (!m.sync_traces.empty()) {
      json s;
      for (const auto& [sensor, p] : m.sync_traces) s[sensor_name(sensor)] = rel(p);
      o["sync_traces"] = s;
    }
    arr.push_back(std::move(o));
  }
  json j;
  j["recordings"] = arr;
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace physiocue
