#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "physiocue/hr.hpp"
#include "physiocue/microexpression.hpp"
#include "physiocue/oculomotor.hpp"
#include "physiocue/rppg.hpp"
#include "physiocue/sync.hpp"

namespace physiocue {

// Shortest round-trip decimal text of a double.
std::string format_double(double v);

// Minimal CSV reader: comma separated, first line is the header, fields are
// trimmed of surrounding blanks. Numeric fields must be finite.
class CsvTable {
 public:
  static CsvTable read(const std::filesystem::path& path);
  static CsvTable parse(const std::string& text, const std::string& source_name);

  const std::vector<std::string>& header() const noexcept { return header_; }
  std::size_t rows() const noexcept { return cells_.size(); }
  const std::string& source() const noexcept { return source_; }
  std::optional<std::size_t> column(const std::string& name) const;
  std::size_t require_column(const std::string& name) const;
  // Row is 0-based here; errors report it 1-based.
  double number(std::size_t row, std::size_t col) const;
  const std::string& text(std::size_t row, std::size_t col) const { return cells_.at(row).at(col); }

 private:
  std::string source_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> cells_;
};

// Sample rate from strictly increasing timestamps; throws ParseError naming
// the first out-of-order or irregular row.
double rate_from_timestamps(const CsvTable& table, std::size_t t_col);

ChannelTrace ingest_channel_trace(const std::filesystem::path& path);
void write_channel_trace(const std::filesystem::path& path, const ChannelTrace& trace);

struct FacialData {
  GazeTrace gaze;  // per-eye
  FauTrace fau;
  std::vector<RoiBox> face_boxes;  // expanded landmark boxes, one per frame
  std::vector<double> confidence;
};

FacialData ingest_facial_csv(const std::filesystem::path& path);
void write_facial_csv(const std::filesystem::path& path, const GazeTrace& gaze, const FauTrace& fau,
                      const std::vector<double>& confidence, const std::vector<std::vector<double>>& landmarks_x,
                      const std::vector<std::vector<double>>& landmarks_y);

OximeterRecord ingest_oximeter(const std::filesystem::path& path);
void write_oximeter(const std::filesystem::path& path, const OximeterRecord& ox);

std::vector<IntervalAnnotation> ingest_annotations(const std::filesystem::path& path);
void write_annotations(const std::filesystem::path& path, const std::vector<IntervalAnnotation>& annotations);

UniformSeries ingest_sync_trace(const std::filesystem::path& path);
void write_sync_trace(const std::filesystem::path& path, const UniformSeries& trace);

struct RecordingManifest {
  std::string subject_id;
  std::string split;  // train, val or test
  std::filesystem::path channel_trace;
  std::filesystem::path facial;
  std::filesystem::path oximeter;
  std::filesystem::path annotations;
  std::map<SensorKind, std::filesystem::path> sync_traces;
};

// A manifest file holds {"recordings": [...]}; relative paths resolve
// against the manifest's directory. Referenced files must exist.
std::vector<RecordingManifest> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<RecordingManifest>& recordings);

std::string read_text_file(const std::filesystem::path& path);
// Writes through a temporary file and renames it into place.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace physiocue
