#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "physiocue/config.hpp"
#include "physiocue/io.hpp"
#include "physiocue/stats.hpp"
#include "physiocue/synth.hpp"

namespace physiocue {

struct RunContext {
  AppConfig config;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::string split;  // empty selects every recording
};

// Recordings of the requested split, in manifest order.
std::vector<RecordingManifest> select_split(const std::vector<RecordingManifest>& manifests,
                                            const std::string& split);

// A report is a JSON document plus an optional CSV table with the same rows.
struct Report {
  nlohmann::json json;
  std::string csv;
  // Further tables written as <stem>_<key>.csv.
  std::map<std::string, std::string> tables;
};

// Per-recording pulse waveforms and HR tracks for one method.
struct PulseOutput {
  std::string subject_id;
  UniformSeries pulse;
  HeartRateSeries hr;
};
std::vector<PulseOutput> run_pulse(const std::vector<RecordingManifest>& manifests, PulseMethod method,
                                   const RunContext& ctx);

// One pooled error report per configured method.
Report run_pulse_eval(const std::vector<RecordingManifest>& manifests, const RunContext& ctx);

// Saccade events per recording (velocity frames after gaze averaging), plus
// the eye movement rate of every annotated interval when annotations exist.
Report run_saccades(const std::vector<RecordingManifest>& manifests, const RunContext& ctx);

// Microexpression candidates per recording.
Report run_microexp(const std::vector<RecordingManifest>& manifests, const RunContext& ctx);

enum class TestFeature { Saccade, Microexpression, HeartRate };
enum class IntervalScope { Combined, Question, Response };

const char* scope_name(IntervalScope s) noexcept;
IntervalScope parse_scope(const std::string& s);
TestFeature parse_feature(const std::string& s);

// Paired t-test and median-threshold accuracy for each requested scope.
Report run_ttest(const std::vector<RecordingManifest>& manifests, TestFeature feature,
                 const std::vector<IntervalScope>& scopes, const RunContext& ctx);

// Paired t-tests on tabulated response values (columns subject_id,
// question_id, label, hr_bpm, emr).
Report run_ttest_values(const std::vector<ResponseValues>& values);

// Threshold, boolean-fusion and margin classifiers on pulse and saccade
// features. Training uses the train split, scoring the test split.
Report run_fusion(const std::vector<RecordingManifest>& manifests, const RunContext& ctx);
Report run_fusion_values(const std::vector<ResponseValues>& train, const std::vector<ResponseValues>& test,
                         const RunContext& ctx);

Report run_sync_offsets(const std::vector<RecordingManifest>& manifests, const RunContext& ctx);

std::vector<ResponseValues> read_response_values(const std::filesystem::path& path);
void write_response_values(const std::filesystem::path& path, const std::vector<ResponseValues>& values);

// Writes a synthetic session (fixtures plus manifest.json) into `dir`.
std::filesystem::path write_session(const std::filesystem::path& dir, const std::vector<SubjectSession>& session);

}  // namespace physiocue
