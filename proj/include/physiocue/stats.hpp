#pragma once

#include <span>
#include <string>
#include <vector>

#include "physiocue/hr.hpp"
#include "physiocue/oculomotor.hpp"

namespace physiocue {

struct PairedSample {
  std::string subject_id;
  double truthful_mean = 0.0;
  double deceptive_mean = 0.0;
};

struct TTestResult {
  double mean_diff = 0.0;
  double t_stat = 0.0;
  int df = 0;
  double p_two_sided = 1.0;
  double p_one_sided = 0.5;  // upper tail, H1: deceptive > truthful
  double pct_following_trend = 0.0;
  std::size_t n = 0;
  // Set when the differences have zero spread; t is then 0 or +/-inf.
  bool degenerate = false;
};

// Student-t cumulative distribution, via the regularized incomplete beta.
double student_t_cdf(double t, double df);

// d_i = deceptive - truthful. Needs at least two subjects.
TTestResult paired_t_test(std::span<const PairedSample> samples);

// Per-subject means of truthful and deceptive values. Subjects lacking either
// label are skipped. Output is ordered by subject id.
std::vector<PairedSample> pair_by_subject(std::span<const LabeledValue> values);

struct ResponseFeature {
  std::string subject_id;
  int question_id = 0;
  double pulse_feat = 0.0;    // bpm relative to the subject's median response HR
  double saccade_feat = 0.0;  // saccades/s relative to the subject's median response EMR
  Label label = Label::Truthful;
};

struct SubjectSignals {
  std::string subject_id;
  HeartRateSeries hr;
  std::vector<double> saccade_times_s;
  std::vector<IntervalAnnotation> annotations;
};

// Raw per-response values before median centring.
struct ResponseValues {
  std::string subject_id;
  int question_id = 0;
  double hr_bpm = 0.0;
  double emr = 0.0;
  Label label = Label::Truthful;
};

// Mean HR and EMR over every labelled response interval. Each interval must
// lie inside the HR series' time span.
std::vector<ResponseValues> response_values(const SubjectSignals& subject);

// Subtracts each subject's median from its values.
std::vector<double> center_by_subject_median(std::span<const std::string> subject_ids, std::span<const double> values);

std::vector<ResponseFeature> build_features(std::span<const ResponseValues> values);
std::vector<ResponseFeature> build_features(std::span<const SubjectSignals> subjects);

enum class FuseMode { And, Or };

// Element-wise combination; deceptive counts as true.
std::vector<Label> fuse_boolean(std::span<const Label> a, std::span<const Label> b, FuseMode mode);

double accuracy(std::span<const Label> predicted, std::span<const Label> truth);

}  // namespace physiocue
