#include "physiocue/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <boost/math/special_functions/beta.hpp>

#include "physiocue/errors.hpp"

namespace physiocue {

double student_t_cdf(double t, double df) {
  if (!(df > 0.0)) throw InvalidInput("student_t_cdf: df must be positive");
  if (std::isnan(t)) throw InvalidInput("student_t_cdf: t is NaN");
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  if (t == 0.0) return 0.5;
  const double x = df / (df + t * t);
  const double tail = 0.5 * boost::math::ibeta(0.5 * df, 0.5, x);
  return t > 0 ? 1.0 - tail : tail;
}

TTestResult paired_t_test(std::span<const PairedSample> samples) {
  const std::size_t n = samples.size();
  if (n < 2) throw InvalidInput("paired_t_test needs at least 2 subjects, got " + std::to_string(n));
  std::vector<double> d;
  d.reserve(n);
  std::size_t up = 0;
  for (const auto& s : samples) {
    if (!std::isfinite(s.truthful_mean) || !std::isfinite(s.deceptive_mean)) {
      throw InvalidInput("paired_t_test: non-finite mean for subject " + s.subject_id);
    }
    d.push_back(s.deceptive_mean - s.truthful_mean);
    if (d.back() > 0.0) ++up;
  }
  TTestResult r;
  r.n = n;
  r.df = static_cast<int>(n - 1);
  r.mean_diff = mean(d);
  r.pct_following_trend = 100.0 * static_cast<double>(up) / static_cast<double>(n);
  const double sd = std::sqrt(variance(d) * static_cast<double>(n) / static_cast<double>(n - 1));
  if (!(sd > 1e-12 * std::max(1.0, std::abs(r.mean_diff)))) {
    r.degenerate = true;
    if (r.mean_diff == 0.0) {
      r.t_stat = 0.0;
      r.p_two_sided = 1.0;
      r.p_one_sided = 0.5;
    } else {
      r.t_stat = std::copysign(std::numeric_limits<double>::infinity(), r.mean_diff);
      r.p_two_sided = 0.0;
      r.p_one_sided = r.mean_diff > 0 ? 0.0 : 1.0;
    }
    return r;
  }
  r.t_stat = r.mean_diff / (sd / std::sqrt(static_cast<double>(n)));
  const double df = static_cast<double>(r.df);
  // Tail from the incomplete beta directly keeps precision for large |t|.
  const double two = boost::math::ibeta(0.5 * df, 0.5, df / (df + r.t_stat * r.t_stat));
  r.p_two_sided = std::clamp(two, 0.0, 1.0);
  r.p_one_sided = r.t_stat >= 0 ? 0.5 * r.p_two_sided : 1.0 - 0.5 * r.p_two_sided;
  return r;
}

std::vector<PairedSample> pair_by_subject(std::span<const LabeledValue> values) {
  struct Acc {
    double sum[2] = {0.0, 0.0};
    std::size_t n[2] = {0, 0};
  };
  std::map<std::string, Acc> acc;
  for (const auto& v : values) {
    if (!std::isfinite(v.value)) throw InvalidInput("pair_by_subject: non-finite value for " + v.subject_id);
    const int k = v.label == Label::Deceptive ? 1 : 0;
    acc[v.subject_id].sum[k] += v.value;
    acc[v.subject_id].n[k] += 1;
  }
  std::vector<PairedSample> out;
  for (const auto& [id, a] : acc) {
    if (a.n[0] == 0 || a.n[1] == 0) continue;
    out.push_back({id, a.sum[0] / static_cast<double>(a.n[0]), a.sum[1] / static_cast<double>(a.n[1])});
  }
  return out;
}

std::vector<ResponseValues> response_values(const SubjectSignals& subject) {
  const auto& hr = subject.hr.hr_bpm;
  if (hr.empty()) throw InvalidInput("response_values: empty HR series for " + subject.subject_id);
  const double hr_end = hr.time_at(hr.size() - 1) + 0.5 / hr.rate_hz;
  std::vector<ResponseValues> out;
  for (const auto& a : subject.annotations) {
    if (a.phase != Phase::Response || !a.label) continue;
    a.validate();
    const double slack = 0.5 / hr.rate_hz;
    if (a.start_s < hr.start_time_s - slack || a.end_s > hr_end + 1e-9) {
      throw InvalidInput("response interval " + std::to_string(a.question_id) + " of " + subject.subject_id +
                         " is not covered by the HR series");
    }
    double sum = 0.0;
    std::size_t n = 0;
    const auto first = static_cast<std::ptrdiff_t>(std::ceil((a.start_s - hr.start_time_s) * hr.rate_hz - 1e-9));
    for (auto i = std::max<std::ptrdiff_t>(first, 0); i < static_cast<std::ptrdiff_t>(hr.size()); ++i) {
      const double t = hr.time_at(static_cast<std::size_t>(i));
      if (t >= a.end_s) break;
      if (!a.contains(t)) continue;
      sum += hr[static_cast<std::size_t>(i)];
      ++n;
    }
    if (n == 0) {
      // Interval shorter than one HR sample: take the nearest sample.
      const double mid = 0.5 * (a.start_s + a.end_s);
      auto i = static_cast<std::ptrdiff_t>(std::lround((mid - hr.start_time_s) * hr.rate_hz));
      i = std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(hr.size()) - 1);
      sum = hr[static_cast<std::size_t>(i)];
      n = 1;
    }
    out.push_back({subject.subject_id, a.question_id, sum / static_cast<double>(n),
                   emr_over_interval(subject.saccade_times_s, a), *a.label});
  }
  return out;
}

std::vector<double> center_by_subject_median(std::span<const std::string> subject_ids, std::span<const double> values) {
  if (subject_ids.size() != values.size()) throw InvalidInput("center_by_subject_median: length mismatch");
  std::map<std::string, std::vector<double>> groups;
  for (std::size_t i = 0; i < values.size(); ++i) groups[subject_ids[i]].push_back(values[i]);
  std::map<std::string, double> med;
  for (auto& [id, v] : groups) med[id] = median(std::move(v));
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] - med[subject_ids[i]];
  return out;
}

std::vector<ResponseFeature> build_features(std::span<const ResponseValues> values) {
  std::vector<std::string> ids;
  std::vector<double> hr, emr;
  for (const auto& v : values) {
    if (!std::isfinite(v.hr_bpm) || !std::isfinite(v.emr)) {
      throw InvalidInput("build_features: non-finite value for " + v.subject_id);
    }
    ids.push_back(v.subject_id);
    hr.push_back(v.hr_bpm);
    emr.push_back(v.emr);
  }
  const auto pc = center_by_subject_median(ids, hr);
  const auto sc = center_by_subject_median(ids, emr);
  std::vector<ResponseFeature> out;
  out.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    out.push_back({values[i].subject_id, values[i].question_id, pc[i], sc[i], values[i].label});
  }
  return out;
}

std::vector<ResponseFeature> build_features(std::span<const SubjectSignals> subjects) {
  std::vector<ResponseValues> all;
  for (const auto& s : subjects) {
    auto v = response_values(s);
    all.insert(all.end(), v.begin(), v.end());
  }
  return build_features(all);
}

std::vector<Label> fuse_boolean(std::span<const Label> a, std::span<const Label> b, FuseMode mode) {
  if (a.size() != b.size()) throw InvalidInput("fuse_boolean: prediction sequences differ in length");
  std::vector<Label> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool x = a[i] == Label::Deceptive;
    const bool y = b[i] == Label::Deceptive;
    const bool z = mode == FuseMode::And ? (x && y) : (x || y);
    out[i] = z ? Label::Deceptive : Label::Truthful;
  }
  return out;
}

double accuracy(std::span<const Label> predicted, std::span<const Label> truth) {
  if (predicted.size() != truth.size()) throw InvalidInput("accuracy: length mismatch");
  if (predicted.empty()) throw InvalidInput("accuracy: empty input");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) hit += predicted[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(predicted.size());
}

}  // namespace physiocue
