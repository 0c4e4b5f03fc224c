#include "physiocue/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>

#include "physiocue/classifier.hpp"
#include "physiocue/errors.hpp"
#include "physiocue/parallel.hpp"

namespace physiocue {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<RecordingManifest> select_split(const std::vector<RecordingManifest>& manifests,
                                            const std::string& split) {
  if (split.empty() || split == "all") return manifests;
  if (split != "train" && split != "val" && split != "test") throw ConfigError("unknown split '" + split + "'");
  std::vector<RecordingManifest> out;
  for (const auto& m : manifests) {
    if (m.split == split) out.push_back(m);
  }
  return out;
}

namespace {

void require(const fs::path& p, const RecordingManifest& m, const char* what) {
  if (p.empty()) throw InvalidInput("recording " + m.subject_id + " has no " + what + " file");
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string csv_line(const std::vector<std::string>& cells) {
  std::string s;
  for (std::size_t i = 0; i < cells.size(); ++i) s += (i ? "," : "") + cells[i];
  return s + "\n";
}

EvalOptions eval_options(const RunContext& ctx) {
  EvalOptions o;
  o.rppg = ctx.config.rppg;
  o.hr = ctx.config.hr;
  o.ground_truth = ctx.config.ground_truth;
  o.seed = ctx.seed;
  o.jobs = ctx.jobs;
  return o;
}

struct SaccadeData {
  UniformSeries velocity;
  std::vector<SaccadeEvent> events;
  std::vector<double> times_s;
};

SaccadeData saccades_of(const GazeTrace& gaze, const AppConfig& cfg) {
  SaccadeData d;
  d.velocity = angular_velocity(preprocess_gaze(gaze, cfg.gaze_block));
  d.events = detect_saccades(d.velocity, cfg.saccade);
  for (const auto& e : d.events) d.times_s.push_back(event_time_s(e, d.velocity));
  return d;
}

// The HR track starts half a window into the recording; interval features
// need the whole recording, so the first and last estimates are held.
HeartRateSeries estimated_hr(const ChannelTrace& trace, const RunContext& ctx) {
  const HeartRateSeries hr = windowed_hr(chrom_pulse(trace, ctx.config.rppg), ctx.config.hr);
  const auto& s = hr.hr_bpm;
  const double t0 = trace.g.start_time_s;
  const double t1 = trace.g.time_at(trace.frame_count() - 1);
  const auto lead = static_cast<std::size_t>(std::max(0.0, std::ceil((s.start_time_s - t0) * s.rate_hz - 1e-9)));
  const double last = s.time_at(s.size() - 1);
  const auto tail = static_cast<std::size_t>(std::max(0.0, std::ceil((t1 - last) * s.rate_hz - 1e-9)));
  std::vector<double> v(lead, s.samples.front());
  v.insert(v.end(), s.samples.begin(), s.samples.end());
  v.insert(v.end(), tail, s.samples.back());
  return {UniformSeries(std::move(v), s.rate_hz, s.start_time_s - static_cast<double>(lead) / s.rate_hz), hr.source};
}

struct ScopedInterval {
  IntervalAnnotation interval;
  Label label;
};

std::vector<ScopedInterval> scoped_intervals(const std::vector<IntervalAnnotation>& ann, IntervalScope scope) {
  std::vector<ScopedInterval> out;
  if (scope != IntervalScope::Combined) {
    const Phase want = scope == IntervalScope::Question ? Phase::Question : Phase::Response;
    for (const auto& a : ann) {
      if (a.phase == want && a.label) out.push_back({a, *a.label});
    }
    return out;
  }
  std::map<std::pair<std::string, int>, std::pair<const IntervalAnnotation*, const IntervalAnnotation*>> by_q;
  for (const auto& a : ann) {
    auto& slot = by_q[{a.subject_id, a.question_id}];
    (a.phase == Phase::Question ? slot.first : slot.second) = &a;
  }
  for (const auto& [key, qr] : by_q) {
    if (!qr.first || !qr.second) continue;
    const auto& r = *qr.second;
    const auto label = r.label ? r.label : qr.first->label;
    if (!label) continue;
    IntervalAnnotation c = r;
    c.start_s = std::min(qr.first->start_s, r.start_s);
    c.end_s = std::max(qr.first->end_s, r.end_s);
    out.push_back({c, *label});
  }
  return out;
}

double mean_hr_over(const HeartRateSeries& hr, const IntervalAnnotation& a) {
  const auto& s = hr.hr_bpm;
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (a.contains(s.time_at(i))) {
      sum += s[i];
      ++n;
    }
  }
  if (n == 0) {
    throw InvalidInput("interval " + std::to_string(a.question_id) + " of " + a.subject_id +
                       " has no HR samples");
  }
  return sum / static_cast<double>(n);
}

json ttest_json(const TTestResult& r) {
  return {{"n_subjects", r.n},
          {"mean_diff", r.mean_diff},
          {"t_stat", std::isfinite(r.t_stat) ? json(r.t_stat) : json(r.t_stat > 0 ? "inf" : "-inf")},
          {"df", r.df},
          {"p_two_sided", r.p_two_sided},
          {"p_one_sided", r.p_one_sided},
          {"pct_following_trend", r.pct_following_trend},
          {"degenerate", r.degenerate}};
}

const char* feature_name(TestFeature f) {
  switch (f) {
    case TestFeature::Saccade: return "saccade";
    case TestFeature::Microexpression: return "microexp";
    case TestFeature::HeartRate: return "hr";
  }
  return "?";
}

const char* feature_units(TestFeature f) {
  switch (f) {
    case TestFeature::Saccade: return "saccades/s";
    case TestFeature::Microexpression: return "microexpressions/s";
    case TestFeature::HeartRate: return "bpm";
  }
  return "?";
}

const std::string kTtestCsvHeader =
    "feature,scope,n_subjects,mean_diff,t_stat,df,p_two_sided,p_one_sided,pct_following_trend,threshold_accuracy\n";

std::string ttest_csv_row(const std::string& feature, const std::string& scope, const TTestResult& r,
                          std::optional<double> acc) {
  return csv_line({feature, scope, std::to_string(r.n), format_double(r.mean_diff),
                   std::isfinite(r.t_stat) ? format_double(r.t_stat) : (r.t_stat > 0 ? "inf" : "-inf"),
                   std::to_string(r.df), format_double(r.p_two_sided), format_double(r.p_one_sided),
                   format_double(r.pct_following_trend), acc ? format_double(*acc) : ""});
}

}  // namespace

const char* scope_name(IntervalScope s) noexcept {
  switch (s) {
    case IntervalScope::Combined: return "combined";
    case IntervalScope::Question: return "question";
    case IntervalScope::Response: return "response";
  }
  return "?";
}

IntervalScope parse_scope(const std::string& s) {
  if (s == "combined") return IntervalScope::Combined;
  if (s == "question") return IntervalScope::Question;
  if (s == "response") return IntervalScope::Response;
  throw ConfigError("unknown interval scope '" + s + "'");
}

TestFeature parse_feature(const std::string& s) {
  if (s == "saccade" || s == "emr") return TestFeature::Saccade;
  if (s == "microexp") return TestFeature::Microexpression;
  if (s == "hr") return TestFeature::HeartRate;
  throw ConfigError("unknown feature '" + s + "'");
}

std::vector<PulseOutput> run_pulse(const std::vector<RecordingManifest>& manifests, PulseMethod method,
                                   const RunContext& ctx) {
  std::vector<PulseOutput> out(manifests.size());
  parallel_for(manifests.size(), ctx.jobs, [&](std::size_t i) {
    const auto& m = manifests[i];
    require(m.channel_trace, m, "channel-trace");
    const ChannelTrace trace = ingest_channel_trace(m.channel_trace);
    PulseEstimate p = estimate_pulse(trace, method, ctx.seed, ctx.config.rppg);
    out[i].subject_id = m.subject_id;
    out[i].hr = windowed_hr(p, ctx.config.hr);
    out[i].pulse = std::move(p.waveform);
  });
  return out;
}

Report run_pulse_eval(const std::vector<RecordingManifest>& manifests, const RunContext& ctx) {
  std::vector<Recording> recs(manifests.size());
  parallel_for(manifests.size(), ctx.jobs, [&](std::size_t i) {
    const auto& m = manifests[i];
    require(m.channel_trace, m, "channel-trace");
    require(m.oximeter, m, "oximeter");
    recs[i] = {m.subject_id, ingest_channel_trace(m.channel_trace), ingest_oximeter(m.oximeter)};
  });
  if (recs.empty()) throw InvalidInput("pulse-eval: no recordings selected");
  Report r;
  r.json = {{"experiment", "pulse-eval"}, {"n_recordings", recs.size()}, {"split", ctx.split.empty() ? "all" : ctx.split}};
  r.json["methods"] = json::array();
  r.csv = "method,me_bpm,mae_bpm,rmse_bpm,pearson_r,n_windows\n";
  const EvalOptions opts = eval_options(ctx);
  for (PulseMethod m : ctx.config.pulse_methods) {
    const EvalReport e = evaluate_method(recs, m, opts);
    r.json["methods"].push_back({{"method", e.method},
                                 {"me_bpm", e.me_bpm},
                                 {"mae_bpm", e.mae_bpm},
                                 {"rmse_bpm", e.rmse_bpm},
                                 {"pearson_r", optional_number(e.pearson_r)},
                                 {"n_windows", e.n_windows}});
    r.csv += csv_line({e.method, format_double(e.me_bpm), format_double(e.mae_bpm), format_double(e.rmse_bpm),
                       e.pearson_r ? format_double(*e.pearson_r) : "", std::to_string(e.n_windows)});
  }
  return r;
}

Report run_saccades(const std::vector<RecordingManifest>& manifests, const RunContext& ctx) {
  std::vector<SaccadeData> data(manifests.size());
  std::vector<std::vector<IntervalAnnotation>> annotations(manifests.size());
  parallel_for(manifests.size(), ctx.jobs, [&](std::size_t i) {
    require(manifests[i].facial, manifests[i], "facial");
    data[i] = saccades_of(ingest_facial_csv(manifests[i].facial).gaze, ctx.config);
    if (!manifests[i].annotations.empty()) annotations[i] = ingest_annotations(manifests[i].annotations);
  });
  Report r;
  r.json = {{"experiment", "saccades"}, {"threshold_dps", ctx.config.saccade.threshold_dps}};
  r.json["recordings"] = json::array();
  r.csv = "subject_id,start_frame,end_frame,start_s,peak_velocity_dps\n";
  for (std::size_t i = 0; i < manifests.size(); ++i) {
    const auto& d = data[i];
    const double dur = d.velocity.duration_s();
    r.json["recordings"].push_back({{"subject_id", manifests[i].subject_id},
                                    {"n_events", d.events.size()},
                                    {"duration_s", dur},
                                    {"rate_per_s", dur > 0 ? static_cast<double>(d.events.size()) / dur : 0.0}});
    for (std::size_t k = 0; k < d.events.size(); ++k) {
      const auto& e = d.events[k];
      r.csv += csv_line({manifests[i].subject_id, std::to_string(e.start_frame), std::to_string(e.end_frame),
                         format_double(d.times_s[k]), format_double(e.peak_velocity_dps)});
    }
  }
  bool any_annotations = false;
  std::string emr = "subject_id,question_id,phase,label,emr\n";
  for (std::size_t i = 0; i < manifests.size(); ++i) {
    for (const auto& a : annotations[i]) {
      any_annotations = true;
      emr += csv_line({manifests[i].subject_id, std::to_string(a.question_id), phase_name(a.phase),
                       a.label ? label_name(*a.label) : "", format_double(emr_over_interval(data[i].times_s, a))});
    }
  }
  if (any_annotations) r.tables["emr"] = std::move(emr);
  return r;
}

Report run_microexp(const std::vector<RecordingManifest>& manifests, const RunContext& ctx) {
  struct Out {
    std::vector<MicroexpressionCandidate> candidates;
    double threshold = 0.0;
    double rate = 0.0, start = 0.0, duration = 0.0;
  };
  std::vector<Out> data(manifests.size());
  parallel_for(manifests.size(), ctx.jobs, [&](std::size_t i) {
    require(manifests[i].facial, manifests[i], "facial");
    const FauTrace fau = ingest_facial_csv(manifests[i].facial).fau;
    const auto lens = window_lengths_for(ctx.config.spotting.window_durations_s, fau.rate_hz());
    const LikelihoodMap map = scan_window_likelihood(fau, lens);
    data[i].threshold = dynamic_threshold(map, ctx.config.spotting.k);
    data[i].candidates = select_candidates(map, data[i].threshold, ctx.config.spotting.selection);
    data[i].rate = fau.rate_hz();
    data[i].start = fau.start_time_s();
    data[i].duration = static_cast<double>(fau.size()) / fau.rate_hz();
  });
  Report r;
  r.json = {{"experiment", "microexp"}, {"k", ctx.config.spotting.k}};
  r.json["recordings"] = json::array();
  r.csv = "subject_id,onset_frame,apex_frame,offset_frame,likelihood,window_len\n";
  for (std::size_t i = 0; i < manifests.size(); ++i) {
    const auto& d = data[i];
    r.json["recordings"].push_back({{"subject_id", manifests[i].subject_id},
                                    {"threshold", d.threshold},
                                    {"n_candidates", d.candidates.size()},
                                    {"rate_per_s", static_cast<double>(d.candidates.size()) / d.duration}});
    for (const auto& c : d.candidates) {
      r.csv += csv_line({manifests[i].subject_id, std::to_string(c.onset_frame), std::to_string(c.apex_frame),
                         std::to_string(c.offset_frame), format_double(c.likelihood), std::to_string(c.window_len)});
    }
  }
  return r;
}

Report run_ttest(const std::vector<RecordingManifest>& manifests, TestFeature feature,
                 const std::vector<IntervalScope>& scopes, const RunContext& ctx) {
  if (scopes.empty()) throw ConfigError("ttest: no interval scope requested");
  // values[scope][recording] -> labelled values
  std::vector<std::vector<std::vector<LabeledValue>>> values(scopes.size(),
                                                             std::vector<std::vector<LabeledValue>>(manifests.size()));
  parallel_for(manifests.size(), ctx.jobs, [&](std::size_t i) {
    const auto& m = manifests[i];
    require(m.annotations, m, "annotation");
    const auto ann = ingest_annotations(m.annotations);
    std::vector<double> times;
    std::optional<HeartRateSeries> hr;
    if (feature == TestFeature::HeartRate) {
      require(m.channel_trace, m, "channel-trace");
      hr = estimated_hr(ingest_channel_trace(m.channel_trace), ctx);
    } else {
      require(m.facial, m, "facial");
      const FacialData face = ingest_facial_csv(m.facial);
      if (feature == TestFeature::Saccade) {
        times = saccades_of(face.gaze, ctx.config).times_s;
      } else {
        const auto cands = spot_microexpressions(face.fau, ctx.config.spotting);
        for (const auto& c : cands) {
          times.push_back(face.fau.start_time_s() + static_cast<double>(c.apex_frame) / face.fau.rate_hz());
        }
      }
    }
    for (std::size_t s = 0; s < scopes.size(); ++s) {
      for (const auto& si : scoped_intervals(ann, scopes[s])) {
        if (si.interval.subject_id != m.subject_id) continue;
        const double v = hr ? mean_hr_over(*hr, si.interval) : emr_over_interval(times, si.interval);
        values[s][i].push_back({m.subject_id, si.label, v});
      }
    }
  });
  Report r;
  r.json = {{"experiment", std::string(feature_name(feature)) + "-ttest"},
            {"feature", feature_name(feature)},
            {"units", feature_units(feature)},
            {"split", ctx.split.empty() ? "all" : ctx.split}};
  r.json["scopes"] = json::array();
  r.csv = kTtestCsvHeader;
  for (std::size_t s = 0; s < scopes.size(); ++s) {
    std::vector<LabeledValue> all;
    for (const auto& v : values[s]) all.insert(all.end(), v.begin(), v.end());
    const auto pairs = pair_by_subject(all);
    const TTestResult t = paired_t_test(pairs);
    std::optional<double> acc;
    try {
      acc = median_threshold_classify(all).accuracy;
    } catch (const InvalidInput&) {
    }
    json j = ttest_json(t);
    j["scope"] = scope_name(scopes[s]);
    j["threshold_accuracy"] = optional_number(acc);
    r.json["scopes"].push_back(j);
    r.csv += ttest_csv_row(feature_name(feature), scope_name(scopes[s]), t, acc);
  }
  return r;
}

Report run_ttest_values(const std::vector<ResponseValues>& values) {
  Report r;
  r.json = {{"experiment", "response-ttest"}};
  r.json["features"] = json::array();
  r.csv = kTtestCsvHeader;
  for (TestFeature f : {TestFeature::HeartRate, TestFeature::Saccade}) {
    std::vector<LabeledValue> lv;
    for (const auto& v : values) lv.push_back({v.subject_id, v.label, f == TestFeature::HeartRate ? v.hr_bpm : v.emr});
    const TTestResult t = paired_t_test(pair_by_subject(lv));
    std::optional<double> acc;
    try {
      acc = median_threshold_classify(lv).accuracy;
    } catch (const InvalidInput&) {
    }
    json j = ttest_json(t);
    j["feature"] = feature_name(f);
    j["units"] = feature_units(f);
    j["scope"] = "response";
    j["threshold_accuracy"] = optional_number(acc);
    r.json["features"].push_back(j);
    r.csv += ttest_csv_row(feature_name(f), "response", t, acc);
  }
  return r;
}

Report run_fusion_values(const std::vector<ResponseValues>& train, const std::vector<ResponseValues>& test,
                         const RunContext& ctx) {
  if (train.empty() || test.empty()) throw InvalidInput("fusion: need both training and test responses");
  const auto ftrain = build_features(train);
  const auto ftest = build_features(test);
  const auto truth = feature_labels(ftest);

  std::vector<Label> pulse_pred, sacc_pred;
  for (const auto& f : ftest) {
    pulse_pred.push_back(f.pulse_feat > 0.0 ? Label::Deceptive : Label::Truthful);
    sacc_pred.push_back(f.saccade_feat > 0.0 ? Label::Deceptive : Label::Truthful);
  }
  const auto x_train = feature_matrix(ftrain);
  const auto y_train = feature_labels(ftrain);
  const auto x_test = feature_matrix(ftest);

  std::vector<std::pair<std::string, double>> rows;
  rows.emplace_back("always truthful", accuracy(std::vector<Label>(truth.size(), Label::Truthful), truth));
  rows.emplace_back("pulse threshold", accuracy(pulse_pred, truth));
  rows.emplace_back("saccade threshold", accuracy(sacc_pred, truth));
  rows.emplace_back("pulse AND saccade", accuracy(fuse_boolean(pulse_pred, sacc_pred, FuseMode::And), truth));
  rows.emplace_back("pulse OR saccade", accuracy(fuse_boolean(pulse_pred, sacc_pred, FuseMode::Or), truth));
  std::vector<std::optional<MarginClassifier>> models(2);
  const MarginKind kinds[2] = {MarginKind::Linear, MarginKind::Rbf};
  parallel_for(2, ctx.jobs, [&](std::size_t k) {
    models[k] = MarginClassifier::train(x_train, y_train, kinds[k], ctx.seed, ctx.config.classifier);
  });
  rows.emplace_back("margin linear", classify(*models[0], x_test, truth).accuracy);
  rows.emplace_back("margin rbf", classify(*models[1], x_test, truth).accuracy);

  Report r;
  r.json = {{"experiment", "fusion"}, {"n_train", ftrain.size()}, {"n_test", ftest.size()}, {"seed", ctx.seed}};
  r.json["accuracy"] = json::array();
  r.csv = "technique,accuracy\n";
  for (const auto& [name, acc] : rows) {
    r.json["accuracy"].push_back({{"technique", name}, {"accuracy", acc}});
    r.csv += csv_line({name, format_double(acc)});
  }
  return r;
}

Report run_fusion(const std::vector<RecordingManifest>& manifests, const RunContext& ctx) {
  std::vector<std::vector<ResponseValues>> per(manifests.size());
  parallel_for(manifests.size(), ctx.jobs, [&](std::size_t i) {
    const auto& m = manifests[i];
    require(m.channel_trace, m, "channel-trace");
    require(m.facial, m, "facial");
    require(m.annotations, m, "annotation");
    SubjectSignals s;
    s.subject_id = m.subject_id;
    s.hr = estimated_hr(ingest_channel_trace(m.channel_trace), ctx);
    s.saccade_times_s = saccades_of(ingest_facial_csv(m.facial).gaze, ctx.config).times_s;
    for (auto& a : ingest_annotations(m.annotations)) {
      if (a.subject_id == m.subject_id) s.annotations.push_back(std::move(a));
    }
    per[i] = response_values(s);
  });
  std::vector<ResponseValues> train, test;
  for (std::size_t i = 0; i < manifests.size(); ++i) {
    auto& dst = manifests[i].split == "train" ? train : manifests[i].split == "test" ? test : train;
    if (manifests[i].split == "val") continue;
    dst.insert(dst.end(), per[i].begin(), per[i].end());
  }
  return run_fusion_values(train, test, ctx);
}

Report run_sync_offsets(const std::vector<RecordingManifest>& manifests, const RunContext& ctx) {
  struct Row {
    std::string subject;
    SensorKind sensor;
    OffsetEstimate est;
  };
  std::vector<std::vector<Row>> per(manifests.size());
  parallel_for(manifests.size(), ctx.jobs, [&](std::size_t i) {
    const auto& m = manifests[i];
    if (m.sync_traces.empty()) throw InvalidInput("recording " + m.subject_id + " has no sync traces");
    for (const auto& [sensor, path] : m.sync_traces) {
      const EdgeSequence edges = binarize_intensity(ingest_sync_trace(path), ctx.config.binarize);
      per[i].push_back({m.subject_id, sensor, estimate_offset(edges, ctx.config.sync, sensor, ctx.config.sync_grid_s)});
    }
  });
  Report r;
  r.json = {{"experiment", "sync-offsets"}};
  r.json["offsets"] = json::array();
  r.csv = "subject_id,sensor,offset_s,residual_rms_s,n_edges\n";
  for (const auto& rows : per) {
    for (const auto& row : rows) {
      r.json["offsets"].push_back({{"subject_id", row.subject},
                                   {"sensor", sensor_name(row.sensor)},
                                   {"offset_s", row.est.offset_s},
                                   {"residual_rms_s", row.est.residual_rms_s},
                                   {"n_edges", row.est.n_edges}});
      r.csv += csv_line({row.subject, sensor_name(row.sensor), format_double(row.est.offset_s),
                         format_double(row.est.residual_rms_s), std::to_string(row.est.n_edges)});
    }
  }
  return r;
}

std::vector<ResponseValues> read_response_values(const fs::path& path) {
  const CsvTable t = CsvTable::read(path);
  const std::size_t sc = t.require_column("subject_id");
  const std::size_t qc = t.require_column("question_id");
  const std::size_t lc = t.require_column("label");
  const std::size_t hc = t.require_column("hr_bpm");
  const std::size_t ec = t.require_column("emr");
  std::vector<ResponseValues> out;
  for (std::size_t i = 0; i < t.rows(); ++i) {
    ResponseValues v;
    v.subject_id = t.text(i, sc);
    if (v.subject_id.empty()) throw ParseError(path.string(), i + 1, "subject_id", "empty subject id");
    const double q = t.number(i, qc);
    if (q != std::floor(q)) throw ParseError(path.string(), i + 1, "question_id", "not an integer");
    v.question_id = static_cast<int>(q);
    const std::string& label = t.text(i, lc);
    if (label == "truthful") {
      v.label = Label::Truthful;
    } else if (label == "deceptive") {
      v.label = Label::Deceptive;
    } else {
      throw ParseError(path.string(), i + 1, "label", "unknown label '" + label + "'");
    }
    v.hr_bpm = t.number(i, hc);
    v.emr = t.number(i, ec);
    out.push_back(std::move(v));
  }
  return out;
}

void write_response_values(const fs::path& path, const std::vector<ResponseValues>& values) {
  std::string out = "subject_id,question_id,label,hr_bpm,emr\n";
  for (const auto& v : values) {
    out += csv_line({v.subject_id, std::to_string(v.question_id), label_name(v.label), format_double(v.hr_bpm),
                     format_double(v.emr)});
  }
  write_text_file(path, out);
}

fs::path write_session(const fs::path& dir, const std::vector<SubjectSession>& session) {
  fs::create_directories(dir);
  std::vector<RecordingManifest> manifests;
  json truth = json::array();
  for (const auto& s : session) {
    RecordingManifest m;
    m.subject_id = s.subject_id;
    m.split = s.split;
    m.channel_trace = dir / (s.subject_id + "_channels.csv");
    m.facial = dir / (s.subject_id + "_facial.csv");
    m.oximeter = dir / (s.subject_id + "_oximeter.csv");
    m.annotations = dir / (s.subject_id + "_annotations.json");
    write_channel_trace(m.channel_trace, s.trace);
    write_facial_csv(m.facial, s.gaze, s.fau, s.confidence, s.landmarks_x, s.landmarks_y);
    write_oximeter(m.oximeter, s.oximeter);
    write_annotations(m.annotations, s.annotations);
    json offsets;
    for (const auto& [sensor, trace] : s.sync_traces) {
      const fs::path p = dir / (s.subject_id + "_sync_" + sensor_name(sensor) + ".csv");
      write_sync_trace(p, trace);
      m.sync_traces[sensor] = p;
      offsets[sensor_name(sensor)] = s.sync_offsets_s.at(sensor);
    }
    truth.push_back({{"subject_id", s.subject_id}, {"sync_offsets_s", offsets}});
    manifests.push_back(std::move(m));
  }
  const fs::path manifest = dir / "manifest.json";
  write_manifest(manifest, manifests);
  write_text_file(dir / "truth.json", truth.dump(2) + "\n");
  return manifest;
}

}  // namespace physiocue
