// Batch command-line front end.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "physiocue/config.hpp"
#include "physiocue/errors.hpp"
#include "physiocue/experiments.hpp"
#include "physiocue/io.hpp"
#include "physiocue/synth.hpp"

namespace fs = std::filesystem;
using namespace physiocue;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitAnalysis = 3;
constexpr int kExitConfig = 4;

struct Common {
  std::string manifest;
  std::string out = ".";
  std::string config;
  std::string split;
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
};

void add_common(CLI::App* cmd, Common& c, bool needs_manifest) {
  auto* m = cmd->add_option("--manifest", c.manifest, "recording manifest (JSON)");
  if (needs_manifest) m->required();
  cmd->add_option("--out", c.out, "output directory")->capture_default_str();
  cmd->add_option("--config", c.config, "key = value configuration file");
  cmd->add_option("--seed", c.seed, "seed for every randomized step")->capture_default_str();
  cmd->add_option("--jobs", c.jobs, "recordings processed concurrently")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--split", c.split, "train, val, test or all");
}

RunContext context(const Common& c) {
  RunContext ctx;
  if (!c.config.empty()) ctx.config = load_config(c.config);
  ctx.seed = c.seed;
  ctx.jobs = c.jobs;
  ctx.split = c.split == "all" ? "" : c.split;
  return ctx;
}

std::vector<RecordingManifest> manifests(const Common& c) {
  auto all = read_manifest(c.manifest);
  auto sel = select_split(all, c.split);
  if (sel.empty()) throw InvalidInput("no recordings match split '" + c.split + "'");
  return sel;
}

void emit(const Common& c, const std::string& stem, const Report& r) {
  const fs::path dir = c.out;
  write_text_file(dir / (stem + ".json"), r.json.dump(2) + "\n");
  if (!r.csv.empty()) write_text_file(dir / (stem + ".csv"), r.csv);
  for (const auto& [key, table] : r.tables) write_text_file(dir / (stem + "_" + key + ".csv"), table);
  std::cout << (dir / (stem + ".json")).string() << "\n";
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"physiocue: remote physiological and deception-cue analysis"};
  app.require_subcommand(1);

  Common pulse_c, eval_c, sacc_c, me_c, tt_c, fuse_c, sync_c;

  auto* pulse = app.add_subcommand("pulse", "estimate pulse waveforms and HR tracks");
  add_common(pulse, pulse_c, true);
  std::string pulse_method = "chrom";
  pulse->add_option("--method", pulse_method, "chrom, pos, poh10 or poh11")->capture_default_str();

  auto* hr_eval = app.add_subcommand("hr-eval", "pooled HR error of every configured method against the oximeter");
  add_common(hr_eval, eval_c, true);

  auto* sacc = app.add_subcommand("saccade", "detect saccades");
  add_common(sacc, sacc_c, true);

  auto* me = app.add_subcommand("microexp", "spot microexpression candidates");
  add_common(me, me_c, true);

  auto* tt = app.add_subcommand("ttest", "paired t-tests of truthful vs deceptive intervals");
  add_common(tt, tt_c, false);
  std::string tt_feature = "saccade", tt_scopes = "combined,question,response", tt_responses;
  tt->add_option("--feature", tt_feature, "saccade, microexp or hr")->capture_default_str();
  tt->add_option("--scope", tt_scopes, "comma-separated interval scopes")->capture_default_str();
  tt->add_option("--responses", tt_responses, "response-values CSV instead of a manifest");

  auto* fuse = app.add_subcommand("fuse", "threshold, boolean and margin classifiers on pulse and saccade features");
  add_common(fuse, fuse_c, false);
  std::string fuse_train, fuse_test;
  fuse->add_option("--train-responses", fuse_train, "training response-values CSV");
  fuse->add_option("--test-responses", fuse_test, "test response-values CSV");

  auto* sync = app.add_subcommand("sync", "estimate sensor clock offsets from beacon traces");
  add_common(sync, sync_c, true);

  auto* synth = app.add_subcommand("synth", "write synthetic fixtures");
  synth->require_subcommand(1);
  auto* synth_session_cmd = synth->add_subcommand("session", "full recording session with manifest");
  SessionSynthSpec session_spec;
  std::string session_out = "fixtures";
  synth_session_cmd->add_option("--out", session_out, "output directory")->capture_default_str();
  synth_session_cmd->add_option("--seed", session_spec.seed)->capture_default_str();
  synth_session_cmd->add_option("--subjects", session_spec.n_subjects)->capture_default_str()->check(CLI::PositiveNumber);
  synth_session_cmd->add_option("--duration", session_spec.duration_s, "seconds")->capture_default_str();
  auto* synth_resp_cmd = synth->add_subcommand("responses", "per-response HR and EMR values");
  ResponseSynthSpec resp_spec;
  std::string resp_out = "responses.csv";
  double hr_offset_sd = 0.0, emr_offset_sd = 0.0;
  synth_resp_cmd->add_option("--out", resp_out, "output CSV")->capture_default_str();
  synth_resp_cmd->add_option("--seed", resp_spec.seed)->capture_default_str();
  synth_resp_cmd->add_option("--subjects", resp_spec.n_subjects)->capture_default_str();
  synth_resp_cmd->add_option("--questions", resp_spec.questions_per_subject)->capture_default_str();
  synth_resp_cmd->add_option("--hr-offset-sd", hr_offset_sd, "deceptive HR offset in within-subject sds");
  synth_resp_cmd->add_option("--emr-offset-sd", emr_offset_sd, "deceptive EMR offset in within-subject sds");

  auto* cfg = app.add_subcommand("config", "print or check configuration");
  bool print_defaults_flag = false;
  std::string check_path;
  cfg->add_flag("--print-defaults", print_defaults_flag, "print every key with its default");
  cfg->add_option("--check", check_path, "parse a configuration file and print the resolved values");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*pulse) {
      const RunContext ctx = context(pulse_c);
      const auto method = parse_method(pulse_method);
      if (!method || *method == PulseMethod::External) throw ConfigError("unknown pulse method '" + pulse_method + "'");
      const auto outs = run_pulse(manifests(pulse_c), *method, ctx);
      nlohmann::json j = {{"method", method_name(*method)}, {"recordings", nlohmann::json::array()}};
      for (const auto& o : outs) {
        std::string wave = "t_sec,pulse\n", hr = "t_sec,hr_bpm\n";
        for (std::size_t i = 0; i < o.pulse.size(); ++i) {
          wave += format_double(o.pulse.time_at(i)) + "," + format_double(o.pulse[i]) + "\n";
        }
        for (std::size_t i = 0; i < o.hr.hr_bpm.size(); ++i) {
          hr += format_double(o.hr.hr_bpm.time_at(i)) + "," + format_double(o.hr.hr_bpm[i]) + "\n";
        }
        const std::string stem = o.subject_id + "_" + pulse_method;
        write_text_file(fs::path(pulse_c.out) / ("pulse_" + stem + ".csv"), wave);
        write_text_file(fs::path(pulse_c.out) / ("hr_" + stem + ".csv"), hr);
        j["recordings"].push_back({{"subject_id", o.subject_id},
                                   {"n_samples", o.pulse.size()},
                                   {"mean_hr_bpm", mean(o.hr.hr_bpm.values())}});
      }
      emit(pulse_c, "pulse_" + pulse_method, Report{j, ""});
    } else if (*hr_eval) {
      emit(eval_c, "pulse_eval", run_pulse_eval(manifests(eval_c), context(eval_c)));
    } else if (*sacc) {
      emit(sacc_c, "saccades", run_saccades(manifests(sacc_c), context(sacc_c)));
    } else if (*me) {
      emit(me_c, "microexp", run_microexp(manifests(me_c), context(me_c)));
    } else if (*tt) {
      const RunContext ctx = context(tt_c);
      if (!tt_responses.empty()) {
        emit(tt_c, "ttest_responses", run_ttest_values(read_response_values(tt_responses)));
      } else {
        if (tt_c.manifest.empty()) throw ConfigError("ttest needs --manifest or --responses");
        std::vector<IntervalScope> scopes;
        for (const auto& s : split_commas(tt_scopes)) scopes.push_back(parse_scope(s));
        const TestFeature f = parse_feature(tt_feature);
        emit(tt_c, std::string("ttest_") + tt_feature, run_ttest(manifests(tt_c), f, scopes, ctx));
      }
    } else if (*fuse) {
      const RunContext ctx = context(fuse_c);
      if (!fuse_train.empty() || !fuse_test.empty()) {
        if (fuse_train.empty() || fuse_test.empty()) throw ConfigError("fuse needs both --train-responses and --test-responses");
        emit(fuse_c, "fusion", run_fusion_values(read_response_values(fuse_train), read_response_values(fuse_test), ctx));
      } else {
        if (fuse_c.manifest.empty()) throw ConfigError("fuse needs --manifest or response files");
        emit(fuse_c, "fusion", run_fusion(read_manifest(fuse_c.manifest), ctx));
      }
    } else if (*sync) {
      emit(sync_c, "sync_offsets", run_sync_offsets(manifests(sync_c), context(sync_c)));
    } else if (*synth_session_cmd) {
      std::cout << write_session(session_out, synth_session(session_spec)).string() << "\n";
    } else if (*synth_resp_cmd) {
      resp_spec.hr_deceptive_offset = hr_offset_sd * resp_spec.hr_within_sd;
      resp_spec.emr_deceptive_offset = emr_offset_sd * resp_spec.emr_within_sd;
      write_response_values(resp_out, synth_responses(resp_spec));
      std::cout << resp_out << "\n";
    } else if (*cfg) {
      if (!check_path.empty()) {
        std::cout << print_config(load_config(check_path));
      } else if (print_defaults_flag) {
        std::cout << print_defaults();
      } else {
        throw ConfigError("config needs --print-defaults or --check");
      }
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "analysis error: " << e.what() << "\n";
    return kExitAnalysis;
  }
  return kExitOk;
}
