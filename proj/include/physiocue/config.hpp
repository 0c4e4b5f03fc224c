#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "physiocue/classifier.hpp"
#include "physiocue/hr.hpp"
#include "physiocue/microexpression.hpp"
#include "physiocue/oculomotor.hpp"
#include "physiocue/rppg.hpp"
#include "physiocue/sync.hpp"

namespace physiocue {

struct AppConfig {
  RppgOptions rppg;
  RoiExpansion roi;
  HrOptions hr;
  GroundTruthOptions ground_truth;
  std::vector<PulseMethod> pulse_methods{PulseMethod::Chrom, PulseMethod::Pos, PulseMethod::Poh10, PulseMethod::Poh11};
  std::size_t gaze_block = 3;
  SaccadeOptions saccade;
  SpottingOptions spotting;
  double iou_min = 0.5;
  MarginOptions classifier;
  SyncPattern sync;
  BinarizeOptions binarize;
  double sync_grid_s = 1e-3;
  std::size_t stitch_clip_len = kDefaultClipLength;
};

// Flat "key = value" text; '#' starts a comment. Unknown keys and bad values
// raise ConfigError naming the line.
AppConfig parse_config(const std::string& text, const std::string& source_name = "<config>");
AppConfig load_config(const std::filesystem::path& path);

// Every key with its default value and a one-line description; parses back
// to the defaults.
std::string print_defaults();
std::string print_config(const AppConfig& config);

}  // namespace physiocue
