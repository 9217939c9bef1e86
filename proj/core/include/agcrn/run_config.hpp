#pragma once

#include <string>

#include "agcrn/model.hpp"
#include "agcrn/training.hpp"

namespace agcrn {

/// Run settings as read from an INI file with [data]/[model]/[train]
/// sections; every key has a same-named command-line flag.
struct RunConfig {
  std::string data_path;
  std::string graph_path;
  std::string out_dir = "out";
  std::size_t steps_per_day = 288;

  ModelConfig model;  // nodes == 0 means "infer from the data file"
  TrainConfig train;
};

/// Parses INI text into `cfg`. Unknown sections or keys are rejected;
/// `origin` names the source in error messages.
void apply_ini(RunConfig& cfg, const std::string& text, const std::string& origin);

RunConfig load_run_config(const std::string& path);

/// Effective-configuration echo; parseable by apply_ini.
std::string to_ini(const RunConfig& cfg);

}  // namespace agcrn
