// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "hvacdr/nn/train.hpp"
#include "hvacdr/scenario/corpus.hpp"

namespace hvacdr::tools {

// Everything a command may read from --config. Unset keys keep these values.
struct RunConfig {
  scenario::SeasonConfig season;
  std::uint64_t scenario_seed = 11;
  std::vector<int> zones{1, 2};
  std::array<int, 3> tau{2, 1, 2};
  nn::Architecture arch{{5}, {nn::Activation::relu}};
  double p_rated = 30.0;
  double hard_margin = 2.0;
  int sigmoid_blocks = 5;
  bool relu_cuts = false;
  double gap = 1e-4;
  double time_limit = 60.0;
  long node_limit = 1000000;
  double day_time_limit = 2.0;  // per corpus day
  int draws = 128;
  double train_fraction = 0.8;
  double select_e_th = 0.9;
  std::size_t select_cap = 512;

  void validate() const;
};

RunConfig load_config(const std::filesystem::path& path);  // empty path: defaults
std::string config_to_json(const RunConfig& c);
std::string config_hash(const RunConfig& c);

// Written next to every command's outputs.
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  std::string config_hash;
  std::map<std::string, std::uint64_t> seeds;
  std::map<std::string, std::string> inputs, outputs;
  std::map<std::string, double> timings;  // seconds

  void write(const std::filesystem::path& dir) const;
};

}  // namespace hvacdr::tools
