// SPDX-License-Identifier: Apache-2.0
#include "config.hpp"

#include <Eigen/Core>
#include "json.hpp"

#include "hvacdr/error.hpp"
#include "hvacdr/util/format.hpp"
#include "hvacdr/util/io.hpp"

namespace hvacdr::tools {

void RunConfig::validate() const {
  season.validate();
  if (zones.empty()) throw config_error("at least one zone must be scheduled");
  for (int z : zones)
    if (z < 1 || z > thermal::kConditioned) throw config_error("zone " + std::to_string(z) + " is not conditioned");
  for (int t : tau)
    if (t < 1 || t > 4) throw config_error("zone network delays must lie in [1,4]");
  arch.validate();
  if (!(p_rated > 0.0)) throw config_error("p_rated must be positive");
  if (!(hard_margin >= 0.0)) throw config_error("hard_margin must be >= 0");
  if (sigmoid_blocks < 1) throw config_error("sigmoid_blocks must be >= 1");
  if (!(gap >= 0.0)) throw config_error("gap must be >= 0");
  if (!(time_limit > 0.0) || !(day_time_limit > 0.0)) throw config_error("time limits must be positive");
  if (node_limit < 1) throw config_error("node_limit must be >= 1");
  if (draws < 1) throw config_error("draws must be >= 1");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw config_error("train_fraction must lie in (0,1)");
}

RunConfig load_config(const std::filesystem::path& path) {
  RunConfig c;
  if (path.empty()) return c;
  const std::string text = util::read_text(path);
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.contains("season")) c.season = scenario::season_from_json(j["season"].dump());
    c.scenario_seed = j.value("scenario_seed", c.scenario_seed);
    c.zones = j.value("zones", c.zones);
    if (j.contains("tau")) c.tau = j["tau"].get<std::array<int, 3>>();
    if (j.contains("units")) c.arch.units = j["units"].get<std::vector<int>>();
    if (j.contains("activations")) {
      c.arch.activations.clear();
      for (const auto& a : j["activations"]) c.arch.activations.push_back(nn::activation_from_name(a.get<std::string>()));
    }
    c.p_rated = j.value("p_rated", c.p_rated);
    c.hard_margin = j.value("hard_margin", c.hard_margin);
    c.sigmoid_blocks = j.value("sigmoid_blocks", c.sigmoid_blocks);
    c.relu_cuts = j.value("relu_cuts", c.relu_cuts);
    c.gap = j.value("gap", c.gap);
    c.time_limit = j.value("time_limit", c.time_limit);
    c.node_limit = j.value("node_limit", c.node_limit);
    c.day_time_limit = j.value("day_time_limit", c.day_time_limit);
    c.draws = j.value("draws", c.draws);
    c.train_fraction = j.value("train_fraction", c.train_fraction);
    c.select_e_th = j.value("select_e_th", c.select_e_th);
    c.select_cap = j.value("select_cap", c.select_cap);
  } catch (const nlohmann::json::exception& e) {
    throw config_error("bad config " + path.string() + ": " + e.what());
  }
  c.validate();
  return c;
}

std::string config_to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["season"] = nlohmann::ordered_json::parse(scenario::season_to_json(c.season));
  j["scenario_seed"] = c.scenario_seed;
  j["zones"] = c.zones;
  j["tau"] = c.tau;
  j["units"] = c.arch.units;
  auto acts = nlohmann::ordered_json::array();
  for (auto a : c.arch.activations) acts.push_back(nn::activation_name(a));
  j["activations"] = acts;
  j["p_rated"] = c.p_rated;
  j["hard_margin"] = c.hard_margin;
  j["sigmoid_blocks"] = c.sigmoid_blocks;
  j["relu_cuts"] = c.relu_cuts;
  j["gap"] = c.gap;
  j["time_limit"] = c.time_limit;
  j["node_limit"] = c.node_limit;
  j["day_time_limit"] = c.day_time_limit;
  j["draws"] = c.draws;
  j["train_fraction"] = c.train_fraction;
  j["select_e_th"] = c.select_e_th;
  j["select_cap"] = c.select_cap;
  return j.dump(2) + "\n";
}

std::string config_hash(const RunConfig& c) { return util::hex64(util::fnv1a(config_to_json(c))); }

void RunManifest::write(const std::filesystem::path& dir) const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["argv"] = argv;
  j["config_hash"] = config_hash;
  j["seeds"] = seeds;
  j["inputs"] = inputs;
  j["outputs"] = outputs;
  j["timings"] = timings;
  j["versions"] = {{"hvacdr", HVACDR_VERSION},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)},
                   {"compiler", __VERSION__}};
  util::ensure_dir(dir);
  util::write_text(dir / "manifest.json", j.dump(2) + "\n");
}

}  // namespace hvacdr::tools
