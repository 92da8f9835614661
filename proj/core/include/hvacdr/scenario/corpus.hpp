// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hvacdr/thermal/weather.hpp"

namespace hvacdr::scenario {

using thermal::ScenarioDay;

struct SeasonConfig {
  std::string season_start = "2012-04-01";  // day offset 0 of the seasonal swing
  std::string first_day = "2012-04-01";
  std::string last_day = "2012-09-30";      // inclusive
  thermal::WeatherParams weather;
  double weekend_load_factor = 0.6;         // weekends run at 60% internal load

  void validate() const;
  int day_count() const;
};

// One scenario per date, tagged with the ISO date; weekend days get their
// internal load flattened. Day d of any range matches day d of a longer range
// that covers the same date.
std::vector<ScenarioDay> build_corpus(const SeasonConfig& config, std::uint64_t seed);

// Scales prices in hours 11..18 only.
ScenarioDay perturb_for_sensitivity(const ScenarioDay& day, double on_peak_multiplier);

bool is_weekend(const std::string& iso_date);

// Mean on-peak (11..18) price over mean overnight (1..6, 21..24) price.
double price_spread(const std::vector<ScenarioDay>& days);

std::string scenario_to_json(const ScenarioDay& day);
ScenarioDay scenario_from_json(const std::string& text);

// Real data drop-in: a dataset-schema CSV with N*24 rows becomes N scenarios.
std::vector<ScenarioDay> scenarios_from_csv(const std::string& text, const std::string& tag_prefix);

SeasonConfig season_from_json(const std::string& text);
std::string season_to_json(const SeasonConfig& config);

}  // namespace hvacdr::scenario
