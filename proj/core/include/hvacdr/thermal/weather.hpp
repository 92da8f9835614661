// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "hvacdr/thermal/building.hpp"

namespace hvacdr::thermal {

struct PriceRegime {
  double overnight = 0.040;  // $/kWh
  double peak = 0.110;       // $/kWh
  int ramp_start = 4;        // last cheap morning hour
  int peak_start = 11;
  int peak_hour = 15;
  int peak_end = 18;
  int ramp_end = 20;
  double jitter = 0.12;      // relative sd of the day-level factor
};

struct WeatherParams {
  double ambient_mean = 23.0;
  double ambient_season_swing = 3.0;
  double ambient_amplitude = 5.0;
  double ambient_day_noise = 1.5;
  double ambient_hour_noise = 0.1;
  int ambient_peak_hour = 15;
  double insolation_peak = 8.0;
  Hourly load_schedule = default_load_schedule();
  double load_noise = 0.02;
  PriceRegime price;
  int season_days = 183;  // length of the warm season the swing is spread over

  static Hourly default_load_schedule();
};

// One synthetic day. `day_offset` counts days from the season start and fixes
// both the seasonal swing and the per-day random stream.
ScenarioDay synthesize_day(std::uint64_t seed, int day_offset, const WeatherParams& params = {});

// Consecutive days starting at the season start; deterministic per seed.
std::vector<ScenarioDay> synthesize_scenarios(std::uint64_t seed, int n_days,
                                              const WeatherParams& params = {});

}  // namespace hvacdr::thermal
