// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "hvacdr/thermal/building.hpp"

namespace hvacdr::thermal {

struct ZoneBand {
  int zone = 1;  // 1-based
  double lo = 20.0;
  double hi = 25.0;
  double mid() const { return 0.5 * (lo + hi); }
};

struct OccupiedWindow {
  int first = 8;
  int last = 19;
  bool contains(int hour) const { return hour >= first && hour <= last; }
};

// Default comfort bands of the small office: 20-25 degC, 19-23 degC in zones 2 and 5.
std::vector<ZoneBand> default_bands();

struct BaselineResult {
  Hourly power{};
  double level = 0.0;  // constant occupied-hours power, kW
  double cost = 0.0;
  // True when the warmest zone's occupied-hours mean sits within 0.25 degC
  // of its band midpoint; false means the nearest achievable level was used.
  bool achieved = false;
  std::vector<double> mean_offset;  // per band: mean temp minus midpoint
};

BaselineResult non_dr_baseline(const BuildingModel& model, const HvacModel& hvac,
                               const ScenarioDay& scenario, const std::vector<ZoneBand>& bands,
                               const ZoneTemps& initial, const OccupiedWindow& window = {});

}  // namespace hvacdr::thermal
