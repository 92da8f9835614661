// SPDX-License-Identifier: Apache-2.0
#include "hvacdr/thermal/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hvacdr/error.hpp"

namespace hvacdr::thermal {

std::vector<ZoneBand> default_bands() {
  return {{1, 20.0, 25.0}, {2, 19.0, 23.0}, {3, 20.0, 25.0}, {4, 20.0, 25.0}, {5, 19.0, 23.0}};
}

namespace {

struct Probe {
  Hourly power{};
  std::vector<double> offsets;
  double worst = 0.0;  // max over bands of (occupied mean - midpoint)
};

Probe probe(const BuildingModel& model, const HvacModel& hvac, const ScenarioDay& scenario,
            const std::vector<ZoneBand>& bands, const ZoneTemps& initial,
            const OccupiedWindow& window, double level) {
  Probe p;
  for (int t = 1; t <= kHours; ++t) p.power[t - 1] = window.contains(t) ? level : 0.0;
  auto rec = simulate_day(model, hvac, scenario, p.power, initial);
  p.worst = -std::numeric_limits<double>::infinity();
  for (const auto& b : bands) {
    double sum = 0.0;
    int n = 0;
    for (int t = window.first; t <= window.last; ++t) {
      sum += rec[t - 1].zone_temps[b.zone - 1];
      ++n;
    }
    double off = sum / n - b.mid();
    p.offsets.push_back(off);
    p.worst = std::max(p.worst, off);
  }
  return p;
}

}  // namespace

BaselineResult non_dr_baseline(const BuildingModel& model, const HvacModel& hvac,
                               const ScenarioDay& scenario, const std::vector<ZoneBand>& bands,
                               const ZoneTemps& initial, const OccupiedWindow& window) {
  if (bands.empty()) throw config_error("baseline needs at least one comfort band");
  for (const auto& b : bands)
    if (b.zone < 1 || b.zone > kConditioned || !(b.lo < b.hi))
      throw config_error("invalid comfort band for zone " + std::to_string(b.zone));
  if (window.first < 1 || window.last > kHours || window.first > window.last)
    throw config_error("invalid occupied window");

  // The warmest-zone offset is decreasing in the constant level, so bisect for
  // the level that brings it to zero.
  double lo = 0.0, hi = hvac.p_rated;
  Probe p_lo = probe(model, hvac, scenario, bands, initial, window, lo);
  Probe p_hi = probe(model, hvac, scenario, bands, initial, window, hi);
  double level;
  if (p_lo.worst <= 0.0) {
    level = lo;
  } else if (p_hi.worst >= 0.0) {
    level = hi;
  } else {
    for (int it = 0; it < 60; ++it) {
      double m = 0.5 * (lo + hi);
      if (probe(model, hvac, scenario, bands, initial, window, m).worst > 0.0)
        lo = m;
      else
        hi = m;
    }
    level = hi;
  }
  Probe fin = probe(model, hvac, scenario, bands, initial, window, level);
  BaselineResult r;
  r.power = fin.power;
  r.level = level;
  r.cost = energy_cost(scenario.prices, r.power);
  r.mean_offset = fin.offsets;
  r.achieved = std::abs(fin.worst) <= 0.25;
  return r;
}

}  // namespace hvacdr::thermal
