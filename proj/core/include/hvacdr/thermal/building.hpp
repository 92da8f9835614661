// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace hvacdr::thermal {

inline constexpr int kHours = 24;
inline constexpr int kZones = 6;        // core, four perimeters, attic
inline constexpr int kConditioned = 5;  // zones 1..5 are served by the HVAC unit

using ZoneTemps = std::array<double, kZones>;
using Hourly = std::array<double, kHours>;

struct Env {
  double ambient = 0.0;        // degC
  double insolation = 0.0;     // kW
  double internal_load = 0.0;  // kW
};

// Linear hourly RC surrogate of the six-zone small office. Zone i (1-based in
// file formats) lives at index i-1 here.
struct BuildingModel {
  using Vec = Eigen::Matrix<double, kZones, 1>;

  Eigen::Matrix<double, kZones, kZones> A;
  Vec b_x;            // ambient coupling
  Vec b_g;            // ground coupling
  Vec c_solar;        // degC per kWh of insolation
  Vec c_internal;     // degC per kWh of internal load
  Vec cooling_alloc;  // share of delivered cooling, zero for the attic
  Vec capacitance;    // kappa, kWh per degC
  double ground_temp = 15.0;

  static BuildingModel small_office();

  double spectral_radius() const;
  // Throws config_error when an invariant does not hold.
  void validate() const;
};

struct HvacModel {
  double p_rated = 30.0;
  double cop_0 = 3.2;
  double cop_slope = 0.05;

  double cop(double ambient) const { return cop_0 - cop_slope * (ambient - 20.0); }
  double cooling(double ambient, double power) const { return cop(ambient) * power; }
  void validate(double ambient_lo, double ambient_hi) const;
};

struct ScenarioDay {
  Hourly prices{};         // $/kWh
  Hourly ambient{};        // degC
  Hourly insolation{};     // kW
  Hourly internal_load{};  // kW
  std::string date_tag;

  Env env(int hour) const {
    return {ambient[hour - 1], insolation[hour - 1], internal_load[hour - 1]};
  }
  void validate() const;
};

struct OperatingRecord {
  int t = 1;
  double price = 0.0;
  Env env;
  ZoneTemps zone_temps{};
  double power = 0.0;
};

ZoneTemps step(const BuildingModel& model, const HvacModel& hvac, const ZoneTemps& state,
               const Env& env, double power);

std::vector<OperatingRecord> simulate_day(const BuildingModel& model, const HvacModel& hvac,
                                          const ScenarioDay& scenario,
                                          std::span<const double> power_profile,
                                          const ZoneTemps& initial);

// Sum of price times power over the day, with a one hour step.
double energy_cost(const Hourly& prices, std::span<const double> power);

}  // namespace hvacdr::thermal
