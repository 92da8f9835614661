// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hvacdr/thermal/baseline.hpp"
#include "hvacdr/thermal/building.hpp"

namespace hvacdr::thermal {

struct DayLog {
  ScenarioDay scenario;
  std::vector<OperatingRecord> records;  // 24 rows

  Hourly power() const;
  Hourly temps(int zone) const;  // 1-based zone
};

// Chronological operating history. `prior` is the day before days[0]; it
// supplies the delayed taps of the first day.
struct Dataset {
  DayLog prior;
  std::vector<DayLog> days;

  std::size_t rows() const { return days.size() * kHours; }
};

struct ControllerOptions {
  double base_power = 15.0;
  double gain_lo = 4.0, gain_hi = 10.0;  // kW per degC, drawn per day
  double bias_range = 1.0;               // setpoint shift, degC
  double noise = 4.0;                    // kW
  double precool_probability = 0.6;
  int shutdown_hour = 20;
};

// Band-tracking thermostat with per-day excitation (gain, setpoint bias, noise,
// random early-morning pre-cooling) so that the logs cover the operating range.
std::vector<double> band_tracking_power(const BuildingModel& model, const HvacModel& hvac,
                                        const ScenarioDay& scenario,
                                        const std::vector<ZoneBand>& bands, const ZoneTemps& initial,
                                        std::uint64_t seed, int day_index,
                                        const ControllerOptions& options = {},
                                        std::vector<OperatingRecord>* records = nullptr);

// Simulates the scenarios back to back under the band-tracking controller.
// A warm-up day (the first scenario repeated) is logged as `prior`.
Dataset generate_dataset(const BuildingModel& model, const HvacModel& hvac,
                         const std::vector<ScenarioDay>& scenarios,
                         const std::vector<ZoneBand>& bands, std::uint64_t seed,
                         const ControllerOptions& options = {});

// CSV layout: t,price,ambient,insolation,internal_load,T1,...,T6,P
std::string day_to_csv(const DayLog& day);
DayLog day_from_csv(const std::string& text, const std::string& date_tag);

// Directory form: one CSV per day plus index.json (prior day stored as prior.csv).
void write_dataset(const Dataset& data, const std::filesystem::path& dir);
Dataset read_dataset(const std::filesystem::path& dir);

}  // namespace hvacdr::thermal
