// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "hvacdr/thermal/building.hpp"

namespace hvacdr::nn {

enum class Signal { hour, power, price, ambient, insolation, internal_load, temp };
enum class InputRole { time, controllable, environmental, feedback };

const char* signal_name(Signal s);
Signal signal_from_name(const std::string& name);

struct InputSlot {
  Signal signal = Signal::hour;
  int zone = 0;   // 1-based, temperature slots only
  int delay = 0;  // hours back from the current step

  bool operator==(const InputSlot&) const = default;
};

// Ordered network inputs. Zone networks ("narx") take the hour, power delays
// 0..tau1-1, environment delays 0..tau2-1 and own-zone temperature delays
// 1..tau3. Meta-predictors ("slamp") take the hour, price and environment
// delays 0..tau, scheduled-zone temperature and power delays 1..tau.
struct InputLayout {
  std::string kind = "narx";
  std::vector<int> taus;
  int zone = 0;
  std::vector<int> temp_zones;
  std::vector<InputSlot> slots;

  static InputLayout narx(int tau1, int tau2, int tau3, int zone);
  static InputLayout slamp(int tau1, int tau2, int tau3, int tau4, std::vector<int> zones);

  int size() const { return static_cast<int>(slots.size()); }
  InputRole role(int i) const;
  std::vector<int> indices(InputRole role) const;
  int max_delay() const;
  // Same inputs up to the target zone: the shared-architecture rule.
  bool same_shape(const InputLayout& other) const;
  // Checks slot structure against kind and taus; throws config_error.
  void validate() const;
};

// Hourly values of every signal over the previous day (hours -23..0) and the
// current day (hours 1..24).
class Timeline {
 public:
  static constexpr int kFirst = -23;
  static constexpr int kLast = thermal::kHours;
  static constexpr int kSpan = kLast - kFirst + 1;

  Timeline() = default;
  Timeline(const thermal::ScenarioDay& prior, const thermal::ScenarioDay& today);

  double value(Signal s, int zone, int hour) const;
  double power(int hour) const { return power_[index(hour)]; }
  double temp(int zone, int hour) const { return temps_[zone - 1][index(hour)]; }
  void set_power(int hour, double v) { power_[index(hour)] = v; }
  void set_temp(int zone, int hour, double v) { temps_[zone - 1][index(hour)] = v; }
  // Copies logged powers and temperatures for one day (0 = prior, 1 = today).
  void set_records(int day, std::span<const thermal::OperatingRecord> records);

  void inputs(const InputLayout& layout, int hour, std::span<double> out) const;
  std::vector<double> inputs(const InputLayout& layout, int hour) const;

 private:
  static int index(int hour);
  std::array<double, kSpan> price_{}, ambient_{}, insolation_{}, load_{}, power_{};
  std::array<std::array<double, kSpan>, thermal::kZones> temps_{};
};

}  // namespace hvacdr::nn
