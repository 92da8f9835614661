// SPDX-License-Identifier: Apache-2.0
#include "hvacdr/nn/layout.hpp"

#include <algorithm>

#include "hvacdr/error.hpp"

namespace hvacdr::nn {

const char* signal_name(Signal s) {
  switch (s) {
    case Signal::hour: return "hour";
    case Signal::power: return "power";
    case Signal::price: return "price";
    case Signal::ambient: return "ambient";
    case Signal::insolation: return "insolation";
    case Signal::internal_load: return "internal_load";
    case Signal::temp: return "temp";
  }
  return "?";
}

Signal signal_from_name(const std::string& name) {
  for (Signal s : {Signal::hour, Signal::power, Signal::price, Signal::ambient, Signal::insolation,
                   Signal::internal_load, Signal::temp})
    if (name == signal_name(s)) return s;
  throw config_error("unknown input signal '" + name + "'");
}

InputLayout InputLayout::narx(int tau1, int tau2, int tau3, int zone) {
  if (tau1 < 1 || tau2 < 0 || tau3 < 0) throw config_error("invalid NARX delays");
  if (zone < 1 || zone > thermal::kConditioned) throw config_error("invalid NARX zone");
  InputLayout l;
  l.kind = "narx";
  l.taus = {tau1, tau2, tau3};
  l.zone = zone;
  l.slots.push_back({Signal::hour, 0, 0});
  for (int d = 0; d < tau1; ++d) l.slots.push_back({Signal::power, 0, d});
  for (int d = 0; d < tau2; ++d)
    for (Signal s : {Signal::ambient, Signal::insolation, Signal::internal_load})
      l.slots.push_back({s, 0, d});
  for (int d = 1; d <= tau3; ++d) l.slots.push_back({Signal::temp, zone, d});
  return l;
}

InputLayout InputLayout::slamp(int tau1, int tau2, int tau3, int tau4, std::vector<int> zones) {
  for (int t : {tau1, tau2, tau3, tau4})
    if (t < 0 || t > 4) throw config_error("meta-predictor delays must lie in [0,4]");
  for (int z : zones)
    if (z < 1 || z > thermal::kConditioned) throw config_error("invalid meta-predictor zone");
  InputLayout l;
  l.kind = "slamp";
  l.taus = {tau1, tau2, tau3, tau4};
  l.temp_zones = std::move(zones);
  l.slots.push_back({Signal::hour, 0, 0});
  for (int d = 0; d <= tau1; ++d) l.slots.push_back({Signal::price, 0, d});
  for (int d = 0; d <= tau2; ++d)
    for (Signal s : {Signal::ambient, Signal::insolation, Signal::internal_load})
      l.slots.push_back({s, 0, d});
  for (int z : l.temp_zones)
    for (int d = 1; d <= tau3; ++d) l.slots.push_back({Signal::temp, z, d});
  for (int d = 1; d <= tau4; ++d) l.slots.push_back({Signal::power, 0, d});
  return l;
}

InputRole InputLayout::role(int i) const {
  switch (slots.at(i).signal) {
    case Signal::hour: return InputRole::time;
    case Signal::power: return InputRole::controllable;
    case Signal::temp: return InputRole::feedback;
    default: return InputRole::environmental;
  }
}

std::vector<int> InputLayout::indices(InputRole r) const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i)
    if (role(i) == r) out.push_back(i);
  return out;
}

int InputLayout::max_delay() const {
  int m = 0;
  for (const auto& s : slots) m = std::max(m, s.delay);
  return m;
}

bool InputLayout::same_shape(const InputLayout& o) const {
  if (kind != o.kind || taus != o.taus || slots.size() != o.slots.size()) return false;
  for (std::size_t i = 0; i < slots.size(); ++i)
    if (slots[i].signal != o.slots[i].signal || slots[i].delay != o.slots[i].delay) return false;
  return true;
}

void InputLayout::validate() const {
  InputLayout ref;
  if (kind == "narx") {
    if (taus.size() != 3) throw config_error("NARX layout needs three delays");
    ref = narx(taus[0], taus[1], taus[2], zone);
  } else if (kind == "slamp") {
    if (taus.size() != 4) throw config_error("meta-predictor layout needs four delays");
    ref = slamp(taus[0], taus[1], taus[2], taus[3], temp_zones);
  } else {
    throw config_error("unknown layout kind '" + kind + "'");
  }
  if (ref.slots != slots) throw config_error("layout slots do not match its delays");
}

Timeline::Timeline(const thermal::ScenarioDay& prior, const thermal::ScenarioDay& today) {
  for (int h = 1; h <= thermal::kHours; ++h) {
    for (int day = 0; day < 2; ++day) {
      const auto& sc = day == 0 ? prior : today;
      const int k = index(day == 0 ? h - thermal::kHours : h);
      price_[k] = sc.prices[h - 1];
      ambient_[k] = sc.ambient[h - 1];
      insolation_[k] = sc.insolation[h - 1];
      load_[k] = sc.internal_load[h - 1];
    }
  }
}

int Timeline::index(int hour) {
  if (hour < kFirst || hour > kLast)
    throw input_error("hour " + std::to_string(hour) + " outside the two-day window");
  return hour - kFirst;
}

double Timeline::value(Signal s, int zone, int hour) const {
  const int k = index(hour);
  switch (s) {
    case Signal::hour: return static_cast<double>(((hour - 1) % 24 + 24) % 24 + 1);
    case Signal::power: return power_[k];
    case Signal::price: return price_[k];
    case Signal::ambient: return ambient_[k];
    case Signal::insolation: return insolation_[k];
    case Signal::internal_load: return load_[k];
    case Signal::temp: return temps_.at(zone - 1)[k];
  }
  return 0.0;
}

void Timeline::set_records(int day, std::span<const thermal::OperatingRecord> records) {
  if (records.size() != thermal::kHours) throw input_error("day records must have 24 rows");
  for (const auto& r : records) {
    const int hour = day == 0 ? r.t - thermal::kHours : r.t;
    power_[index(hour)] = r.power;
    for (int z = 1; z <= thermal::kZones; ++z) temps_[z - 1][index(hour)] = r.zone_temps[z - 1];
  }
}

void Timeline::inputs(const InputLayout& layout, int hour, std::span<double> out) const {
  if (static_cast<int>(out.size()) != layout.size()) throw input_error("input buffer size mismatch");
  for (int i = 0; i < layout.size(); ++i) {
    const auto& s = layout.slots[i];
    out[i] = value(s.signal, s.zone, hour - s.delay);
  }
}

std::vector<double> Timeline::inputs(const InputLayout& layout, int hour) const {
  std::vector<double> v(layout.size());
  inputs(layout, hour, v);
  return v;
}

}  // namespace hvacdr::nn
