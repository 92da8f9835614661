// SPDX-License-Identifier: Apache-2.0
#include "hvacdr/thermal/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "hvacdr/error.hpp"
#include "hvacdr/util/format.hpp"
#include "json.hpp"
#include "hvacdr/util/io.hpp"

namespace hvacdr::thermal {

using util::format_double;

Hourly DayLog::power() const {
  Hourly p{};
  for (int h = 0; h < kHours; ++h) p[h] = records.at(h).power;
  return p;
}

Hourly DayLog::temps(int zone) const {
  Hourly v{};
  for (int h = 0; h < kHours; ++h) v[h] = records.at(h).zone_temps.at(zone - 1);
  return v;
}

std::vector<double> band_tracking_power(const BuildingModel& model, const HvacModel& hvac,
                                        const ScenarioDay& scenario,
                                        const std::vector<ZoneBand>& bands, const ZoneTemps& initial,
                                        std::uint64_t seed, int day_index,
                                        const ControllerOptions& o,
                                        std::vector<OperatingRecord>* records) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(day_index), 0xc0017u};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  const bool precool = unit(rng) < o.precool_probability;
  const int precool_start = 1 + static_cast<int>(unit(rng) * 5.0);
  const double precool_level = 10.0 + 20.0 * unit(rng);
  const double bias = o.bias_range * (2.0 * unit(rng) - 1.0);
  const double gain = o.gain_lo + (o.gain_hi - o.gain_lo) * unit(rng);
  const OccupiedWindow window;

  std::vector<double> power(kHours, 0.0);
  ZoneTemps state = initial;
  if (records) records->clear();
  for (int h = 1; h <= kHours; ++h) {
    double p = 0.0;
    if (h >= o.shutdown_hour) {
      p = 0.0;
    } else if (window.contains(h)) {
      double err = -1e300;
      for (const auto& b : bands) err = std::max(err, state[b.zone - 1] - (b.mid() + bias));
      p = o.base_power + gain * err + o.noise * normal(rng);
    } else if (precool && h >= precool_start) {
      p = precool_level + 3.0 * normal(rng);
    }
    p = std::clamp(p, 0.0, hvac.p_rated);
    power[h - 1] = p;
    OperatingRecord r;
    r.t = h;
    r.price = scenario.prices[h - 1];
    r.env = scenario.env(h);
    r.power = p;
    state = step(model, hvac, state, r.env, p);
    r.zone_temps = state;
    if (records) records->push_back(r);
  }
  return power;
}

Dataset generate_dataset(const BuildingModel& model, const HvacModel& hvac,
                         const std::vector<ScenarioDay>& scenarios,
                         const std::vector<ZoneBand>& bands, std::uint64_t seed,
                         const ControllerOptions& options) {
  if (scenarios.empty()) throw config_error("dataset needs at least one scenario");
  Dataset data;
  ZoneTemps state;
  state.fill(24.0);
  // Two warm-up days wash out the arbitrary start state; the second is kept.
  for (int w = 0; w < 2; ++w) {
    std::vector<OperatingRecord> rec;
    band_tracking_power(model, hvac, scenarios.front(), bands, state, seed, -2 + w, options, &rec);
    state = rec.back().zone_temps;
    data.prior = {scenarios.front(), rec};
  }
  data.prior.scenario.date_tag = "warmup";
  for (std::size_t d = 0; d < scenarios.size(); ++d) {
    std::vector<OperatingRecord> rec;
    band_tracking_power(model, hvac, scenarios[d], bands, state, seed, static_cast<int>(d), options,
                        &rec);
    state = rec.back().zone_temps;
    data.days.push_back({scenarios[d], std::move(rec)});
  }
  return data;
}

std::string day_to_csv(const DayLog& day) {
  std::string out = "t,price,ambient,insolation,internal_load,T1,T2,T3,T4,T5,T6,P\n";
  for (const auto& r : day.records) {
    out += std::to_string(r.t);
    for (double v : {r.price, r.env.ambient, r.env.insolation, r.env.internal_load}) {
      out += ',';
      out += format_double(v);
    }
    for (double v : r.zone_temps) {
      out += ',';
      out += format_double(v);
    }
    out += ',';
    out += format_double(r.power);
    out += '\n';
  }
  return out;
}

DayLog day_from_csv(const std::string& text, const std::string& date_tag) {
  auto rows = util::parse_csv(text);
  if (rows.empty()) throw input_error("empty dataset CSV");
  const std::vector<std::string> header{"t",  "price", "ambient", "insolation", "internal_load",
                                        "T1", "T2",    "T3",      "T4",         "T5",
                                        "T6", "P"};
  if (rows.front() != header) throw input_error("unexpected dataset CSV header");
  if (rows.size() != kHours + 1)
    throw input_error("dataset CSV must have 24 data rows, got " + std::to_string(rows.size() - 1));
  DayLog day;
  day.scenario.date_tag = date_tag;
  for (int h = 1; h <= kHours; ++h) {
    const auto& f = rows[h];
    if (f.size() != header.size()) throw input_error("dataset CSV row has wrong field count");
    OperatingRecord r;
    r.t = static_cast<int>(util::parse_double(f[0]));
    if (r.t != h) throw input_error("dataset CSV hours must run 1..24 in order");
    r.price = util::parse_double(f[1]);
    r.env = {util::parse_double(f[2]), util::parse_double(f[3]), util::parse_double(f[4])};
    for (int z = 0; z < kZones; ++z) r.zone_temps[z] = util::parse_double(f[5 + z]);
    r.power = util::parse_double(f[11]);
    day.scenario.prices[h - 1] = r.price;
    day.scenario.ambient[h - 1] = r.env.ambient;
    day.scenario.insolation[h - 1] = r.env.insolation;
    day.scenario.internal_load[h - 1] = r.env.internal_load;
    day.records.push_back(r);
  }
  day.scenario.validate();
  return day;
}

void write_dataset(const Dataset& data, const std::filesystem::path& dir) {
  util::ensure_dir(dir);
  nlohmann::ordered_json index;
  index["format"] = 1;
  index["prior"] = {{"file", "prior.csv"}, {"date", data.prior.scenario.date_tag}};
  util::write_text(dir / "prior.csv", day_to_csv(data.prior));
  auto days = nlohmann::ordered_json::array();
  for (std::size_t d = 0; d < data.days.size(); ++d) {
    char name[32];
    std::snprintf(name, sizeof(name), "day_%03zu.csv", d);
    util::write_text(dir / name, day_to_csv(data.days[d]));
    days.push_back({{"file", name}, {"date", data.days[d].scenario.date_tag}});
  }
  index["days"] = days;
  util::write_text(dir / "index.json", index.dump(2) + "\n");
}

Dataset read_dataset(const std::filesystem::path& dir) {
  nlohmann::json index;
  try {
    index = nlohmann::json::parse(util::read_text(dir / "index.json"));
  } catch (const nlohmann::json::exception& e) {
    throw input_error(std::string("bad dataset index: ") + e.what());
  }
  Dataset data;
  try {
    const auto& pr = index.at("prior");
    data.prior = day_from_csv(util::read_text(dir / pr.at("file").get<std::string>()),
                              pr.at("date").get<std::string>());
    for (const auto& d : index.at("days"))
      data.days.push_back(day_from_csv(util::read_text(dir / d.at("file").get<std::string>()),
                                       d.at("date").get<std::string>()));
  } catch (const nlohmann::json::exception& e) {
    throw input_error(std::string("bad dataset index: ") + e.what());
  }
  if (data.days.empty()) throw input_error("dataset has no days");
  return data;
}

}  // namespace hvacdr::thermal
