// SPDX-License-Identifier: Apache-2.0
#include "hvacdr/scenario/corpus.hpp"

#include <chrono>
#include <cstdio>

#include "hvacdr/error.hpp"
#include "hvacdr/util/format.hpp"
#include "json.hpp"
#include "hvacdr/util/io.hpp"

namespace hvacdr::scenario {

namespace {

using namespace std::chrono;

sys_days parse_date(const std::string& s) {
  int y = 0;
  unsigned m = 0, d = 0;
  char tail = 0;
  if (std::sscanf(s.c_str(), "%d-%u-%u%c", &y, &m, &d, &tail) != 3)
    throw config_error("bad date '" + s + "', expected YYYY-MM-DD");
  year_month_day ymd{year{y}, month{m}, day{d}};
  if (!ymd.ok()) throw config_error("invalid date '" + s + "'");
  return sys_days{ymd};
}

std::string format_date(sys_days t) {
  year_month_day ymd{t};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()),
                unsigned(ymd.day()));
  return buf;
}

}  // namespace

void SeasonConfig::validate() const {
  auto start = parse_date(first_day);
  auto end = parse_date(last_day);
  parse_date(season_start);
  if (end < start) throw config_error("empty date range");
  if (weekend_load_factor <= 0.0 || weekend_load_factor > 1.0)
    throw config_error("weekend load factor must lie in (0, 1]");
  if (weather.price.peak < weather.price.overnight || weather.price.overnight < 0.0)
    throw config_error("price regime needs peak >= overnight >= 0");
}

int SeasonConfig::day_count() const {
  return static_cast<int>((parse_date(last_day) - parse_date(first_day)).count()) + 1;
}

bool is_weekend(const std::string& iso_date) {
  weekday wd{parse_date(iso_date)};
  return wd == Saturday || wd == Sunday;
}

std::vector<ScenarioDay> build_corpus(const SeasonConfig& config, std::uint64_t seed) {
  config.validate();
  const auto origin = parse_date(config.season_start);
  const auto first = parse_date(config.first_day);
  std::vector<ScenarioDay> out;
  const int n = config.day_count();
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const sys_days date = first + days{i};
    const int offset = static_cast<int>((date - origin).count());
    ScenarioDay d = thermal::synthesize_day(seed, offset, config.weather);
    d.date_tag = format_date(date);
    if (is_weekend(d.date_tag))
      for (double& v : d.internal_load) v *= config.weekend_load_factor;
    out.push_back(std::move(d));
  }
  return out;
}

ScenarioDay perturb_for_sensitivity(const ScenarioDay& day, double on_peak_multiplier) {
  if (!(on_peak_multiplier > 0.0)) throw config_error("on-peak multiplier must be positive");
  ScenarioDay out = day;
  for (int t = 11; t <= 18; ++t) out.prices[t - 1] *= on_peak_multiplier;
  return out;
}

double price_spread(const std::vector<ScenarioDay>& days) {
  double peak = 0.0, night = 0.0;
  int np = 0, nn = 0;
  for (const auto& d : days) {
    for (int t = 1; t <= thermal::kHours; ++t) {
      if (t >= 11 && t <= 18) {
        peak += d.prices[t - 1];
        ++np;
      } else if (t <= 6 || t >= 21) {
        night += d.prices[t - 1];
        ++nn;
      }
    }
  }
  if (np == 0 || nn == 0 || night <= 0.0) return 0.0;
  return (peak / np) / (night / nn);
}

namespace {

nlohmann::ordered_json hourly_json(const thermal::Hourly& h) {
  auto a = nlohmann::ordered_json::array();
  for (double v : h) a.push_back(v);
  return a;
}

thermal::Hourly hourly_from(const nlohmann::json& j, const char* key) {
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != thermal::kHours)
    throw input_error(std::string("scenario field '") + key + "' must have 24 entries");
  thermal::Hourly h{};
  for (int i = 0; i < thermal::kHours; ++i) h[i] = a[i].get<double>();
  return h;
}

}  // namespace

std::string scenario_to_json(const ScenarioDay& day) {
  nlohmann::ordered_json j;
  j["date_tag"] = day.date_tag;
  j["prices"] = hourly_json(day.prices);
  j["ambient"] = hourly_json(day.ambient);
  j["insolation"] = hourly_json(day.insolation);
  j["internal_load"] = hourly_json(day.internal_load);
  return j.dump(2) + "\n";
}

ScenarioDay scenario_from_json(const std::string& text) {
  try {
    auto j = nlohmann::json::parse(text);
    ScenarioDay d;
    d.date_tag = j.value("date_tag", "");
    d.prices = hourly_from(j, "prices");
    d.ambient = hourly_from(j, "ambient");
    d.insolation = hourly_from(j, "insolation");
    d.internal_load = hourly_from(j, "internal_load");
    d.validate();
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw input_error(std::string("bad scenario JSON: ") + e.what());
  }
}

std::vector<ScenarioDay> scenarios_from_csv(const std::string& text, const std::string& tag_prefix) {
  auto rows = util::parse_csv(text);
  if (rows.size() < 2) throw input_error("scenario CSV has no data rows");
  const auto& head = rows.front();
  auto col = [&](const std::string& name) {
    for (std::size_t i = 0; i < head.size(); ++i)
      if (head[i] == name) return static_cast<int>(i);
    throw input_error("scenario CSV lacks column '" + name + "'");
  };
  const int ct = col("t"), cp = col("price"), ca = col("ambient"), ci = col("insolation"),
            cl = col("internal_load");
  const std::size_t n = rows.size() - 1;
  if (n % thermal::kHours != 0) throw input_error("scenario CSV row count is not a multiple of 24");
  std::vector<ScenarioDay> out(n / thermal::kHours);
  for (std::size_t r = 0; r < n; ++r) {
    const auto& f = rows[r + 1];
    if (f.size() != head.size()) throw input_error("scenario CSV row has wrong field count");
    const std::size_t d = r / thermal::kHours;
    const int h = static_cast<int>(r % thermal::kHours) + 1;
    if (static_cast<int>(util::parse_double(f[ct])) != h)
      throw input_error("scenario CSV hours must cycle 1..24");
    out[d].prices[h - 1] = util::parse_double(f[cp]);
    out[d].ambient[h - 1] = util::parse_double(f[ca]);
    out[d].insolation[h - 1] = util::parse_double(f[ci]);
    out[d].internal_load[h - 1] = util::parse_double(f[cl]);
  }
  for (std::size_t d = 0; d < out.size(); ++d) {
    out[d].date_tag = tag_prefix + std::to_string(d);
    out[d].validate();
  }
  return out;
}

SeasonConfig season_from_json(const std::string& text) {
  SeasonConfig c;
  try {
    auto j = nlohmann::json::parse(text);
    c.season_start = j.value("season_start", c.season_start);
    c.first_day = j.value("first_day", c.first_day);
    c.last_day = j.value("last_day", c.last_day);
    c.weekend_load_factor = j.value("weekend_load_factor", c.weekend_load_factor);
    auto& w = c.weather;
    if (j.contains("weather")) {
      const auto& wj = j["weather"];
      w.ambient_mean = wj.value("ambient_mean", w.ambient_mean);
      w.ambient_season_swing = wj.value("ambient_season_swing", w.ambient_season_swing);
      w.ambient_amplitude = wj.value("ambient_amplitude", w.ambient_amplitude);
      w.ambient_day_noise = wj.value("ambient_day_noise", w.ambient_day_noise);
      w.ambient_hour_noise = wj.value("ambient_hour_noise", w.ambient_hour_noise);
      w.ambient_peak_hour = wj.value("ambient_peak_hour", w.ambient_peak_hour);
      w.insolation_peak = wj.value("insolation_peak", w.insolation_peak);
      w.load_noise = wj.value("load_noise", w.load_noise);
      w.season_days = wj.value("season_days", w.season_days);
      if (wj.contains("load_schedule")) w.load_schedule = hourly_from(wj, "load_schedule");
    }
    if (j.contains("price")) {
      const auto& pj = j["price"];
      auto& p = w.price;
      p.overnight = pj.value("overnight", p.overnight);
      p.peak = pj.value("peak", p.peak);
      p.ramp_start = pj.value("ramp_start", p.ramp_start);
      p.peak_start = pj.value("peak_start", p.peak_start);
      p.peak_hour = pj.value("peak_hour", p.peak_hour);
      p.peak_end = pj.value("peak_end", p.peak_end);
      p.ramp_end = pj.value("ramp_end", p.ramp_end);
      p.jitter = pj.value("jitter", p.jitter);
    }
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("bad season config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string season_to_json(const SeasonConfig& c) {
  nlohmann::ordered_json j;
  j["season_start"] = c.season_start;
  j["first_day"] = c.first_day;
  j["last_day"] = c.last_day;
  j["weekend_load_factor"] = c.weekend_load_factor;
  const auto& w = c.weather;
  j["weather"] = {{"ambient_mean", w.ambient_mean},
                  {"ambient_season_swing", w.ambient_season_swing},
                  {"ambient_amplitude", w.ambient_amplitude},
                  {"ambient_day_noise", w.ambient_day_noise},
                  {"ambient_hour_noise", w.ambient_hour_noise},
                  {"ambient_peak_hour", w.ambient_peak_hour},
                  {"insolation_peak", w.insolation_peak},
                  {"load_noise", w.load_noise},
                  {"season_days", w.season_days},
                  {"load_schedule", hourly_json(w.load_schedule)}};
  const auto& p = w.price;
  j["price"] = {{"overnight", p.overnight}, {"peak", p.peak},         {"ramp_start", p.ramp_start},
                {"peak_start", p.peak_start}, {"peak_hour", p.peak_hour}, {"peak_end", p.peak_end},
                {"ramp_end", p.ramp_end},   {"jitter", p.jitter}};
  return j.dump(2) + "\n";
}

}  // namespace hvacdr::scenario
