// SPDX-License-Identifier: Apache-2.0
#include "hvacdr/thermal/weather.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "hvacdr/error.hpp"

namespace hvacdr::thermal {

namespace {

double interp(double x, const std::vector<double>& xs, const std::vector<double>& ys) {
  if (x <= xs.front()) return ys.front();
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (x <= xs[i]) {
      double w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
      return ys[i - 1] + w * (ys[i] - ys[i - 1]);
    }
  }
  return ys.back();
}

}  // namespace

Hourly WeatherParams::default_load_schedule() {
  Hourly h{};
  for (int t = 1; t <= kHours; ++t) h[t - 1] = (t >= 7 && t <= 19) ? 12.0 : 2.0;
  return h;
}

ScenarioDay synthesize_day(std::uint64_t seed, int day_offset, const WeatherParams& p) {
  const auto& pr = p.price;
  if (!(pr.peak >= pr.overnight && pr.overnight >= 0.0))
    throw config_error("price regime needs peak >= overnight >= 0");
  if (!(1 <= pr.ramp_start && pr.ramp_start < pr.peak_start && pr.peak_start <= pr.peak_hour &&
        pr.peak_hour <= pr.peak_end && pr.peak_end < pr.ramp_end && pr.ramp_end < kHours))
    throw config_error("price ramp hours out of order");

  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(day_offset), 0x5eedu};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);

  const double pi = std::numbers::pi;
  const double season =
      std::max(0.0, std::sin(pi * (day_offset + 0.5) / std::max(1, p.season_days)));

  ScenarioDay d;
  const double offset = p.ambient_day_noise * normal(rng);
  const double mean = p.ambient_mean + p.ambient_season_swing * season + offset;
  for (int t = 1; t <= kHours; ++t)
    d.ambient[t - 1] = mean +
                       p.ambient_amplitude * std::cos(2.0 * pi * (t - p.ambient_peak_hour) / kHours) +
                       p.ambient_hour_noise * normal(rng);

  // Warm days are also the sunny ones.
  const double rel = p.ambient_day_noise > 0.0 ? offset / p.ambient_day_noise : 0.0;
  const double peak = p.insolation_peak * std::max(0.0, 0.8 + 0.1 * rel) * (0.7 + 0.3 * season);
  for (int t = 1; t <= kHours; ++t)
    d.insolation[t - 1] = std::max(0.0, std::sin(pi * (t - 6) / 14.0)) * peak;

  const double load_factor = 1.0 + p.load_noise * normal(rng);
  for (int t = 0; t < kHours; ++t) d.internal_load[t] = p.load_schedule[t] * load_factor;

  const double level = std::max(0.05, 1.0 + pr.jitter * normal(rng));
  const double lo = pr.overnight * level;
  const double hi = pr.peak * level;
  const double mid = 0.5 * (lo + hi);
  const std::vector<double> xs{1.0,
                               double(pr.ramp_start),
                               double(pr.ramp_start + 3),
                               double(pr.peak_start),
                               double(pr.peak_hour),
                               double(pr.peak_end),
                               double(pr.ramp_end),
                               double(kHours)};
  const std::vector<double> ys{1.05 * lo, lo, mid, 0.9 * hi, hi, 0.9 * hi, mid, 1.1 * lo};
  for (int t = 1; t <= kHours; ++t) d.prices[t - 1] = interp(t, xs, ys);

  d.date_tag = "day" + std::to_string(day_offset);
  return d;
}

std::vector<ScenarioDay> synthesize_scenarios(std::uint64_t seed, int n_days,
                                              const WeatherParams& params) {
  if (n_days < 1) throw config_error("n_days must be at least 1");
  std::vector<ScenarioDay> out;
  out.reserve(n_days);
  for (int d = 0; d < n_days; ++d) out.push_back(synthesize_day(seed, d, params));
  return out;
}

}  // namespace hvacdr::thermal
