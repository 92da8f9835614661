// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include <Eigen/Dense>

#include "fixtures.hpp"
#include "hvacdr/error.hpp"
#include "hvacdr/thermal/baseline.hpp"
#include "hvacdr/thermal/dataset.hpp"
#include "hvacdr/thermal/weather.hpp"

using namespace hvacdr;
using namespace hvacdr::thermal;

namespace {

ZoneTemps equilibrium(const BuildingModel& m, const Env& e) {
  BuildingModel::Vec drive = m.b_x * e.ambient + m.b_g * m.ground_temp + m.c_solar * e.insolation +
                             m.c_internal * e.internal_load;
  Eigen::Matrix<double, kZones, kZones> I = Eigen::Matrix<double, kZones, kZones>::Identity();
  BuildingModel::Vec x = (I - m.A).fullPivLu().solve(drive);
  ZoneTemps out;
  for (int i = 0; i < kZones; ++i) out[i] = x(i);
  return out;
}

}  // namespace

TEST_SUITE("thermal") {
  TEST_CASE("reference building is stable and valid") {
    auto m = BuildingModel::small_office();
    CHECK_NOTHROW(m.validate());
    CHECK(m.spectral_radius() < 1.0);
    CHECK(m.cooling_alloc(kZones - 1) == 0.0);
  }

  TEST_CASE("COP falls linearly with ambient") {
    HvacModel h;
    CHECK(h.cop(20.0) == doctest::Approx(3.2));
    CHECK(h.cop(30.0) == doctest::Approx(2.7));
    CHECK(h.cooling(30.0, 10.0) == doctest::Approx(27.0));
  }

  TEST_CASE("equilibrium is a fixed point of step") {
    auto m = BuildingModel::small_office();
    HvacModel h;
    Env e{28.0, 3.0, 4.0};
    auto x = equilibrium(m, e);
    auto y = step(m, h, x, e, 0.0);
    for (int i = 0; i < kZones; ++i) CHECK(y[i] == doctest::Approx(x[i]).epsilon(1e-12));
  }

  TEST_CASE("zero power drifts monotonically toward equilibrium") {
    auto m = BuildingModel::small_office();
    HvacModel h;
    Env e{30.0, 0.0, 0.0};
    auto eq = equilibrium(m, e);
    ZoneTemps s;
    s.fill(18.0);
    double prev = 1e300;
    for (int k = 0; k < 200; ++k) {
      double dist = 0.0;
      for (int i = 0; i < kZones; ++i) dist = std::max(dist, std::abs(s[i] - eq[i]));
      CHECK(dist <= prev + 1e-12);
      prev = dist;
      s = step(m, h, s, e, 0.0);
    }
    CHECK(prev < 0.5);
  }

  TEST_CASE("simulate_day composes step") {
    auto m = BuildingModel::small_office();
    HvacModel h;
    auto day = fixtures::flat_day();
    std::vector<double> p(kHours, 0.0);
    ZoneTemps s;
    s.fill(22.0);
    auto rec = simulate_day(m, h, day, p, s);
    REQUIRE(rec.size() == kHours);
    for (int t = 1; t <= kHours; ++t) {
      s = step(m, h, s, day.env(t), 0.0);
      CHECK(rec[t - 1].t == t);
      for (int i = 0; i < kZones; ++i) CHECK(rec[t - 1].zone_temps[i] == doctest::Approx(s[i]).epsilon(1e-14));
    }
  }

  TEST_CASE("step rejects bad drivers") {
    auto m = BuildingModel::small_office();
    HvacModel h;
    ZoneTemps s;
    s.fill(22.0);
    CHECK_THROWS_AS(step(m, h, s, {25.0, 0.0, 0.0}, 31.0), input_error);
    CHECK_THROWS_AS(step(m, h, s, {NAN, 0.0, 0.0}, 1.0), input_error);
    std::vector<double> short_profile(10, 0.0);
    CHECK_THROWS_AS(simulate_day(m, h, fixtures::flat_day(), short_profile, s), input_error);
  }

  TEST_CASE("energy cost is linear in prices") {
    auto day = fixtures::flat_day();
    std::vector<double> p(kHours);
    for (int t = 0; t < kHours; ++t) p[t] = t % 7;
    Hourly zero{};
    CHECK(energy_cost(zero, p) == 0.0);
    Hourly doubled = day.prices;
    for (double& v : doubled) v *= 2.0;
    CHECK(energy_cost(doubled, p) == 2.0 * energy_cost(day.prices, p));
  }

  TEST_CASE("weather is deterministic per seed") {
    auto a = synthesize_scenarios(5, 183);
    auto b = synthesize_scenarios(5, 183);
    REQUIRE(a.size() == 183);
    for (std::size_t d = 0; d < a.size(); ++d) {
      CHECK(a[d].prices == b[d].prices);
      CHECK(a[d].ambient == b[d].ambient);
    }
    int distinct = 0;
    for (std::size_t d = 1; d < a.size(); ++d) distinct += a[d].ambient != a[d - 1].ambient;
    CHECK(distinct == 182);
  }

  TEST_CASE("dataset CSV round trip") {
    auto m = BuildingModel::small_office();
    HvacModel h;
    auto sc = synthesize_scenarios(3, 3);
    auto data = generate_dataset(m, h, sc, default_bands(), 1);
    REQUIRE(data.days.size() == 3);
    CHECK(data.rows() == 72);
    auto text = day_to_csv(data.days[1]);
    auto back = day_from_csv(text, data.days[1].scenario.date_tag);
    CHECK(day_to_csv(back) == text);
  }

  TEST_CASE("baseline cost uses occupied hours only") {
    auto m = BuildingModel::small_office();
    HvacModel h;
    auto day = fixtures::flat_day(0.05, 28.0);
    ZoneTemps s;
    s.fill(23.0);
    auto b = non_dr_baseline(m, h, day, default_bands(), s);
    OccupiedWindow w;
    for (int t = 1; t <= kHours; ++t)
      if (!w.contains(t)) CHECK(b.power[t - 1] == 0.0);
    CHECK(b.cost == doctest::Approx(energy_cost(day.prices, b.power)));
    Hourly zero{};
    day.prices = zero;
    CHECK(non_dr_baseline(m, h, day, default_bands(), s).cost == 0.0);
  }
}
