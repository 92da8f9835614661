// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include <limits>

#include "fixtures.hpp"
#include "hvacdr/error.hpp"
#include "hvacdr/sched/scheduler.hpp"

using namespace hvacdr;
using namespace hvacdr::sched;

namespace {

History flat_history() {
  auto m = thermal::BuildingModel::small_office();
  thermal::HvacModel h;
  auto prior = fixtures::flat_day(0.04, 25.0);
  std::vector<double> p(thermal::kHours, 5.0);
  thermal::ZoneTemps s;
  s.fill(23.0);
  return History::from_prior_day(prior, thermal::simulate_day(m, h, prior, p, s));
}

ComfortSpec band(const thermal::ScenarioDay& day, double lo, double hi) {
  auto c = ComfortSpec::defaults({1}, day.prices);
  for (int t = c.window.first; t <= c.window.last; ++t) {
    c.zones[0].t_min[t - 1] = lo;
    c.zones[0].t_max[t - 1] = hi;
    c.zones[0].ht_min[t - 1] = lo - 0.5;
    c.zones[0].ht_max[t - 1] = hi + 0.5;
  }
  return c;
}

}  // namespace

TEST_SUITE("sched") {
  TEST_CASE("minimal one-hour instance") {
    auto net = fixtures::random_net(nn::Activation::relu, {1}, 4, nn::InputLayout::narx(1, 1, 1, 1));
    auto day = fixtures::flat_day();
    auto comfort = band(day, -50.0, 100.0);
    BuildOptions o;
    o.horizon = {3, 3};
    o.encode.clip_blocks = false;
    o.cutoff = std::numeric_limits<double>::infinity();
    auto hist = flat_history();
    hist.today_power[0] = hist.today_power[1] = 0.0;
    hist.today_temps[0][0] = hist.today_temps[0][1] = 22.0;
    auto prob = build_problem({net}, day, comfort, hist, o);
    CHECK(prob.p_var.size() == 1);
    CHECK(prob.model.binary_count() == 1);
    auto r = solve_schedule(prob, milp::BnbConfig{.rel_gap = 0.0});
    CHECK(r.solver.optimal);
    CHECK(r.solver.gap == 0.0);
    CHECK(r.power[2] == 0.0);
    CHECK(r.e_c == 0.0);
  }

  TEST_CASE("loose bands and positive prices give zero power") {
    // Small output weights keep the normalized output inside [-1, 1].
    auto net = fixtures::random_net(nn::Activation::relu, {5}, 6, nn::InputLayout::narx(2, 1, 0, 1), 0.02);
    auto day = fixtures::flat_day(0.08, 30.0);
    auto r = solve_schedule(build_problem({net}, day, band(day, -50.0, 100.0), flat_history()));
    for (double p : r.power) CHECK(p == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(r.e_c == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(r.t_v == doctest::Approx(0.0).epsilon(1e-9));
  }

  TEST_CASE("zero prices with a reachable band") {
    auto net = fixtures::monotone_net();
    auto day = fixtures::flat_day(0.0, 30.0);
    auto r = solve_schedule(build_problem({net}, day, band(day, 20.5, 23.0), flat_history()));
    CHECK(r.e_c == 0.0);
    CHECK(r.t_v == doctest::Approx(0.0).epsilon(1e-7));
    CHECK(r.solver.objective == doctest::Approx(r.e_c + r.t_v).epsilon(1e-9));
  }

  TEST_CASE("all-off profile pays only the violation") {
    auto net = fixtures::monotone_net();
    auto day = fixtures::flat_day(0.05, 30.0);
    auto c = band(day, 20.5, 23.0);
    Hourly off{};
    auto ev = evaluate_schedule(off, {net}, day, c, flat_history());
    CHECK(ev.e_c == 0.0);
    CHECK(ev.t_v == doctest::Approx(violation_cost(ev.zone_temps[0], c.zones[0], c)));
    CHECK(ev.t_v > 0.0);
  }

  TEST_CASE("schedule matches its own evaluation") {
    auto net = fixtures::monotone_net();
    auto day = fixtures::flat_day(0.05, 30.0);
    auto c = band(day, 20.5, 23.0);
    auto hist = flat_history();
    auto r = solve_schedule(build_problem({net}, day, c, hist));
    auto ev = evaluate_schedule(r.power, {net}, day, c, hist);
    CHECK(ev.e_c == doctest::Approx(r.e_c).epsilon(1e-9));
    CHECK(ev.t_v == doctest::Approx(r.t_v).epsilon(1e-6));
  }

  TEST_CASE("unreachable hard limits are infeasible") {
    auto net = fixtures::monotone_net();
    auto day = fixtures::flat_day(0.05, 30.0);
    auto c = band(day, 19.0, 20.0);
    try {
      solve_schedule(build_problem({net}, day, c, flat_history()));
      FAIL("expected infeasible_error");
    } catch (const infeasible_error& e) {
      CHECK_FALSE(e.rows.empty());
    }
  }

  TEST_CASE("input checks") {
    auto net = fixtures::monotone_net();
    auto day = fixtures::flat_day();
    auto c = band(day, 20.0, 25.0);
    History empty;
    CHECK_THROWS_AS(build_problem({net}, day, c, empty), input_error);
    auto other = fixtures::random_net(nn::Activation::relu, {3}, 1, nn::InputLayout::narx(3, 1, 1, 2));
    auto c2 = ComfortSpec::defaults({1, 2}, day.prices);
    CHECK_THROWS_AS(build_problem({net, other}, day, c2, flat_history()), config_error);
    c.t_e = 30;
    CHECK_THROWS_AS(c.validate(), config_error);
  }
}
