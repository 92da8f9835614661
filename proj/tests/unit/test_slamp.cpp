// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <set>

#include "fixtures.hpp"
#include "hvacdr/error.hpp"
#include "hvacdr/slamp/slamp.hpp"
#include "hvacdr/util/io.hpp"

using namespace hvacdr;
using namespace hvacdr::slamp;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("hvacdr_unit_" + name);
  std::filesystem::remove_all(p);
  return p;
}

sched::History flat_history() {
  auto m = thermal::BuildingModel::small_office();
  thermal::HvacModel h;
  auto prior = fixtures::flat_day(0.04, 25.0);
  std::vector<double> p(thermal::kHours, 5.0);
  thermal::ZoneTemps s;
  s.fill(23.0);
  return sched::History::from_prior_day(prior, thermal::simulate_day(m, h, prior, p, s));
}

std::vector<ScenarioDay> varied_days(int n) {
  std::vector<ScenarioDay> out;
  for (int d = 0; d < n; ++d) {
    auto day = fixtures::flat_day(0.0, 27.0 + 0.5 * d);
    for (int t = 1; t <= thermal::kHours; ++t) day.prices[t - 1] = (t >= 11 && t <= 18 ? 0.11 : 0.04) + 0.002 * d;
    day.date_tag = "2012-07-" + std::string(d + 1 < 10 ? "0" : "") + std::to_string(d + 1);
    out.push_back(day);
  }
  return out;
}

CorpusOptions tight_band() {
  CorpusOptions o;
  o.bands = {{1, 20.5, 23.0}};
  o.hard_margin = 1.0;
  return o;
}

nn::NetworkSpec meta_net(std::uint64_t seed) {
  auto net = fixtures::random_net(nn::Activation::relu, {6}, seed, nn::InputLayout::slamp(1, 1, 2, 1, {1}), 1.0);
  net.out_bounds = {-10.0, 40.0};
  return net;
}

}  // namespace

TEST_SUITE("slamp") {
  TEST_CASE("whole-day split") {
    auto s = shuffle_split(10, 4);
    CHECK(s.train.size() == 8);
    CHECK(s.test.size() == 2);
    auto t = shuffle_split(10, 4);
    CHECK(s.train == t.train);
    CHECK(s.test == t.test);
    std::set<int> all(s.train.begin(), s.train.end());
    for (int d : s.test) CHECK(all.insert(d).second);
    CHECK(all.size() == 10);
    CHECK_THROWS_AS(shuffle_split(1, 4), input_error);
  }

  TEST_CASE("search ranges and draws") {
    SearchRanges r;
    CHECK_NOTHROW(r.validate());
    r.tau_hi = 5;
    CHECK_THROWS_AS(r.validate(), config_error);
    SearchRanges d;
    d.draws = 16;
    auto a = sample_candidates(d, 2), b = sample_candidates(d, 2);
    REQUIRE(a.size() == 16);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].label() == b[i].label());
      for (int tau : a[i].taus) CHECK((tau >= 0 && tau <= 4));
      CHECK((a[i].arch.hidden_layers() >= 1 && a[i].arch.hidden_layers() <= 10));
    }
  }

  TEST_CASE("composite score and folding") {
    std::array<double, 6> w{1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6};
    auto perfect = composite(1, 1, 1, 1, {1.0, true}, {1.0, true}, 30, w);
    CHECK(perfect.e_c == doctest::Approx(1.0));
    CHECK_FALSE(perfect.ec_folded);
    auto few = composite(0.9, 0.9, 0.6, 0.9, {0.0, true}, {0.0, true}, 3, w);
    CHECK(few.ec_folded);
    CHECK(few.tv_folded);
    CHECK(few.e_c == doctest::Approx((0.9 * 3 + 0.6 * 3) / 6));
    auto flat = composite(1, 1, 1, 1, {0.0, true}, {0.0, false}, 30, w);
    CHECK(flat.tv_folded);
    CHECK(flat.e_c == doctest::Approx(5.0 / 6));
    std::array<double, 6> bad{0.5, 0.5, 0.5, 0, 0, 0};
    CHECK_THROWS_AS(composite(1, 1, 1, 1, {1, true}, {1, true}, 30, bad), config_error);
  }

  TEST_CASE("corpus days, determinism and round trip") {
    auto net = fixtures::monotone_net();
    auto one = generate_corpus(varied_days(1), {net}, flat_history(), tight_band());
    CHECK(one.records() == 24);

    std::vector<ScenarioDay> same(3, varied_days(1).front());
    auto rep = generate_corpus(same, {net}, flat_history(), tight_band());
    REQUIRE(rep.days.size() == 3);
    CHECK(rep.days[1].optimal.power == rep.days[2].optimal.power);

    auto c = generate_corpus(varied_days(4), {net}, flat_history(), tight_band());
    REQUIRE(c.days.size() == 4);
    CHECK(c.days[1].prior.power == c.days[0].optimal.power);
    auto h = history_from(c.days[1].prior, c.zones);
    CHECK(h.prior_temps[0] == c.days[0].optimal.temps[0]);
    CHECK(h.prior_power == c.days[0].optimal.power);
    auto dir = scratch_dir("corpus");
    write_corpus(c, dir);
    auto back = read_corpus(dir);
    REQUIRE(back.days.size() == c.days.size());
    CHECK(back.zones == c.zones);
    for (std::size_t d = 0; d < c.days.size(); ++d) {
      CHECK(back.days[d].optimal.power == c.days[d].optimal.power);
      CHECK(back.days[d].optimal.temps == c.days[d].optimal.temps);
      CHECK(back.days[d].prior.power == c.days[d].prior.power);
      CHECK(back.days[d].e_c == c.days[d].e_c);
      CHECK(back.days[d].t_v == c.days[d].t_v);
    }
    auto dir2 = scratch_dir("corpus2");
    write_corpus(back, dir2);
    CHECK(util::read_text(dir / "index.json") == util::read_text(dir2 / "index.json"));
    std::filesystem::remove_all(dir);
    std::filesystem::remove_all(dir2);
  }

  TEST_CASE("meta prediction is deterministic and clamped") {
    auto net = fixtures::monotone_net();
    auto meta = meta_net(9);
    auto day = varied_days(1).front();
    auto c = sched::ComfortSpec::defaults({1}, day.prices);
    auto a = meta_predict(meta, day, flat_history(), {net}, c);
    auto b = meta_predict(meta, day, flat_history(), {net}, c);
    CHECK(a.power == b.power);
    CHECK(a.zone_temps == b.zone_temps);
    CHECK(a.solver.status == "predicted");
    for (int t = 1; t <= thermal::kHours; ++t) {
      CHECK(a.power[t - 1] >= 0.0);
      CHECK(a.power[t - 1] <= c.p_rated);
      if (t >= c.t_e) CHECK(a.power[t - 1] == 0.0);
    }
    sched::History empty;
    CHECK_THROWS_AS(meta_predict(meta, day, empty, {net}, c), input_error);
  }

  TEST_CASE("single-candidate search and registry") {
    auto net = fixtures::monotone_net();
    auto corpus = generate_corpus(varied_days(6), {net}, flat_history(), tight_band());
    auto split = shuffle_split(static_cast<int>(corpus.days.size()), 1);
    SearchOptions o;
    o.ranges.draws = 1;
    o.ranges.layers_hi = 1;
    o.ranges.units = {5};
    o.train.restarts = 1;
    o.train.scg.max_epochs = 30;
    o.corpus = tight_band();
    auto r = search_dnn(corpus, split, {net}, 3, o);
    CHECK(r.best_index == 0);
    REQUIRE(r.table.size() == 1);
    CHECK(r.table[0].selected);
    auto again = search_dnn(corpus, split, {net}, 3, o);
    CHECK(nn::content_hash(again.best) == nn::content_hash(r.best));
    auto csv = search_csv(r.table);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);

    auto dir = scratch_dir("registry");
    auto hash = registry_put(r.best, dir);
    CHECK(hash == nn::content_hash(r.best));
    CHECK(nn::to_json(registry_get(dir, hash)) == nn::to_json(r.best));
    CHECK_THROWS_AS(registry_get(dir, "0000"), error);
    std::filesystem::remove_all(dir);
  }
}
