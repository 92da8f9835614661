// SPDX-License-Identifier: Apache-2.0
// Acceptance suite: one PASS/FAIL line per criterion. Reference values come
// from the oracles in tests/oracles and from the checks written out below,
// never from the code under test.
//
//   hvacdr_acceptance [--only 1,4,...] [--allow-fail 8,...] [--draws N]
//                     [--ear-time-limit S] [--corpus-time-limit S]
//
// The exit status is 0 when every criterion not listed in --allow-fail
// passes. Allowed failures still print FAIL.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hvacdr/ear/encoder.hpp"
#include "hvacdr/error.hpp"
#include "hvacdr/milp/bnb.hpp"
#include "hvacdr/milp/lp_format.hpp"
#include "hvacdr/nn/train.hpp"
#include "hvacdr/scenario/corpus.hpp"
#include "hvacdr/sched/scheduler.hpp"
#include "hvacdr/select/overfit.hpp"
#include "hvacdr/slamp/slamp.hpp"
#include "hvacdr/thermal/baseline.hpp"
#include "hvacdr/thermal/dataset.hpp"
#include "hvacdr/util/io.hpp"
#include "tableau_lp.hpp"

namespace fs = std::filesystem;
using namespace hvacdr;

namespace {

double now() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Settings {
  std::set<int> only, allow_fail;
  int draws = 4;
  double ear_time_limit = 60.0;
  double corpus_time_limit = 2.0;
};

struct Outcome {
  bool pass = false;
  std::string detail;
};

// NMSE written out from its definition: 1 - ||y - p|| / ||y - mean(y)||.
double ref_nmse(const std::vector<double>& y, const std::vector<double>& p) {
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    num += (y[i] - p[i]) * (y[i] - p[i]);
    den += (y[i] - mean) * (y[i] - mean);
  }
  return 1.0 - std::sqrt(num) / std::sqrt(den);
}

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// Shared inputs: the season up to the default day, the 150-day dataset
// before it, zone networks of the configured architecture.
struct World {
  thermal::BuildingModel model = thermal::BuildingModel::small_office();
  thermal::HvacModel hvac;
  std::vector<thermal::ScenarioDay> season;
  thermal::ScenarioDay today;
  thermal::Dataset data;
  std::vector<nn::NetworkSpec> nets;  // zones 1..5
  std::vector<nn::TrainReport> reports;

  World() {
    scenario::SeasonConfig cfg;
    cfg.last_day = "2012-08-29";
    season = scenario::build_corpus(cfg, 11);
    today = season.back();
    season.pop_back();
    data = thermal::generate_dataset(model, hvac, season, thermal::default_bands(), 7);
    for (int z = 1; z <= thermal::kConditioned; ++z) {
      auto r = nn::train(data, nn::InputLayout::narx(2, 1, 2, z), {{5}, {nn::Activation::relu}}, 2);
      nets.push_back(r.net);
      reports.push_back(r.report);
    }
  }

  std::vector<nn::NetworkSpec> scheduled() const { return {nets[0], nets[1]}; }
  sched::History today_history() const {
    return sched::History::from_prior_day(data.days.back().scenario, data.days.back().records);
  }
  sched::History day_history(int d, int through_hour) const {
    const auto& prior = d == 0 ? data.prior : data.days[d - 1];
    auto h = sched::History::from_prior_day(prior.scenario, prior.records);
    if (through_hour > 0) h.record_today(data.days[d].records, through_hour);
    return h;
  }
};

World* g_world = nullptr;
World& world() {
  if (!g_world) {
    const double t0 = now();
    g_world = new World();
    std::printf("# setup: %zu-day dataset and 5 zone networks in %.1fs\n", g_world->data.days.size(), now() - t0);
    std::fflush(stdout);
  }
  return *g_world;
}

// ---------------------------------------------------------------- 1
Outcome ear_exactness() {
  auto& w = world();
  const double t0 = now();
  std::mt19937_64 rng(101);
  auto probe = [&](const nn::NetworkSpec& net, const std::function<void(const ear::BlockEncoding&, double, double)>& sink) {
    std::vector<double> raw(net.input_size());
    milp::MilpModel m;
    std::vector<ear::InputSource> src;
    for (int i = 0; i < net.input_size(); ++i) {
      std::uniform_real_distribution<double> U(net.in_bounds[i].lo, net.in_bounds[i].hi);
      raw[i] = U(rng);
      if (i % 2) src.push_back(ear::InputSource::column(m.add_variable("x" + std::to_string(i), raw[i], raw[i])));
      else src.push_back(ear::InputSource::constant(raw[i]));
    }
    auto enc = ear::encode_network(m, net, 1, 1, src);
    auto r = milp::solve_mip(m, milp::BnbConfig{.rel_gap = 0.0, .keep_log = false});
    if (!r.has_solution()) throw std::runtime_error("probe MILP without a solution");
    sink(enc, r.x[enc.t_var], nn::forward(net, raw));
  };

  double relu_worst = 0.0;
  for (int k = 0; k < 100; ++k)
    probe(w.nets[0], [&](const ear::BlockEncoding&, double milp, double exact) {
      relu_worst = std::max(relu_worst, std::abs(milp - exact));
    });

  // Sigmoid zone network with N_S = 5. The reference bound scans each
  // neuron's encoded PWL against the sigmoid on a dense grid over its
  // pre-activation range and propagates through the output layer.
  auto sig = nn::train(w.data, nn::InputLayout::narx(2, 1, 2, 1), {{5}, {nn::Activation::sigmoid}}, 2).net;
  double sig_worst_ratio = 0.0, sig_worst = 0.0, lib_bound = 0.0, grid_bound = 0.0;
  bool lib_covers = true;
  for (int k = 0; k < 100; ++k)
    probe(sig, [&](const ear::BlockEncoding& enc, double milp, double exact) {
      double b = 0.0;
      for (std::size_t n = 0; n < enc.neurons.size(); ++n) {
        const auto& ne = enc.neurons[n];
        const int pts = 200000;
        double eps = 0.0;
        for (int i = 0; i <= pts; ++i) {
          const double v = ne.pre.lo + (ne.pre.hi - ne.pre.lo) * i / pts;
          eps = std::max(eps, std::abs(ne.pwl.eval(v) - sigmoid(v)));
        }
        b += std::abs(sig.out_weights(static_cast<Eigen::Index>(n))) * eps;
      }
      b *= (sig.out_bounds.hi - sig.out_bounds.lo) / 2.0;
      const double lib = ear::certified_error_bound(sig, enc);
      lib_covers = lib_covers && lib >= b - 1e-12;
      const double err = std::abs(milp - exact);
      sig_worst = std::max(sig_worst, err);
      sig_worst_ratio = std::max(sig_worst_ratio, err / (b + 1e-9));
      lib_bound = std::max(lib_bound, lib);
      grid_bound = std::max(grid_bound, b);
    });
  const double secs = now() - t0;
  const bool pass = relu_worst <= 1e-6 && sig_worst_ratio <= 1.0 && lib_covers && secs < 120.0;
  return {pass, fmt("ReLU worst |MILP-forward| %.2e degC (tol 1e-6); sigmoid N_S=5 worst %.3e <= grid bound "
                    "(max %.3e, ratio %.3f), certified bound %.3e covers grid bound: %s; %.1fs (limit 120s)",
                    relu_worst, sig_worst, grid_bound, sig_worst_ratio, lib_bound, lib_covers ? "yes" : "no", secs)};
}

// ---------------------------------------------------------------- 2
Outcome milp_optimality() {
  auto& w = world();
  const double t0 = now();
  int instances = 0, matched = 0, max_bins = 0;
  long wd = 0;
  bool monotone = true;
  std::string first_bad;
  for (int k = 0; k < 24; ++k) {
    const int d = 10 + 6 * k;
    const bool two = k % 3 == 2;
    const int first = 8 + (k % 10), hours = two ? 2 : 2 + (k % 2);
    std::vector<nn::NetworkSpec> nets{w.nets[0]};
    std::vector<int> zones{1};
    if (two) {
      nets.push_back(w.nets[1]);
      zones.push_back(2);
    }
    const auto& day = w.data.days[d].scenario;
    sched::BuildOptions bo;
    bo.horizon = {first, first + hours - 1};
    bo.cutoff = std::numeric_limits<double>::infinity();
    auto bp = sched::build_problem(nets, day, sched::ComfortSpec::defaults(zones, day.prices), w.day_history(d, first - 1), bo);
    const auto& m = bp.model;
    const int bins = m.binary_count();
    if (bins > 60) continue;
    max_bins = std::max(max_bins, bins);
    ++instances;
    auto r = milp::solve_mip(m, milp::BnbConfig{.rel_gap = 0.0, .abs_gap = 0.0});
    wd += r.weak_duality_violations;
    monotone = monotone && r.bound_monotone;

    // Exhaustive enumeration of the binary vector. A partial fixing whose
    // LP is infeasible has no feasible completion, so that subtree is
    // skipped; every other leaf is solved with the tableau reference.
    const int n = m.num_variables();
    std::vector<int> bin_cols;
    std::vector<double> lo(n), hi(n);
    for (int j = 0; j < n; ++j) {
      lo[j] = m.variable(j).lower;
      hi[j] = m.variable(j).upper;
      if (m.variable(j).binary) bin_cols.push_back(j);
    }
    double best = std::numeric_limits<double>::infinity();
    std::function<void(std::size_t)> dfs = [&](std::size_t i) {
      auto o = oracle::tableau_lp(m, &lo, &hi);
      if (!o.feasible) return;
      if (i == bin_cols.size()) {
        best = std::min(best, o.objective);
        return;
      }
      for (double v : {0.0, 1.0}) {
        lo[bin_cols[i]] = hi[bin_cols[i]] = v;
        dfs(i + 1);
      }
      lo[bin_cols[i]] = 0.0;
      hi[bin_cols[i]] = 1.0;
    };
    dfs(0);
    bool ok;
    if (std::isinf(best)) ok = r.status == milp::MipStatus::infeasible;
    else ok = r.status == milp::MipStatus::optimal && std::abs(r.objective - best) <= 1e-6 * std::max(1.0, std::abs(best));
    matched += ok;
    if (!ok && first_bad.empty())
      first_bad = fmt(" first mismatch day %d hours %d-%d: %s %.9g vs %.9g;", d, first, first + hours - 1,
                      milp::status_name(r.status), r.objective, best);
  }
  const double secs = now() - t0;
  const bool pass = instances >= 20 && matched == instances && wd == 0 && monotone && secs < 600.0;
  return {pass, fmt("%d/%d scheduling instances (<= %d binaries) match enumeration to 1e-6 rel;%s weak-duality "
                    "violations %ld; bound monotone: %s; %.1fs (limit 600s)",
                    matched, instances, max_bins, first_bad.c_str(), wd, monotone ? "yes" : "no", secs)};
}

// ---------------------------------------------------------------- 3
Outcome brute_force() {
  auto& w = world();
  const double t0 = now();
  int ok = 0;
  long rollouts = 0;
  double worst = -std::numeric_limits<double>::infinity();
  std::string lines;
  // Days where no 5-level grid point satisfies the hard limits give no comparison; take the next candidate.
  int compared = 0, skipped = 0;
  for (int k = 0; compared < 10 && 15 + 7 * k < static_cast<int>(w.data.days.size()); ++k) {
    const int d = 15 + 7 * k;
    const sched::Horizon hz = k % 2 ? sched::Horizon{14, 19} : sched::Horizon{9, 14};
    const auto& day = w.data.days[d].scenario;
    const auto hist = w.day_history(d, hz.first - 1);
    const auto comfort = sched::ComfortSpec::defaults({1}, day.prices);
    sched::GridResult grid;
    try {
      grid = sched::grid_oracle({w.nets[0]}, day, comfort, hist, 5, hz);
    } catch (const infeasible_error&) {
      ++skipped;
      continue;
    }
    ++compared;
    rollouts += grid.evaluated;
    sched::BuildOptions bo;
    bo.horizon = hz;
    double milp_obj = std::numeric_limits<double>::infinity();
    try {
      auto r = sched::solve_schedule(sched::build_problem({w.nets[0]}, day, comfort, hist, bo),
                                     milp::BnbConfig{.rel_gap = 0.0, .time_limit_s = 60.0, .keep_log = false});
      milp_obj = r.e_c + r.t_v;
    } catch (const infeasible_error&) {
    }
    const bool good = std::isinf(milp_obj) ? grid.feasible == 0 : milp_obj <= grid.objective + 1e-6;
    ok += good;
    if (std::isfinite(milp_obj) && std::isfinite(grid.objective)) worst = std::max(worst, milp_obj - grid.objective);
    lines += fmt(" %.3f/%.3f", milp_obj, grid.objective);
  }
  const double secs = now() - t0;
  const bool pass = compared == 10 && ok == 10 && secs < 900.0;
  return {pass, fmt("%d/%d days MILP <= grid best + 1e-6 (MILP/grid:%s); %d days skipped with an empty grid; %ld "
                    "rollouts; max MILP-grid %.4f; %.1fs (limit 900s)",
                    ok, compared, lines.c_str(), skipped, rollouts, worst, secs)};
}

// ---------------------------------------------------------------- 4
Outcome network_quality() {
  auto& w = world();
  const double t0 = now();
  select::SearchRange range;
  range.tau1 = {2};
  range.tau2 = {1};
  range.tau3 = {1, 2};
  range.layers = {1};
  range.units = {5, 10};
  range.activations = {nn::Activation::sigmoid, nn::Activation::relu};
  select::SelectOptions so;
  so.train.restarts = 3;
  auto sel = select::select_architecture(w.data, range, 2, so);
  // Recompute each zone's closed-loop test NMSE from the reloaded network.
  const int n_train = nn::train_day_count(static_cast<int>(w.data.days.size()), so.train.train_fraction);
  double worst_test = 1.0, worst_drop = 0.0;
  std::string per;
  for (std::size_t k = 0; k < sel.nets.size(); ++k) {
    auto net = nn::network_from_json(nn::to_json(sel.nets[k]));
    const double test = nn::closed_loop_nmse(net, w.data, n_train, static_cast<int>(w.data.days.size())).value;
    const double train = sel.reports[k].nmse_train;
    const double drop = (train - test) / train;
    worst_test = std::min(worst_test, test);
    worst_drop = std::max(worst_drop, drop);
    per += fmt(" z%zu %.4f/%.2f%%", k + 1, test, 100.0 * drop);
  }
  const bool pass = worst_test >= 0.97 && worst_drop <= 0.02;
  return {pass, fmt("selected %s from %zu candidates; per-zone closed-loop test NMSE/drop:%s; min %.4f (>= 0.97), "
                    "max drop %.2f%% (<= 2%%); %.1fs",
                    sel.best.label().c_str(), sel.table.size(), per.c_str(), worst_test, 100.0 * worst_drop,
                    now() - t0)};
}

// ---------------------------------------------------------------- 5-8
// Default-day EAR solve, the meta-predictor corpus and search. Shared by
// criteria 5, 7 and 8.
struct DefaultDay {
  sched::ComfortSpec comfort;
  sched::History hist;
  sched::ScheduleResult ear;
  double ear_seconds = 0.0;
  double base_cost = 0.0;
};

DefaultDay* g_day = nullptr;
DefaultDay& default_day(const Settings& s) {
  if (g_day) return *g_day;
  auto& w = world();
  g_day = new DefaultDay();
  auto& d = *g_day;
  d.hist = w.today_history();
  d.comfort = sched::ComfortSpec::defaults({1, 2}, w.today.prices);
  std::vector<thermal::ZoneBand> bands;
  for (const auto& b : thermal::default_bands())
    if (b.zone <= 2) bands.push_back(b);
  d.base_cost = thermal::non_dr_baseline(w.model, w.hvac, w.today, bands, d.hist.state_before(1), d.comfort.window).cost;
  const double t0 = now();
  d.ear = sched::solve_schedule(sched::build_problem(w.scheduled(), w.today, d.comfort, d.hist),
                                milp::BnbConfig{.time_limit_s = s.ear_time_limit, .keep_log = false});
  d.ear_seconds = now() - t0;
  std::printf("# default day %s: EAR %s E_C %.4f gap %.3f in %.1fs; non-DR cost %.4f\n", w.today.date_tag.c_str(),
              d.ear.solver.status.c_str(), d.ear.e_c, d.ear.solver.gap, d.ear_seconds, d.base_cost);
  std::fflush(stdout);
  return d;
}

struct Meta {
  slamp::Corpus corpus;
  slamp::Split split;
  slamp::SearchResult search;
};

Meta* g_meta = nullptr;
Meta& meta(const Settings& s) {
  if (g_meta) return *g_meta;
  auto& w = world();
  g_meta = new Meta();
  auto& m = *g_meta;
  const double t0 = now();
  slamp::CorpusOptions co;
  co.bnb.time_limit_s = s.corpus_time_limit;
  co.bnb.keep_log = false;
  std::vector<thermal::ScenarioDay> days;
  for (const auto& d : w.data.days) days.push_back(d.scenario);
  m.corpus = slamp::generate_corpus(days, w.scheduled(), sched::History::from_prior_day(w.data.prior.scenario, w.data.prior.records), co);
  const double t1 = now();
  m.split = slamp::shuffle_split(static_cast<int>(m.corpus.days.size()), 5);
  slamp::SearchOptions so;
  so.ranges.draws = s.draws;
  m.search = slamp::search_dnn(m.corpus, m.split, w.scheduled(), 3, so);
  std::printf("# meta-predictor: corpus %zu days (%zu skipped) in %.1fs; %d-draw search in %.1fs, selected %s\n",
              m.corpus.days.size(), m.corpus.skipped.size(), t1 - t0, s.draws, now() - t1,
              m.search.table[m.search.best_index].candidate.label().c_str());
  std::fflush(stdout);
  return m;
}

Outcome cost_reduction(const Settings& s) {
  auto& w = world();
  auto& d = default_day(s);
  auto& m = meta(s);
  auto pred = slamp::meta_predict(m.search.best, w.today, d.hist, w.scheduled(), d.comfort);
  const double ear_cost = thermal::energy_cost(w.today.prices, d.ear.power);
  const double slamp_cost = thermal::energy_cost(w.today.prices, pred.power);
  const double ear_red = (d.base_cost - ear_cost) / d.base_cost;
  const double slamp_red = (d.base_cost - slamp_cost) / d.base_cost;
  const bool pass = ear_red >= 0.05 && std::abs(slamp_red - ear_red) <= 0.05;
  return {pass, fmt("non-DR %.4f, EAR %.4f (reduction %.2f%%, >= 5%%), SLAMP %.4f (reduction %.2f%%, |diff| %.2f pp <= 5)",
                    d.base_cost, ear_cost, 100 * ear_red, slamp_cost, 100 * slamp_red, 100 * std::abs(slamp_red - ear_red))};
}

Outcome load_shifting(const Settings& s) {
  auto& w = world();
  auto& d = default_day(s);
  const double t0 = now();
  // C_V stays at its multiplier-1 value so that only the energy prices move.
  struct Point {
    double mult;
    thermal::Hourly c, x;
    double gap;
  };
  std::vector<Point> pts;
  for (double mult : {1.0, 2.0, 3.0}) {
    auto day = scenario::perturb_for_sensitivity(w.today, mult);
    auto r = mult == 1.0 ? d.ear
                         : sched::solve_schedule(sched::build_problem(w.scheduled(), day, d.comfort, d.hist),
                                                 milp::BnbConfig{.time_limit_s = s.ear_time_limit, .keep_log = false});
    pts.push_back({mult, day.prices, r.power, std::max(0.0, r.solver.objective - r.solver.bound)});
  }
  auto on_peak = [](const thermal::Hourly& x) {
    double e = 0.0;
    for (int t = 11; t <= 18; ++t) e += x[t - 1];
    return e;
  };
  const bool shifted = on_peak(pts[2].x) < on_peak(pts[0].x);
  bool revealed = true;
  std::string pairs;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      double lhs = 0.0;
      for (int t = 0; t < thermal::kHours; ++t) lhs += (pts[i].c[t] - pts[j].c[t]) * (pts[i].x[t] - pts[j].x[t]);
      const double rhs = 2.0 * (pts[i].gap + pts[j].gap);
      revealed = revealed && lhs <= rhs;
      pairs += fmt(" (%g,%g) %.4f <= %.4f;", pts[i].mult, pts[j].mult, lhs, rhs);
    }
  return {shifted && revealed,
          fmt("on-peak energy x1 %.2f kWh, x2 %.2f, x3 %.2f (x3 < x1: %s); revealed preference:%s %.1fs",
              on_peak(pts[0].x), on_peak(pts[1].x), on_peak(pts[2].x), shifted ? "yes" : "no", pairs.c_str(), now() - t0)};
}

Outcome slamp_speed(const Settings& s) {
  auto& w = world();
  auto& d = default_day(s);
  auto& m = meta(s);
  double worst = 0.0;
  for (int k = 0; k < 5; ++k) {
    const double t0 = now();
    slamp::meta_predict(m.search.best, w.today, d.hist, w.scheduled(), d.comfort);
    worst = std::max(worst, now() - t0);
  }
  const double ratio = worst / d.ear_seconds;
  return {ratio <= 0.01 && worst <= 0.5,
          fmt("meta_predict %.2e s (<= 0.5 s), EAR solve %.1f s, ratio %.2e (<= 1e-2)", worst, d.ear_seconds, ratio)};
}

Outcome slamp_fidelity(const Settings& s) {
  auto& w = world();
  auto& m = meta(s);
  std::vector<double> p_true, p_pred;
  std::vector<std::vector<double>> t_true(m.corpus.zones.size()), t_pred(m.corpus.zones.size());
  for (int idx : m.split.test) {
    const auto& day = m.corpus.days[idx];
    const auto comfort = slamp::day_comfort(m.corpus.zones, day.optimal.scenario, {});
    auto r = slamp::meta_predict(m.search.best, day.optimal.scenario, slamp::history_from(day.prior, m.corpus.zones), w.scheduled(), comfort);
    for (int t = 0; t < thermal::kHours; ++t) {
      p_true.push_back(day.optimal.power[t]);
      p_pred.push_back(r.power[t]);
      for (std::size_t k = 0; k < m.corpus.zones.size(); ++k) {
        t_true[k].push_back(day.optimal.temps[k][t]);
        t_pred[k].push_back(r.zone_temps[k][t]);
      }
    }
  }
  const double power = ref_nmse(p_true, p_pred);
  double temp_min = 1.0;
  std::string per;
  for (std::size_t k = 0; k < t_true.size(); ++k) {
    const double v = ref_nmse(t_true[k], t_pred[k]);
    temp_min = std::min(temp_min, v);
    per += fmt(" z%d %.4f", m.corpus.zones[k], v);
  }
  const bool pass = power >= 0.90 && temp_min >= 0.95 && temp_min >= power;
  return {pass, fmt("%zu held-out days: power NMSE %.4f (>= 0.90), temperature NMSE%s (>= 0.95), temps >= power: %s",
                    m.split.test.size(), power, per.c_str(), temp_min >= power ? "yes" : "no")};
}

// ---------------------------------------------------------------- 9
Outcome overfit_fixtures() {
  using select::DayScores;
  auto filled = [](double v) { return DayScores(24, std::vector<double>(10, v)); };
  bool ok = true;
  auto s0 = select::aggregate({filled(0.0)});
  ok = ok && s0.avg == 0.0 && s0.std == 0.0 && s0.of == 0.0;
  auto s5 = select::aggregate({filled(5.0)});
  ok = ok && s5.avg == 5.0 && s5.std == 0.0;
  DayScores half(24, std::vector<double>(10, 0.0));
  for (int t = 0; t < 12; ++t) std::fill(half[t].begin(), half[t].end(), 5.0);
  auto sh = select::aggregate({half});
  ok = ok && sh.avg == 2.5 && sh.std == 2.5;

  // Output falls with every power tap over the whole input box.
  nn::NetworkSpec net;
  net.layout = nn::InputLayout::narx(2, 1, 2, 1);
  nn::Layer l;
  l.weights = Eigen::MatrixXd::Zero(1, net.layout.size());
  for (int i : net.layout.indices(nn::InputRole::controllable)) l.weights(0, i) = 0.3;
  l.bias = Eigen::VectorXd::Constant(1, 1.0);
  l.activation = nn::Activation::relu;
  net.layers.push_back(l);
  net.out_weights = Eigen::RowVectorXd::Constant(1, -0.4);
  net.out_bias = 0.3;
  for (const auto& slot : net.layout.slots)
    net.in_bounds.push_back(slot.signal == nn::Signal::power ? nn::Bounds{0.0, 30.0} : nn::Bounds{-10.0, 50.0});
  net.out_bounds = {15.0, 30.0};
  auto& w = world();
  std::vector<select::DayScores> days;
  for (int d = 0; d < 10; ++d) days.push_back(select::perturbation_scores(net, nn::day_timeline(w.data, d)));
  auto mono = select::aggregate(days);
  ok = ok && mono.of == 0.0;
  return {ok, fmt("all-0 avg %g std %g; all-5 avg %g std %g; half-half avg %g std %g; monotone network of %g",
                  s0.avg, s0.std, s5.avg, s5.std, sh.avg, sh.std, mono.of)};
}

// ---------------------------------------------------------------- 10
std::map<std::string, std::string> dir_bytes(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = util::read_text(e.path());
  return out;
}

Outcome determinism() {
  auto& w = world();
  const fs::path root = fs::temp_directory_path() / "hvacdr_acceptance_rerun";
  fs::remove_all(root);
  auto run = [&](const fs::path& dir) {
    scenario::SeasonConfig cfg;
    cfg.first_day = "2012-06-01";
    cfg.last_day = "2012-06-12";
    auto sc = scenario::build_corpus(cfg, 11);
    auto data = thermal::generate_dataset(w.model, w.hvac, sc, thermal::default_bands(), 7);
    thermal::write_dataset(data, dir / "data");
    nn::TrainOptions to;
    to.restarts = 2;
    std::vector<nn::NetworkSpec> nets;
    for (int z : {1, 2}) {
      auto r = nn::train(data, nn::InputLayout::narx(2, 1, 2, z), {{5}, {nn::Activation::relu}}, 2, to);
      util::write_text(dir / ("zone_" + std::to_string(z) + ".json"), nn::to_json(r.net));
      nets.push_back(r.net);
    }
    slamp::CorpusOptions co;
    co.bnb.node_limit = 200;  // node limits keep reruns independent of timing
    co.bnb.time_limit_s = 1e6;
    co.bnb.keep_log = false;
    std::vector<thermal::ScenarioDay> days;
    for (int d = 0; d < 3; ++d) days.push_back(data.days[d].scenario);
    auto corpus = slamp::generate_corpus(days, nets, sched::History::from_prior_day(data.prior.scenario, data.prior.records), co);
    slamp::write_corpus(corpus, dir / "corpus");
  };
  run(root / "a");
  run(root / "b");
  auto a = dir_bytes(root / "a"), b = dir_bytes(root / "b");
  const bool rerun = !a.empty() && a == b;
  fs::remove_all(root);

  // LP text round trip on the default-day model.
  auto bp = sched::build_problem(w.scheduled(), w.today, sched::ComfortSpec::defaults({1, 2}, w.today.prices), w.today_history());
  const auto text = milp::export_lp(bp.model);
  const auto back = milp::import_lp(text);
  const bool lp_ok = milp::same_structure(bp.model, back) && milp::export_lp(back) == text;

  // Network JSON reload.
  bool json_ok = true;
  std::mt19937_64 rng(3);
  for (const auto& net : w.nets) {
    auto again = nn::network_from_json(nn::to_json(net));
    json_ok = json_ok && nn::to_json(again) == nn::to_json(net) && nn::content_hash(again) == nn::content_hash(net);
    for (int k = 0; k < 50; ++k) {
      std::vector<double> x(net.input_size());
      for (int i = 0; i < net.input_size(); ++i)
        x[i] = std::uniform_real_distribution<double>(net.in_bounds[i].lo, net.in_bounds[i].hi)(rng);
      json_ok = json_ok && nn::forward(again, x) == nn::forward(net, x);
    }
  }
  return {rerun && lp_ok && json_ok,
          fmt("seeded rerun (dataset, networks, corpus) byte-identical over %zu files: %s; LP export/import "
              "lossless (%d columns, %d rows): %s; NetworkSpec JSON reload lossless: %s",
              a.size(), rerun ? "yes" : "no", bp.model.num_variables(), bp.model.num_constraints(),
              lp_ok ? "yes" : "no", json_ok ? "yes" : "no")};
}

std::set<int> parse_list(const std::string& s) {
  std::set<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.insert(std::stoi(tok));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  Settings s;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    auto next = [&]() -> std::string {
      if (i + 1 >= argc) throw std::runtime_error("missing value for " + a);
      return argv[++i];
    };
    if (a == "--only") s.only = parse_list(next());
    else if (a == "--allow-fail") s.allow_fail = parse_list(next());
    else if (a == "--draws") s.draws = std::stoi(next());
    else if (a == "--ear-time-limit") s.ear_time_limit = std::stod(next());
    else if (a == "--corpus-time-limit") s.corpus_time_limit = std::stod(next());
    else {
      std::fprintf(stderr, "unknown argument %s\n", a.c_str());
      return 2;
    }
  }

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"EAR exactness", ear_exactness},
      {"MILP optimality", milp_optimality},
      {"scheduling vs brute force", brute_force},
      {"network quality", network_quality},
      {"cost reduction", [&] { return cost_reduction(s); }},
      {"load shifting", [&] { return load_shifting(s); }},
      {"meta-prediction speed", [&] { return slamp_speed(s); }},
      {"meta-prediction fidelity", [&] { return slamp_fidelity(s); }},
      {"overfit-score fixtures", overfit_fixtures},
      {"determinism and round trips", determinism},
  };

  int passed = 0, run = 0;
  std::vector<int> unexpected, allowed;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!s.only.empty() && !s.only.count(id)) continue;
    ++run;
    const double t0 = now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::printf("criterion %2d %s  %s: %s [%.1fs]\n", id, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                o.detail.c_str(), now() - t0);
    std::fflush(stdout);
    if (o.pass) ++passed;
    else if (s.allow_fail.count(id)) allowed.push_back(id);
    else unexpected.push_back(id);
  }
  std::printf("%d/%d criteria passed", passed, run);
  if (!allowed.empty()) {
    std::printf("; failing but listed in --allow-fail:");
    for (int id : allowed) std::printf(" %d", id);
  }
  std::printf("\n");
  return unexpected.empty() ? 0 : 1;
}
