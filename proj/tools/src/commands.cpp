// SPDX-License-Identifier: Apache-2.0
#include "commands.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <regex>

#include "json.hpp"

#include "config.hpp"
#include "hvacdr/error.hpp"
#include "hvacdr/milp/lp_format.hpp"
#include "hvacdr/scenario/corpus.hpp"
#include "hvacdr/sched/scheduler.hpp"
#include "hvacdr/select/overfit.hpp"
#include "hvacdr/slamp/slamp.hpp"
#include "hvacdr/thermal/dataset.hpp"
#include "hvacdr/util/format.hpp"
#include "hvacdr/util/io.hpp"
#include "hvacdr/util/parallel.hpp"
#include "svg.hpp"

namespace hvacdr::tools {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

class Stopwatch {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

std::uint64_t seed_or(const Options& o, std::uint64_t fallback) {
  return o.seed >= 0 ? static_cast<std::uint64_t>(o.seed) : fallback;
}

RunConfig config_for(const Options& o) {
  RunConfig c = load_config(o.config);
  if (!std::isnan(o.gap)) c.gap = o.gap;
  if (!std::isnan(o.time_limit)) c.time_limit = o.time_limit;
  if (o.node_limit >= 0) c.node_limit = o.node_limit;
  c.validate();
  return c;
}

RunManifest manifest_for(const Options& o, const std::string& command, const RunConfig& c) {
  RunManifest m;
  m.command = command;
  m.argv = o.argv;
  m.config_hash = config_hash(c);
  m.inputs["config"] = o.config;
  return m;
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json hourly(const thermal::Hourly& h) {
  auto a = json::array();
  for (double v : h) a.push_back(number(v));
  return a;
}

std::vector<nn::NetworkSpec> load_zone_nets(const fs::path& dir) {
  const std::regex name("zone_([0-9]+)\\.json");
  std::vector<std::pair<int, fs::path>> files;
  std::error_code ec;
  for (const auto& e : fs::directory_iterator(dir, ec)) {
    std::smatch m;
    const std::string f = e.path().filename().string();
    if (std::regex_match(f, m, name)) files.push_back({std::stoi(m[1]), e.path()});
  }
  if (ec) throw io_error("cannot list " + dir.string());
  if (files.empty()) throw input_error("no zone_<z>.json networks in " + dir.string());
  std::sort(files.begin(), files.end());
  std::vector<nn::NetworkSpec> nets;
  for (const auto& [z, p] : files) {
    auto net = nn::network_from_json(util::read_text(p));
    if (net.layout.kind != "narx" || net.layout.zone != z)
      throw input_error(p.string() + " is not a network for zone " + std::to_string(z));
    nets.push_back(std::move(net));
  }
  return nets;
}

std::vector<int> zones_of(const std::vector<nn::NetworkSpec>& nets) {
  std::vector<int> z;
  for (const auto& n : nets) z.push_back(n.layout.zone);
  return z;
}

// The dataset day just before the scenario when the scenario is part of the
// dataset, otherwise the last dataset day.
sched::History history_for(const thermal::Dataset& data, const thermal::ScenarioDay& day) {
  const thermal::DayLog* prior = &data.days.back();
  for (std::size_t d = 0; d < data.days.size(); ++d)
    if (data.days[d].scenario.date_tag == day.date_tag) {
      prior = d == 0 ? &data.prior : &data.days[d - 1];
      break;
    }
  spdlog::info("prior day: {}", prior->scenario.date_tag);
  return sched::History::from_prior_day(prior->scenario, prior->records);
}

sched::ComfortSpec comfort_for(const RunConfig& c, const std::vector<int>& zones, const thermal::ScenarioDay& day) {
  return sched::ComfortSpec::defaults(zones, day.prices, thermal::default_bands(), c.p_rated, c.hard_margin);
}

sched::BuildOptions build_options(const RunConfig& c) {
  sched::BuildOptions b;
  b.encode.sigmoid_blocks = c.sigmoid_blocks;
  b.encode.relu_cuts = c.relu_cuts;
  return b;
}

milp::BnbConfig bnb_config(const RunConfig& c, double time_limit) {
  milp::BnbConfig b;
  b.rel_gap = c.gap;
  b.time_limit_s = time_limit;
  b.node_limit = c.node_limit;
  return b;
}

json schedule_json(const thermal::ScenarioDay& day, const sched::ScheduleResult& r) {
  json j;
  j["date"] = day.date_tag;
  j["zones"] = r.zones;
  j["power"] = hourly(r.power);
  json temps, hi, lo;
  for (std::size_t k = 0; k < r.zones.size(); ++k) {
    const std::string z = std::to_string(r.zones[k]);
    temps[z] = hourly(r.zone_temps[k]);
    hi[z] = hourly(r.slack_hi.at(k));
    lo[z] = hourly(r.slack_lo.at(k));
  }
  j["zone_temps"] = temps;
  j["slack_hi"] = hi;
  j["slack_lo"] = lo;
  j["e_c"] = number(r.e_c);
  j["t_v"] = number(r.t_v);
  j["objective"] = number(r.e_c + r.t_v);
  j["solver"] = {{"status", r.solver.status},
                 {"optimal", r.solver.optimal},
                 {"bound", number(r.solver.bound)},
                 {"gap", number(r.solver.gap)},
                 {"nodes", r.solver.nodes}};
  return j;
}

std::vector<double> hours() {
  std::vector<double> x;
  for (int t = 1; t <= thermal::kHours; ++t) x.push_back(t);
  return x;
}

std::vector<double> vec(const thermal::Hourly& h) { return {h.begin(), h.end()}; }

void write_plots(const fs::path& dir, const thermal::ScenarioDay& day, const sched::ScheduleResult& r,
                 const sched::ComfortSpec& comfort) {
  Chart price{"Electricity price", "hour", "$/kWh", hours(), {{"price", vec(day.prices), "#d62728", true}}, {}};
  util::write_text(dir / "price.svg", render_svg(price));
  Chart power{"HVAC power", "hour", "kW", hours(), {{"power", vec(r.power), "#1f77b4", true}}, {}};
  util::write_text(dir / "power.svg", render_svg(power));
  for (std::size_t k = 0; k < r.zones.size(); ++k) {
    const auto& zc = comfort.zone(r.zones[k]);
    std::vector<double> lo(thermal::kHours, NAN), hi(thermal::kHours, NAN);
    for (int t = comfort.window.first; t <= comfort.window.last; ++t) {
      lo[t - 1] = zc.t_min[t - 1];
      hi[t - 1] = zc.t_max[t - 1];
    }
    Chart c{"Zone " + std::to_string(r.zones[k]) + " temperature", "hour", "degC", hours(),
            {{"temperature", vec(r.zone_temps[k]), "#ff7f0e", false}}, {{lo, hi, "#2ca02c"}}};
    util::write_text(dir / ("zone_" + std::to_string(r.zones[k]) + ".svg"), render_svg(c));
  }
}

struct OracleSpec {
  int levels = 0;
  int hours = 0;
};

OracleSpec parse_oracle(const std::string& s) {
  const std::regex re("grid:([0-9]+),([0-9]+)");
  std::smatch m;
  if (!std::regex_match(s, m, re)) throw config_error("--oracle expects grid:N,H");
  OracleSpec o{std::stoi(m[1]), std::stoi(m[2])};
  if (o.levels < 2 || o.hours < 1) throw config_error("--oracle needs N >= 2 and H >= 1");
  return o;
}

}  // namespace

int cmd_simulate(const Options& o) {
  Stopwatch sw;
  const RunConfig c = config_for(o);
  const auto seed = seed_or(o, 7);
  const auto scenarios = scenario::build_corpus(c.season, c.scenario_seed);
  const auto data = thermal::generate_dataset(thermal::BuildingModel::small_office(), thermal::HvacModel{}, scenarios,
                                              thermal::default_bands(), seed);
  thermal::write_dataset(data, o.out);
  spdlog::info("{} days, {} rows written to {}", data.days.size(), data.rows(), o.out);
  auto m = manifest_for(o, "simulate", c);
  m.seeds = {{"scenario", c.scenario_seed}, {"controller", seed}};
  m.outputs["dataset"] = o.out;
  m.timings["total"] = sw.seconds();
  m.write(o.out);
  return 0;
}

int cmd_scenario(const Options& o) {
  const RunConfig c = config_for(o);
  auto season = c.season;
  season.first_day = o.date;
  season.last_day = o.date;
  auto days = scenario::build_corpus(season, c.scenario_seed);
  if (!(o.on_peak > 0.0)) throw config_error("--on-peak must be positive");
  auto day = scenario::perturb_for_sensitivity(days.at(0), o.on_peak);
  util::ensure_dir(o.out);
  util::write_text(fs::path(o.out) / "scenario.json", scenario::scenario_to_json(day));
  auto m = manifest_for(o, "scenario", c);
  m.seeds = {{"scenario", c.scenario_seed}};
  m.outputs["scenario"] = (fs::path(o.out) / "scenario.json").string();
  m.write(o.out);
  return 0;
}

int cmd_train(const Options& o) {
  Stopwatch sw;
  const RunConfig c = config_for(o);
  const auto seed = seed_or(o, 2);
  const auto data = thermal::read_dataset(o.data);
  const int n = static_cast<int>(c.zones.size());
  std::vector<nn::TrainResult> res(n);
  util::parallel_for(n, o.jobs, [&](int k) {
    res[k] = nn::train(data, nn::InputLayout::narx(c.tau[0], c.tau[1], c.tau[2], c.zones[k]), c.arch, seed);
  });
  util::ensure_dir(o.out);
  std::string report = "zone,architecture,nmse_train,nmse_test,epochs,hash\n";
  for (int k = 0; k < n; ++k) {
    const std::string hash = slamp::registry_put(res[k].net, fs::path(o.out) / "registry");
    util::write_text(fs::path(o.out) / ("zone_" + std::to_string(c.zones[k]) + ".json"), nn::to_json(res[k].net));
    report += std::to_string(c.zones[k]) + ',' + c.arch.label() + ',' + util::format_double(res[k].report.nmse_train) +
              ',' + util::format_double(res[k].report.nmse_test) + ',' + std::to_string(res[k].report.epochs) + ',' +
              hash + '\n';
    spdlog::info("zone {}: test NMSE {:.4f}", c.zones[k], res[k].report.nmse_test);
  }
  util::write_text(fs::path(o.out) / "train_report.csv", report);
  auto m = manifest_for(o, "train", c);
  m.seeds = {{"train", seed}};
  m.inputs["data"] = o.data;
  m.outputs["models"] = o.out;
  m.timings["total"] = sw.seconds();
  m.write(o.out);
  return 0;
}

int cmd_select(const Options& o) {
  Stopwatch sw;
  const RunConfig c = config_for(o);
  const auto seed = seed_or(o, 2);
  const auto data = thermal::read_dataset(o.data);
  select::SearchRange range;
  range.cap = c.select_cap;
  select::SelectOptions so;
  so.zones = c.zones;
  so.e_th = c.select_e_th;
  so.jobs = o.jobs;
  const auto sel = select::select_architecture(data, range, seed, so);
  util::ensure_dir(o.out);
  for (std::size_t k = 0; k < sel.nets.size(); ++k) {
    slamp::registry_put(sel.nets[k], fs::path(o.out) / "registry");
    util::write_text(fs::path(o.out) / ("zone_" + std::to_string(c.zones[k]) + ".json"), nn::to_json(sel.nets[k]));
  }
  util::write_text(fs::path(o.out) / "select_report.csv", select::report_csv(sel.table));
  spdlog::info("selected {}", sel.best.label());
  auto m = manifest_for(o, "select", c);
  m.seeds = {{"select", seed}};
  m.inputs["data"] = o.data;
  m.outputs["models"] = o.out;
  m.timings["total"] = sw.seconds();
  m.write(o.out);
  return 0;
}

int cmd_schedule(const Options& o) {
  Stopwatch sw;
  const RunConfig c = config_for(o);
  const auto nets = load_zone_nets(o.models);
  const auto zones = zones_of(nets);
  const auto day = scenario::scenario_from_json(util::read_text(o.scenario));
  const auto data = thermal::read_dataset(o.data);
  const auto hist = history_for(data, day);
  const auto comfort = comfort_for(c, zones, day);
  const fs::path out(o.out);
  util::ensure_dir(out);
  auto m = manifest_for(o, "schedule", c);

  Stopwatch build_sw;
  const auto bp = sched::build_problem(nets, day, comfort, hist, build_options(c));
  m.timings["build"] = build_sw.seconds();
  for (const auto& w : bp.warnings) spdlog::warn("{}", w);
  spdlog::info("model: {} columns, {} rows, {} binaries", bp.model.num_variables(), bp.model.num_constraints(),
               bp.model.binary_count());
  if (o.export_lp) {
    util::write_text(out / "model.lp", milp::export_lp(bp.model));
    m.outputs["lp"] = (out / "model.lp").string();
  }
  Stopwatch solve_sw;
  const auto r = sched::solve_schedule(bp, bnb_config(c, c.time_limit));
  m.timings["solve"] = solve_sw.seconds();
  spdlog::info("{}: E_C {:.4f}, T_V {:.4f}, gap {:.2e}, {} nodes", r.solver.status, r.e_c, r.t_v, r.solver.gap,
               r.solver.nodes);
  util::write_text(out / "schedule.json", schedule_json(day, r).dump(2) + "\n");
  util::write_text(out / "bnb_log.csv", milp::log_csv(r.log));
  write_plots(out, day, r, comfort);

  int rc = 0;
  if (!o.oracle.empty()) {
    const auto spec = parse_oracle(o.oracle);
    sched::Horizon hz{std::max(1, comfort.t_e - spec.hours), comfort.t_e - 1};
    sched::History h2 = hist;
    for (int t = 1; t < hz.first; ++t) {
      h2.today_power[t - 1] = r.power[t - 1];
      for (std::size_t k = 0; k < zones.size(); ++k) h2.today_temps[zones[k] - 1][t - 1] = r.zone_temps[k][t - 1];
    }
    auto bo = build_options(c);
    bo.horizon = hz;
    const auto sub = sched::solve_schedule(sched::build_problem(nets, day, comfort, h2, bo), bnb_config(c, c.time_limit));
    Stopwatch grid_sw;
    const auto grid = sched::grid_oracle(nets, day, comfort, h2, spec.levels, hz);
    m.timings["oracle"] = grid_sw.seconds();
    const double milp_obj = sub.e_c + sub.t_v;
    const bool ok = milp_obj <= grid.objective + 1e-6;
    json j{{"levels", spec.levels},
           {"first_hour", hz.first},
           {"last_hour", hz.last},
           {"milp_objective", milp_obj},
           {"milp_optimal", sub.solver.optimal},
           {"grid_objective", grid.objective},
           {"grid_power", hourly(grid.power)},
           {"evaluated", grid.evaluated},
           {"feasible", grid.feasible},
           {"milp_le_grid", ok}};
    util::write_text(out / "oracle.json", j.dump(2) + "\n");
    spdlog::info("oracle hours {}-{}: MILP {:.6f}, grid best {:.6f} over {} points", hz.first, hz.last, milp_obj,
                 grid.objective, grid.evaluated);
    if (!ok) {
      spdlog::error("MILP objective exceeds the grid optimum");
      rc = 1;
    }
  }
  m.inputs["models"] = o.models;
  m.inputs["scenario"] = o.scenario;
  m.inputs["data"] = o.data;
  m.outputs["schedule"] = (out / "schedule.json").string();
  m.timings["total"] = sw.seconds();
  m.write(out);
  return rc;
}

int cmd_corpus(const Options& o) {
  Stopwatch sw;
  RunConfig c = config_for(o);
  const auto nets = load_zone_nets(o.models);
  const auto data = thermal::read_dataset(o.data);
  std::vector<thermal::ScenarioDay> days;
  for (const auto& d : data.days) days.push_back(d.scenario);
  slamp::CorpusOptions co;
  co.build = build_options(c);
  co.bnb = bnb_config(c, std::isnan(o.time_limit) ? c.day_time_limit : c.time_limit);
  co.bnb.keep_log = false;
  co.p_rated = c.p_rated;
  co.hard_margin = c.hard_margin;
  const auto hist = sched::History::from_prior_day(data.prior.scenario, data.prior.records);
  const auto corpus = slamp::generate_corpus(days, nets, hist, co);
  slamp::write_corpus(corpus, o.out);
  int optimal = 0;
  for (const auto& d : corpus.days) optimal += d.solver.optimal;
  spdlog::info("{} days solved ({} proven optimal), {} skipped", corpus.days.size(), optimal, corpus.skipped.size());
  for (const auto& s : corpus.skipped) spdlog::warn("skipped {}", s);
  auto m = manifest_for(o, "corpus", c);
  m.inputs["data"] = o.data;
  m.inputs["models"] = o.models;
  m.outputs["corpus"] = o.out;
  m.timings["total"] = sw.seconds();
  m.write(o.out);
  return 0;
}

int cmd_slamp(const Options& o) {
  Stopwatch sw;
  const RunConfig c = config_for(o);
  const auto seed = seed_or(o, 3);
  const auto corpus = slamp::read_corpus(o.corpus);
  const auto nets = load_zone_nets(o.models);
  if (zones_of(nets) != corpus.zones) throw config_error("zone networks do not match the corpus zones");
  const auto split = slamp::shuffle_split(static_cast<int>(corpus.days.size()), seed, c.train_fraction);
  slamp::SearchOptions so;
  so.ranges.draws = c.draws;
  so.jobs = o.jobs;
  so.corpus.p_rated = c.p_rated;
  so.corpus.hard_margin = c.hard_margin;
  const auto res = slamp::search_dnn(corpus, split, nets, seed, so);
  const fs::path out(o.out);
  util::ensure_dir(out);
  util::write_text(out / "meta.json", nn::to_json(res.best));
  const std::string hash = slamp::registry_put(res.best, out / "registry");
  util::write_text(out / "search.csv", slamp::search_csv(res.table));
  json sp{{"train", split.train}, {"test", split.test}};
  util::write_text(out / "split.json", sp.dump(2) + "\n");
  const auto& s = res.score;
  json sc{{"candidate", res.table[res.best_index].candidate.label()},
          {"hash", hash},
          {"e_pr", s.e_pr},
          {"e_tr", s.e_tr},
          {"e_pe", s.e_pe},
          {"e_te", s.e_te},
          {"e_ec", number(s.e_ec)},
          {"e_tv", number(s.e_tv)},
          {"e_c", s.e_c}};
  util::write_text(out / "score.json", sc.dump(2) + "\n");
  spdlog::info("selected {} (e_c {:.4f}, test power {:.4f}, test temps {:.4f})",
               res.table[res.best_index].candidate.label(), s.e_c, s.e_pe, s.e_te);
  auto m = manifest_for(o, "slamp", c);
  m.seeds = {{"search", seed}};
  m.inputs["corpus"] = o.corpus;
  m.inputs["models"] = o.models;
  m.outputs["meta"] = (out / "meta.json").string();
  m.timings["total"] = sw.seconds();
  m.write(out);
  return 0;
}

int cmd_predict(const Options& o) {
  Stopwatch sw;
  const RunConfig c = config_for(o);
  const auto meta = nn::network_from_json(util::read_text(o.meta));
  const auto nets = load_zone_nets(o.models);
  const auto day = scenario::scenario_from_json(util::read_text(o.scenario));
  const auto data = thermal::read_dataset(o.data);
  const auto hist = history_for(data, day);
  const auto comfort = comfort_for(c, zones_of(nets), day);
  const auto r = slamp::meta_predict(meta, day, hist, nets, comfort);
  const fs::path out(o.out);
  util::ensure_dir(out);
  util::write_text(out / "schedule.json", schedule_json(day, r).dump(2) + "\n");
  write_plots(out, day, r, comfort);
  spdlog::info("predicted: E_C {:.4f}, T_V {:.4f} in {:.4f} s", r.e_c, r.t_v, r.solver.seconds);
  auto m = manifest_for(o, "predict", c);
  m.inputs["meta"] = o.meta;
  m.inputs["models"] = o.models;
  m.inputs["scenario"] = o.scenario;
  m.outputs["schedule"] = (out / "schedule.json").string();
  m.timings["predict"] = r.solver.seconds;
  m.timings["total"] = sw.seconds();
  m.write(out);
  return 0;
}

int cmd_compare(const Options& o) {
  Stopwatch sw;
  const RunConfig c = config_for(o);
  const auto meta = nn::network_from_json(util::read_text(o.meta));
  const auto nets = load_zone_nets(o.models);
  const auto zones = zones_of(nets);
  const auto day = scenario::scenario_from_json(util::read_text(o.scenario));
  const auto data = thermal::read_dataset(o.data);
  const auto hist = history_for(data, day);
  const auto comfort = comfort_for(c, zones, day);
  const auto model = thermal::BuildingModel::small_office();
  const thermal::HvacModel hvac;

  struct Row {
    std::string method;
    thermal::Hourly power{};
    double seconds = 0.0;
  };
  std::vector<Row> rows;
  {
    Stopwatch t;
    std::vector<thermal::ZoneBand> bands;
    for (const auto& b : thermal::default_bands())
      if (std::find(zones.begin(), zones.end(), b.zone) != zones.end()) bands.push_back(b);
    const auto base = thermal::non_dr_baseline(model, hvac, day, bands, hist.state_before(1), comfort.window);
    if (!base.achieved) spdlog::warn("baseline could not reach its band midpoint target");
    rows.push_back({"non_dr", base.power, t.seconds()});
  }
  {
    Stopwatch t;
    const auto r = sched::solve_schedule(sched::build_problem(nets, day, comfort, hist, build_options(c)),
                                         bnb_config(c, c.time_limit));
    rows.push_back({"ear", r.power, t.seconds()});
    spdlog::info("EAR: {} gap {:.2e}", r.solver.status, r.solver.gap);
  }
  {
    const auto r = slamp::meta_predict(meta, day, hist, nets, comfort);
    rows.push_back({"slamp", r.power, r.solver.seconds});
  }
  {
    Stopwatch t;
    const auto r = sched::testbed_optimal(model, hvac, day, comfort, hist);
    rows.push_back({"testbed_optimal", r.power, t.seconds()});
  }

  const double base_cost = thermal::energy_cost(day.prices, rows[0].power);
  std::string csv = "method,e_c,reduction,t_v_network,t_v_testbed,seconds\n";
  json summary;
  for (const auto& row : rows) {
    const auto net_ev = sched::evaluate_schedule(row.power, nets, day, comfort, hist);
    const auto tb_ev = sched::evaluate_schedule(row.power, model, hvac, day, comfort, hist);
    const double red = base_cost > 0.0 ? (base_cost - tb_ev.e_c) / base_cost : NAN;
    csv += row.method + ',' + util::format_double(tb_ev.e_c) + ',' + (std::isfinite(red) ? util::format_double(red) : "") +
           ',' + util::format_double(net_ev.t_v) + ',' + util::format_double(tb_ev.t_v) + ',' +
           util::format_double(row.seconds) + '\n';
    summary[row.method] = {{"e_c", tb_ev.e_c},         {"reduction", number(red)}, {"t_v_network", net_ev.t_v},
                           {"t_v_testbed", tb_ev.t_v}, {"seconds", row.seconds},   {"power", hourly(row.power)}};
  }
  const double ear_s = rows[1].seconds, slamp_s = rows[2].seconds;
  summary["slamp_vs_ear"] = {{"cost_delta", thermal::energy_cost(day.prices, rows[2].power) -
                                                thermal::energy_cost(day.prices, rows[1].power)},
                             {"time_ratio", ear_s > 0.0 ? slamp_s / ear_s : NAN}};
  const fs::path out(o.out);
  util::ensure_dir(out);
  util::write_text(out / "compare.csv", csv);
  util::write_text(out / "compare.json", summary.dump(2) + "\n");
  spdlog::info("\n{}", csv);
  auto m = manifest_for(o, "compare", c);
  m.inputs["meta"] = o.meta;
  m.inputs["models"] = o.models;
  m.inputs["scenario"] = o.scenario;
  m.inputs["data"] = o.data;
  m.outputs["report"] = (out / "compare.csv").string();
  for (const auto& row : rows) m.timings[row.method] = row.seconds;
  m.timings["total"] = sw.seconds();
  m.write(out);
  return 0;
}

}  // namespace hvacdr::tools
