// SPDX-License-Identifier: Apache-2.0
#include "hvacdr/slamp/slamp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>
#include <random>

#include "json.hpp"

#include "hvacdr/error.hpp"
#include "hvacdr/util/format.hpp"
#include "hvacdr/util/parallel.hpp"
#include "hvacdr/util/io.hpp"

namespace hvacdr::slamp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<int> net_zones(const std::vector<nn::NetworkSpec>& nets) {
  std::vector<int> zones;
  for (const auto& n : nets) {
    if (n.layout.kind != "narx") throw config_error("corpus generation needs zone networks");
    zones.push_back(n.layout.zone);
  }
  return zones;
}

int zone_slot(const std::vector<int>& zones, int z) {
  auto it = std::find(zones.begin(), zones.end(), z);
  if (it == zones.end()) throw config_error("zone " + std::to_string(z) + " is not part of the corpus");
  return static_cast<int>(it - zones.begin());
}

double nmse_or_zero(const std::vector<double>& a, const std::vector<double>& p) {
  auto r = nn::nmse(a, p);
  return r.defined ? r.value : 0.0;
}

}  // namespace

sched::ComfortSpec day_comfort(const std::vector<int>& zones, const ScenarioDay& day, const CorpusOptions& o) {
  return sched::ComfortSpec::defaults(zones, day.prices, o.bands, o.p_rated, o.hard_margin);
}

sched::History history_from(const Trajectory& prior, const std::vector<int>& zones) {
  sched::History h;
  h.prior_scenario = prior.scenario;
  h.prior_power = prior.power;
  for (std::size_t k = 0; k < zones.size() && k < prior.temps.size(); ++k) h.prior_temps[zones[k] - 1] = prior.temps[k];
  return h;
}

Corpus generate_corpus(const std::vector<ScenarioDay>& scenarios, const std::vector<nn::NetworkSpec>& nets,
                       const sched::History& history, const CorpusOptions& o) {
  if (scenarios.empty()) throw input_error("corpus needs at least one scenario day");
  Corpus c;
  c.zones = net_zones(nets);
  Trajectory prior{history.prior_scenario, history.prior_power, {}};
  for (int z : c.zones) prior.temps.push_back(history.prior_temps[z - 1]);

  for (const auto& day : scenarios) {
    const auto comfort = day_comfort(c.zones, day, o);
    const auto h = history_from(prior, c.zones);
    try {
      const auto bp = sched::build_problem(nets, day, comfort, h, o.build);
      const auto r = sched::solve_schedule(bp, o.bnb);
      const auto ev = sched::evaluate_schedule(r.power, nets, day, comfort, h);
      CorpusDay cd{prior, {day, r.power, ev.zone_temps}, ev.e_c, ev.t_v, r.solver};
      c.days.push_back(cd);
      prior = cd.optimal;
    } catch (const error& e) {
      if (e.kind() != error_kind::infeasible && e.kind() != error_kind::numerical) throw;
      std::string note = day.date_tag + ": " + e.what();
      if (const auto* inf = dynamic_cast<const infeasible_error*>(&e))
        for (const auto& row : inf->rows) note += " " + row;
      c.skipped.push_back(note);
      const Hourly off{};
      const auto ev = sched::evaluate_schedule(off, nets, day, comfort, h);
      prior = {day, off, ev.zone_temps};
    }
  }
  return c;
}

nn::Timeline day_timeline(const CorpusDay& day) {
  nn::Timeline tl(day.prior.scenario, day.optimal.scenario);
  for (int h = 1; h <= thermal::kHours; ++h) {
    tl.set_power(h - thermal::kHours, day.prior.power[h - 1]);
    tl.set_power(h, day.optimal.power[h - 1]);
  }
  return tl;
}

namespace {

void set_temps(nn::Timeline& tl, const CorpusDay& day, const std::vector<int>& zones) {
  for (std::size_t k = 0; k < zones.size(); ++k)
    for (int h = 1; h <= thermal::kHours; ++h) {
      tl.set_temp(zones[k], h - thermal::kHours, day.prior.temps.at(k)[h - 1]);
      tl.set_temp(zones[k], h, day.optimal.temps.at(k)[h - 1]);
    }
}

}  // namespace

void build_rows(const Corpus& corpus, const std::vector<int>& days, const nn::InputLayout& layout,
                Eigen::MatrixXd& X, Eigen::VectorXd& y) {
  if (layout.kind != "slamp") throw config_error("meta-predictor rows need a slamp layout");
  for (int z : layout.temp_zones) zone_slot(corpus.zones, z);
  X.resize(layout.size(), static_cast<Eigen::Index>(days.size()) * thermal::kHours);
  y.resize(X.cols());
  Eigen::Index col = 0;
  std::vector<double> buf(layout.size());
  for (int d : days) {
    const auto& day = corpus.days.at(d);
    auto tl = day_timeline(day);
    set_temps(tl, day, corpus.zones);
    for (int t = 1; t <= thermal::kHours; ++t, ++col) {
      tl.inputs(layout, t, buf);
      for (int i = 0; i < layout.size(); ++i) X(i, col) = buf[i];
      y(col) = day.optimal.power[t - 1];
    }
  }
}

Split shuffle_split(int n_days, std::uint64_t seed, double frac) {
  if (n_days < 2) throw input_error("a train/test split needs at least 2 days");
  if (!(frac > 0.0 && frac < 1.0)) throw config_error("train fraction must lie in (0,1)");
  std::vector<int> idx(n_days);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  const int n_train = std::clamp(static_cast<int>(std::lround(frac * n_days)), 1, n_days - 1);
  Split s;
  s.train.assign(idx.begin(), idx.begin() + n_train);
  s.test.assign(idx.begin() + n_train, idx.end());
  return s;
}

std::string DnnCandidate::label() const {
  return "tau" + std::to_string(taus[0]) + std::to_string(taus[1]) + std::to_string(taus[2]) +
         std::to_string(taus[3]) + "_" + arch.label();
}

void SearchRanges::validate() const {
  if (tau_lo < 0 || tau_hi > 4 || tau_lo > tau_hi) throw config_error("delay range must lie in [0,4]");
  if (layers_lo < 1 || layers_hi > 10 || layers_lo > layers_hi) throw config_error("layer range must lie in [1,10]");
  if (units.empty() || activations.empty()) throw config_error("empty unit or activation choices");
  for (int u : units)
    if (u < 1) throw config_error("unit counts must be positive");
  if (draws < 1) throw config_error("need at least one draw");
}

std::vector<DnnCandidate> sample_candidates(const SearchRanges& r, std::uint64_t seed) {
  r.validate();
  std::mt19937_64 rng(seed);
  auto pick = [&rng](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  std::vector<DnnCandidate> out;
  for (int i = 0; i < r.draws; ++i) {
    DnnCandidate c;
    for (int& t : c.taus) t = pick(r.tau_lo, r.tau_hi);
    const int g = pick(r.layers_lo, r.layers_hi);
    for (int l = 0; l < g; ++l) {
      c.arch.units.push_back(r.units[pick(0, static_cast<int>(r.units.size()) - 1)]);
      c.arch.activations.push_back(r.activations[pick(0, static_cast<int>(r.activations.size()) - 1)]);
    }
    out.push_back(std::move(c));
  }
  return out;
}

CompositeScore composite(double e_pr, double e_tr, double e_pe, double e_te, const nn::Nmse& e_ec,
                         const nn::Nmse& e_tv, int test_days, const std::array<double, 6>& w) {
  double sum = 0.0;
  for (double v : w) {
    if (!(v >= 0.0)) throw config_error("score weights must be non-negative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw config_error("score weights must sum to 1");
  CompositeScore s;
  s.e_pr = e_pr;
  s.e_tr = e_tr;
  s.e_pe = e_pe;
  s.e_te = e_te;
  s.weights = w;
  s.ec_folded = test_days < 5 || !e_ec.defined;
  s.tv_folded = test_days < 5 || !e_tv.defined;
  s.e_ec = s.ec_folded ? kNaN : e_ec.value;
  s.e_tv = s.tv_folded ? kNaN : e_tv.value;
  double w_pe = w[2];
  if (s.ec_folded) w_pe += w[4];
  if (s.tv_folded) w_pe += w[5];
  s.e_c = w[0] * e_pr + w[1] * e_tr + w_pe * e_pe + w[3] * e_te;
  if (!s.ec_folded) s.e_c += w[4] * s.e_ec;
  if (!s.tv_folded) s.e_c += w[5] * s.e_tv;
  return s;
}

sched::ScheduleResult meta_predict(const nn::NetworkSpec& meta, const ScenarioDay& day, const sched::History& history,
                                   const std::vector<nn::NetworkSpec>& zone_nets, const sched::ComfortSpec& comfort) {
  const auto t0 = std::chrono::steady_clock::now();
  if (meta.layout.kind != "slamp") throw config_error("meta-prediction needs a slamp network");
  if (zone_nets.size() != comfort.zones.size()) throw config_error("need one zone network per scheduled zone");
  comfort.validate();
  std::vector<int> zones;
  for (const auto& zc : comfort.zones) zones.push_back(zc.zone);
  for (int z : meta.layout.temp_zones) zone_slot(zones, z);

  nn::Timeline tl = history.timeline(day);
  std::vector<double> in(meta.input_size()), zin;
  for (int t = 1; t <= thermal::kHours; ++t) {
    double p = 0.0;
    if (t < comfort.t_e) {
      tl.inputs(meta.layout, t, in);
      for (int i = 0; i < meta.input_size(); ++i)
        if (!std::isfinite(in[i]))
          throw input_error("missing " + std::string(nn::signal_name(meta.layout.slots[i].signal)) + " tap for hour " +
                            std::to_string(t));
      p = std::clamp(nn::forward(meta, in), 0.0, comfort.p_rated);
    }
    tl.set_power(t, p);
    for (const auto& zn : zone_nets) {
      zin.resize(zn.input_size());
      tl.inputs(zn.layout, t, zin);
      tl.set_temp(zn.layout.zone, t, nn::forward(zn, zin));
    }
  }

  Hourly power{};
  for (int t = 1; t <= thermal::kHours; ++t) power[t - 1] = tl.power(t);
  const auto ev = sched::evaluate_schedule(power, zone_nets, day, comfort, history);
  sched::ScheduleResult r;
  r.power = power;
  r.zones = ev.zones;
  r.zone_temps = ev.zone_temps;
  for (std::size_t k = 0; k < comfort.zones.size(); ++k) {
    const auto& zc = comfort.zones[k];
    Hourly hi{}, lo{};
    for (int t = 1; t <= thermal::kHours; ++t) {
      if (!comfort.window.contains(t)) continue;
      hi[t - 1] = std::max(0.0, ev.zone_temps[k][t - 1] - zc.t_max[t - 1]);
      lo[t - 1] = std::max(0.0, zc.t_min[t - 1] - ev.zone_temps[k][t - 1]);
    }
    r.slack_hi.push_back(hi);
    r.slack_lo.push_back(lo);
  }
  r.e_c = ev.e_c;
  r.t_v = ev.t_v;
  r.solver.status = "predicted";
  r.solver.objective = ev.total();
  r.solver.bound = kNaN;
  r.solver.gap = kNaN;
  r.solver.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

CandidateReport evaluate_candidate(const Corpus& corpus, const Split& split,
                                   const std::vector<nn::NetworkSpec>& zone_nets, const DnnCandidate& cand,
                                   std::uint64_t seed, const SearchOptions& o, nn::NetworkSpec* out) {
  CandidateReport rep;
  rep.candidate = cand;
  const auto layout = nn::InputLayout::slamp(cand.taus[0], cand.taus[1], cand.taus[2], cand.taus[3], corpus.zones);
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  build_rows(corpus, split.train, layout, X, y);
  std::vector<nn::Bounds> in_b;
  nn::Bounds out_b;
  nn::TrainOptions topt = o.train;
  topt.p_rated = o.corpus.p_rated;
  nn::fit_bounds(layout, X, y, topt, in_b, out_b);
  auto fit = nn::fit_network(layout, in_b, out_b, X, y, cand.arch, seed, topt);
  rep.parameters = fit.net.parameter_count();

  struct Series {
    std::vector<double> p_act, p_pred, ec_act, ec_pred, tv_act, tv_pred;
    std::vector<std::vector<double>> t_act, t_pred;
  };
  auto run = [&](const std::vector<int>& days) {
    Series s;
    s.t_act.resize(corpus.zones.size());
    s.t_pred.resize(corpus.zones.size());
    for (int d : days) {
      const auto& cd = corpus.days.at(d);
      const auto comfort = day_comfort(corpus.zones, cd.optimal.scenario, o.corpus);
      const auto pred =
          meta_predict(fit.net, cd.optimal.scenario, history_from(cd.prior, corpus.zones), zone_nets, comfort);
      s.p_act.insert(s.p_act.end(), cd.optimal.power.begin(), cd.optimal.power.end());
      s.p_pred.insert(s.p_pred.end(), pred.power.begin(), pred.power.end());
      for (std::size_t k = 0; k < corpus.zones.size(); ++k) {
        s.t_act[k].insert(s.t_act[k].end(), cd.optimal.temps[k].begin(), cd.optimal.temps[k].end());
        s.t_pred[k].insert(s.t_pred[k].end(), pred.zone_temps[k].begin(), pred.zone_temps[k].end());
      }
      s.ec_act.push_back(cd.e_c);
      s.ec_pred.push_back(pred.e_c);
      s.tv_act.push_back(cd.t_v);
      s.tv_pred.push_back(pred.t_v);
    }
    return s;
  };
  auto temp_score = [&](const Series& s) {
    double sum = 0.0;
    for (std::size_t k = 0; k < s.t_act.size(); ++k) sum += nmse_or_zero(s.t_act[k], s.t_pred[k]);
    return sum / static_cast<double>(s.t_act.size());
  };
  const Series tr = run(split.train), te = run(split.test);
  rep.score = composite(nmse_or_zero(tr.p_act, tr.p_pred), temp_score(tr), nmse_or_zero(te.p_act, te.p_pred),
                        temp_score(te), nn::nmse(te.ec_act, te.ec_pred), nn::nmse(te.tv_act, te.tv_pred),
                        static_cast<int>(split.test.size()), o.weights);
  if (out) *out = std::move(fit.net);
  return rep;
}

SearchResult search_dnn(const Corpus& corpus, const Split& split, const std::vector<nn::NetworkSpec>& zone_nets,
                        std::uint64_t seed, const SearchOptions& o) {
  if (split.train.empty() || split.test.empty()) throw input_error("search needs training and test days");
  if (zone_nets.size() != corpus.zones.size()) throw config_error("need one zone network per corpus zone");
  const auto cands = sample_candidates(o.ranges, seed);
  const int n = static_cast<int>(cands.size());
  std::vector<CandidateReport> table(n);
  std::vector<std::optional<nn::NetworkSpec>> nets(n);
  util::parallel_for(n, o.jobs, [&](int i) {
    nn::NetworkSpec net;
    try {
      table[i] = evaluate_candidate(corpus, split, zone_nets, cands[i], seed + 7919ull * (i + 1), o, &net);
      if (std::isfinite(table[i].score.e_c)) nets[i] = std::move(net);
      else table[i].error = "non-finite score";
    } catch (const training_diverged& e) {
      table[i].candidate = cands[i];
      table[i].error = e.what();
    } catch (const numerical_error& e) {
      table[i].candidate = cands[i];
      table[i].error = e.what();
    }
  });

  SearchResult res;
  for (int i = 0; i < n; ++i) {
    if (!nets[i]) continue;
    if (res.best_index < 0) {
      res.best_index = i;
      continue;
    }
    const auto& b = table[res.best_index];
    const auto& c = table[i];
    if (c.score.e_c > b.score.e_c || (c.score.e_c == b.score.e_c && c.parameters < b.parameters)) res.best_index = i;
  }
  if (res.best_index < 0) throw selection_failed("every meta-predictor candidate failed to train", kNaN);
  table[res.best_index].selected = true;
  res.best = std::move(*nets[res.best_index]);
  res.score = table[res.best_index].score;
  res.table = std::move(table);
  return res;
}

std::string search_csv(const std::vector<CandidateReport>& rows) {
  std::string out = "label,taus,layers,parameters,e_pr,e_tr,e_pe,e_te,e_ec,e_tv,e_c,selected,error\n";
  for (const auto& r : rows) {
    const auto& c = r.candidate;
    const auto& s = r.score;
    const bool ok = r.error.empty();
    auto num = [ok](double v) { return ok ? util::format_double(v) : std::string(); };
    out += c.label() + ',' + std::to_string(c.taus[0]) + ' ' + std::to_string(c.taus[1]) + ' ' +
           std::to_string(c.taus[2]) + ' ' + std::to_string(c.taus[3]) + ',' + std::to_string(c.arch.hidden_layers()) +
           ',' + std::to_string(r.parameters) + ',' + num(s.e_pr) + ',' + num(s.e_tr) + ',' + num(s.e_pe) + ',' +
           num(s.e_te) + ',' + (s.ec_folded ? std::string() : num(s.e_ec)) + ',' +
           (s.tv_folded ? std::string() : num(s.e_tv)) + ',' + num(s.e_c) + ',' + (r.selected ? "1" : "0") + ',';
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    out += err + '\n';
  }
  return out;
}

namespace {

std::string trajectory_csv(const Trajectory& tr, const std::vector<int>& zones) {
  std::string out = "t,price,ambient,insolation,internal_load";
  for (int z : zones) out += ",T" + std::to_string(z);
  out += ",P\n";
  const auto& sc = tr.scenario;
  for (int t = 1; t <= thermal::kHours; ++t) {
    out += std::to_string(t);
    for (double v : {sc.prices[t - 1], sc.ambient[t - 1], sc.insolation[t - 1], sc.internal_load[t - 1]})
      out += ',' + util::format_double(v);
    for (const auto& temps : tr.temps) out += ',' + util::format_double(temps[t - 1]);
    out += ',' + util::format_double(tr.power[t - 1]) + '\n';
  }
  return out;
}

Trajectory trajectory_from_csv(const std::string& text, const std::string& date, const std::vector<int>& zones) {
  const auto rows = util::parse_csv(text);
  const std::size_t cols = 6 + zones.size();
  if (rows.size() != thermal::kHours + 1) throw input_error("corpus day needs a header and 24 rows");
  Trajectory tr;
  tr.scenario.date_tag = date;
  tr.temps.assign(zones.size(), Hourly{});
  for (int t = 1; t <= thermal::kHours; ++t) {
    const auto& r = rows[t];
    if (r.size() != cols) throw input_error("corpus row " + std::to_string(t) + " has the wrong width");
    if (static_cast<int>(util::parse_double(r[0])) != t) throw input_error("corpus rows out of order");
    tr.scenario.prices[t - 1] = util::parse_double(r[1]);
    tr.scenario.ambient[t - 1] = util::parse_double(r[2]);
    tr.scenario.insolation[t - 1] = util::parse_double(r[3]);
    tr.scenario.internal_load[t - 1] = util::parse_double(r[4]);
    for (std::size_t k = 0; k < zones.size(); ++k) tr.temps[k][t - 1] = util::parse_double(r[5 + k]);
    tr.power[t - 1] = util::parse_double(r[5 + zones.size()]);
  }
  return tr;
}

bool same_trajectory(const Trajectory& a, const Trajectory& b) {
  const auto& x = a.scenario;
  const auto& y = b.scenario;
  return x.date_tag == y.date_tag && x.prices == y.prices && x.ambient == y.ambient &&
         x.insolation == y.insolation && x.internal_load == y.internal_load && a.power == b.power && a.temps == b.temps;
}

}  // namespace

void write_corpus(const Corpus& c, const std::filesystem::path& dir) {
  util::ensure_dir(dir);
  nlohmann::ordered_json index;
  index["format"] = 1;
  index["zones"] = c.zones;
  auto days = nlohmann::ordered_json::array();
  for (std::size_t d = 0; d < c.days.size(); ++d) {
    const auto& cd = c.days[d];
    char name[40];
    std::snprintf(name, sizeof(name), "day_%03zu.csv", d);
    util::write_text(dir / name, trajectory_csv(cd.optimal, c.zones));
    nlohmann::ordered_json e;
    e["date"] = cd.optimal.scenario.date_tag;
    e["file"] = name;
    if (d > 0 && same_trajectory(cd.prior, c.days[d - 1].optimal)) {
      e["prior"] = "previous";
    } else {
      std::snprintf(name, sizeof(name), "day_%03zu.prior.csv", d);
      util::write_text(dir / name, trajectory_csv(cd.prior, c.zones));
      e["prior"] = name;
      e["prior_date"] = cd.prior.scenario.date_tag;
    }
    e["e_c"] = util::format_double(cd.e_c);
    e["t_v"] = util::format_double(cd.t_v);
    e["status"] = cd.solver.status;
    e["objective"] = util::format_double(cd.solver.objective);
    e["bound"] = util::format_double(cd.solver.bound);
    e["gap"] = util::format_double(cd.solver.gap);
    e["nodes"] = cd.solver.nodes;
    e["optimal"] = cd.solver.optimal;
    days.push_back(e);
  }
  index["days"] = days;
  index["skipped"] = c.skipped;
  util::write_text(dir / "index.json", index.dump(2) + "\n");
}

Corpus read_corpus(const std::filesystem::path& dir) {
  Corpus c;
  try {
    const auto index = nlohmann::json::parse(util::read_text(dir / "index.json"));
    c.zones = index.at("zones").get<std::vector<int>>();
    for (int z : c.zones)
      if (z < 1 || z > thermal::kConditioned) throw input_error("corpus zone out of range");
    for (const auto& e : index.at("days")) {
      CorpusDay cd;
      cd.optimal = trajectory_from_csv(util::read_text(dir / e.at("file").get<std::string>()),
                                       e.at("date").get<std::string>(), c.zones);
      const auto prior = e.at("prior").get<std::string>();
      if (prior == "previous") {
        if (c.days.empty()) throw input_error("first corpus day has no stored prior");
        cd.prior = c.days.back().optimal;
      } else {
        cd.prior = trajectory_from_csv(util::read_text(dir / prior), e.at("prior_date").get<std::string>(), c.zones);
      }
      cd.e_c = util::parse_double(e.at("e_c").get<std::string>());
      cd.t_v = util::parse_double(e.at("t_v").get<std::string>());
      cd.solver.status = e.at("status").get<std::string>();
      cd.solver.objective = util::parse_double(e.at("objective").get<std::string>());
      cd.solver.bound = util::parse_double(e.at("bound").get<std::string>());
      cd.solver.gap = util::parse_double(e.at("gap").get<std::string>());
      cd.solver.nodes = e.at("nodes").get<long>();
      cd.solver.optimal = e.at("optimal").get<bool>();
      c.days.push_back(std::move(cd));
    }
    if (index.contains("skipped")) c.skipped = index.at("skipped").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw input_error(std::string("bad corpus index: ") + e.what());
  }
  if (c.days.empty()) throw input_error("corpus has no days");
  return c;
}

std::string registry_put(const nn::NetworkSpec& net, const std::filesystem::path& dir) {
  util::ensure_dir(dir);
  const std::string hash = nn::content_hash(net);
  util::write_text(dir / (hash + ".json"), nn::to_json(net));
  return hash;
}

nn::NetworkSpec registry_get(const std::filesystem::path& dir, const std::string& hash) {
  auto net = nn::network_from_json(util::read_text(dir / (hash + ".json")));
  if (nn::content_hash(net) != hash) throw input_error("registry entry " + hash + " does not match its hash");
  return net;
}

}  // namespace hvacdr::slamp
