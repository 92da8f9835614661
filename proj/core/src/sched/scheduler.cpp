// SPDX-License-Identifier: Apache-2.0
#include "hvacdr/sched/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "hvacdr/error.hpp"
#include "hvacdr/nn/train.hpp"
#include "hvacdr/util/format.hpp"

namespace hvacdr::sched {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string zt(int zone, int hour) { return "z" + std::to_string(zone) + "_t" + std::to_string(hour); }

void check_horizon(const Horizon& h) {
  if (h.first < 1 || h.last > thermal::kHours || h.first > h.last)
    throw config_error("horizon [" + std::to_string(h.first) + ", " + std::to_string(h.last) + "] outside 1..24");
}

double pos(double v) { return v > 0.0 ? v : 0.0; }

}  // namespace

Hourly nan_hourly() {
  Hourly h;
  h.fill(kNaN);
  return h;
}

std::array<Hourly, thermal::kZones> History::nan_zones() {
  std::array<Hourly, thermal::kZones> a;
  a.fill(nan_hourly());
  return a;
}

ComfortSpec ComfortSpec::defaults(const std::vector<int>& zones, const Hourly& prices,
                                  const std::vector<thermal::ZoneBand>& bands, double p_rated,
                                  double hard_margin) {
  ComfortSpec c;
  c.p_rated = p_rated;
  const double c_max = *std::max_element(prices.begin(), prices.end());
  c.c_v.fill(10.0 * std::max(c_max, 0.0) * p_rated);
  for (int z : zones) {
    auto it = std::find_if(bands.begin(), bands.end(), [z](const thermal::ZoneBand& b) { return b.zone == z; });
    if (it == bands.end()) throw config_error("no comfort band for zone " + std::to_string(z));
    ZoneComfort zc;
    zc.zone = z;
    zc.t_min.fill(it->lo);
    zc.t_max.fill(it->hi);
    zc.ht_min.fill(it->lo - hard_margin);
    zc.ht_max.fill(it->hi + hard_margin);
    c.zones.push_back(zc);
  }
  c.validate();
  return c;
}

const ZoneComfort& ComfortSpec::zone(int z) const {
  for (const auto& zc : zones)
    if (zc.zone == z) return zc;
  throw config_error("zone " + std::to_string(z) + " is not scheduled");
}

void ComfortSpec::validate() const {
  if (zones.empty()) throw config_error("comfort spec lists no zones");
  if (!(p_rated > 0.0) || !std::isfinite(p_rated)) throw config_error("p_rated must be positive");
  if (window.first < 1 || window.last > thermal::kHours || window.first > window.last)
    throw config_error("occupied window outside 1..24");
  if (t_e < 1 || t_e > thermal::kHours + 1) throw config_error("t_e must lie in 1..25");
  for (std::size_t i = 0; i < zones.size(); ++i) {
    const auto& zc = zones[i];
    if (zc.zone < 1 || zc.zone > thermal::kZones) throw config_error("zone id out of range");
    for (std::size_t k = 0; k < i; ++k)
      if (zones[k].zone == zc.zone) throw config_error("zone " + std::to_string(zc.zone) + " listed twice");
    for (int t = window.first; t <= window.last; ++t) {
      const int k = t - 1;
      if (!(zc.ht_min[k] <= zc.t_min[k] && zc.t_min[k] < zc.t_max[k] && zc.t_max[k] <= zc.ht_max[k]))
        throw config_error("zone " + std::to_string(zc.zone) + " hour " + std::to_string(t) +
                           ": need HT_min <= T_min < T_max <= HT_max");
    }
  }
  for (int t = window.first; t <= window.last; ++t)
    if (!(c_v[t - 1] >= 0.0) || !std::isfinite(c_v[t - 1])) throw config_error("penalty price must be >= 0");
}

History History::from_prior_day(const thermal::ScenarioDay& scenario,
                                const std::vector<thermal::OperatingRecord>& records) {
  if (records.size() != thermal::kHours) throw input_error("prior day needs 24 operating records");
  History h;
  h.prior_scenario = scenario;
  for (const auto& r : records) {
    if (r.t < 1 || r.t > thermal::kHours) throw input_error("operating record hour out of range");
    h.prior_power[r.t - 1] = r.power;
    for (int z = 0; z < thermal::kZones; ++z) h.prior_temps[z][r.t - 1] = r.zone_temps[z];
  }
  return h;
}

void History::record_today(const std::vector<thermal::OperatingRecord>& records, int through_hour) {
  if (through_hour < 0 || through_hour > thermal::kHours) throw input_error("through_hour out of range");
  for (const auto& r : records) {
    if (r.t < 1 || r.t > thermal::kHours) throw input_error("operating record hour out of range");
    if (r.t > through_hour) continue;
    today_power[r.t - 1] = r.power;
    for (int z = 0; z < thermal::kZones; ++z) today_temps[z][r.t - 1] = r.zone_temps[z];
  }
}

nn::Timeline History::timeline(const thermal::ScenarioDay& today) const {
  nn::Timeline tl(prior_scenario, today);
  for (int h = 1; h <= thermal::kHours; ++h) {
    tl.set_power(h - thermal::kHours, prior_power[h - 1]);
    tl.set_power(h, today_power[h - 1]);
    for (int z = 1; z <= thermal::kZones; ++z) {
      tl.set_temp(z, h - thermal::kHours, prior_temps[z - 1][h - 1]);
      tl.set_temp(z, h, today_temps[z - 1][h - 1]);
    }
  }
  return tl;
}

thermal::ZoneTemps History::state_before(int hour) const {
  thermal::ZoneTemps s{};
  for (int z = 0; z < thermal::kZones; ++z) {
    s[z] = hour == 1 ? prior_temps[z][thermal::kHours - 1] : today_temps[z][hour - 2];
    if (!std::isfinite(s[z]))
      throw input_error("no measured temperature for zone " + std::to_string(z + 1) + " before hour " +
                        std::to_string(hour));
  }
  return s;
}

namespace {

// Rolls a profile through the encoded piecewise networks, filling P, binary
// and T entries of x. Returns E_C + T_V, plus a large penalty per degC of
// hard-limit or output-range violation so that searches can climb out of it.
double rollout(const BuiltProblem& bp, const Hourly& power, std::vector<double>& x, bool* feasible = nullptr) {
  constexpr double kPenalty = 1e6;
  const auto& m = bp.model;
  x.assign(m.num_variables(), 0.0);
  const Horizon& hz = bp.horizon;
  double cost = 0.0, excess = 0.0;
  for (int t = hz.first; t <= hz.last; ++t) {
    const int j = bp.p_var[t - hz.first];
    x[j] = std::clamp(power[t - 1], m.variable(j).lower, m.variable(j).upper);
    cost += bp.scenario.prices[t - 1] * x[j];
  }
  const int n_z = static_cast<int>(bp.zones.size());
  std::vector<double> h, next;
  for (int t = hz.first; t <= hz.last; ++t) {
    const int ti = t - hz.first;
    for (int k = 0; k < n_z; ++k) {
      const auto& net = bp.nets[k];
      const auto& blk = bp.blocks[k][ti];
      const auto& src = bp.sources[k][ti];
      h.resize(src.size());
      for (std::size_t i = 0; i < src.size(); ++i) {
        const double raw = src[i].is_column() ? x[src[i].var] : src[i].value;
        h[i] = nn::normalize(raw, net.in_bounds[i]).value;
      }
      std::size_t neuron = 0;
      for (const auto& layer : net.layers) {
        next.resize(layer.bias.size());
        for (Eigen::Index j = 0; j < layer.bias.size(); ++j, ++neuron) {
          double v = layer.bias(j);
          for (Eigen::Index i = 0; i < layer.weights.cols(); ++i) v += layer.weights(j, i) * h[i];
          const auto& ne = blk.neurons[neuron];
          const auto& r = ne.pwl.breakpoints;
          v = std::clamp(v, ne.pwl.r0(), ne.pwl.r_end());
          for (std::size_t s = 0; s < ne.w.size(); ++s) x[ne.w[s]] = v >= r[s + 1] ? 1.0 : 0.0;
          next[j] = ne.pwl.eval(v);
        }
        std::swap(h, next);
      }
      double y = net.out_bias;
      for (std::size_t l = 0; l < h.size(); ++l) y += net.out_weights(static_cast<Eigen::Index>(l)) * h[l];
      double temp = nn::denormalize(y, net.out_bounds);
      const auto& tb = m.variable(blk.t_var);
      excess += pos(tb.lower - temp) + pos(temp - tb.upper);
      temp = std::clamp(temp, tb.lower, tb.upper);
      x[blk.t_var] = temp;
      if (bp.comfort.window.contains(t)) {
        const auto& zc = bp.comfort.zones[k];
        const int c = t - 1;
        excess += pos(temp - zc.ht_max[c]) + pos(zc.ht_min[c] - temp);
        cost += bp.comfort.c_v[c] * (pos(temp - zc.t_max[c]) + pos(zc.t_min[c] - temp));
      }
    }
  }
  if (feasible) *feasible = excess == 0.0;
  return cost + kPenalty * excess;
}

// Coordinate descent over hourly power levels on the piecewise rollout.
Hourly local_search(const BuiltProblem& bp, Hourly p, std::vector<double>& x, double* best_cost) {
  constexpr int kLevels = 13;
  const Horizon& hz = bp.horizon;
  double best = rollout(bp, p, x);
  for (int sweep = 0; sweep < 6; ++sweep) {
    bool improved = false;
    for (int t = hz.first; t <= hz.last; ++t) {
      const double ub = bp.model.variable(bp.p_var[t - hz.first]).upper;
      if (ub <= 0.0) continue;
      const double keep = p[t - 1];
      double arg = keep;
      for (int l = 0; l < kLevels; ++l) {
        p[t - 1] = ub * l / (kLevels - 1);
        const double c = rollout(bp, p, x);
        if (c < best - 1e-12) {
          best = c;
          arg = p[t - 1];
          improved = true;
        }
      }
      p[t - 1] = arg;
    }
    if (!improved) break;
  }

  // Refinement: single-hour steps and energy transfers between two hours,
  // with shrinking step sizes. Transfers move load across hours without
  // passing through a worse total.
  std::vector<int> active;
  std::vector<double> ub(thermal::kHours, 0.0);
  for (int t = hz.first; t <= hz.last; ++t) {
    ub[t - 1] = bp.model.variable(bp.p_var[t - hz.first]).upper;
    if (ub[t - 1] > 0.0) active.push_back(t - 1);
  }
  auto try_profile = [&](const Hourly& cand) {
    const double c = rollout(bp, cand, x);
    if (c < best - 1e-12) {
      best = c;
      p = cand;
      return true;
    }
    return false;
  };
  for (double frac : {1.0 / 12, 1.0 / 30, 1.0 / 75, 1.0 / 300}) {
    const double step = bp.comfort.p_rated * frac;
    for (int round = 0; round < 8; ++round) {
      bool improved = false;
      for (int t : active)
        for (double sgn : {1.0, -1.0}) {
          Hourly q = p;
          q[t] = std::clamp(q[t] + sgn * step, 0.0, ub[t]);
          if (q[t] != p[t] && try_profile(q)) improved = true;
        }
      for (int s : active)
        for (int t : active) {
          if (s == t || p[s] <= 0.0) continue;
          const double d = std::min({step, p[s], ub[t] - p[t]});
          if (d <= 0.0) continue;
          Hourly q = p;
          q[s] -= d;
          q[t] += d;
          if (try_profile(q)) improved = true;
        }
      if (!improved) break;
    }
  }
  *best_cost = rollout(bp, p, x);
  return p;
}

}  // namespace

namespace {

BuiltProblem build_once(const std::vector<nn::NetworkSpec>& nets, const thermal::ScenarioDay& scenario,
                        const ComfortSpec& comfort, const History& history, const BuildOptions& options,
                        double cutoff) {
  comfort.validate();
  scenario.validate();
  check_horizon(options.horizon);
  if (nets.size() != comfort.zones.size())
    throw config_error("need one network per scheduled zone: " + std::to_string(comfort.zones.size()) +
                       " zones, " + std::to_string(nets.size()) + " networks");
  for (std::size_t k = 0; k < nets.size(); ++k) {
    nets[k].validate();
    if (nets[k].layout.kind != "narx") throw config_error("scheduling needs zone networks");
    if (nets[k].layout.zone != comfort.zones[k].zone)
      throw config_error("network " + std::to_string(k + 1) + " predicts zone " +
                         std::to_string(nets[k].layout.zone) + ", comfort lists zone " +
                         std::to_string(comfort.zones[k].zone));
    if (!nets[k].layout.same_shape(nets[0].layout))
      throw config_error("zone networks do not share one input layout");
  }

  BuiltProblem bp;
  bp.horizon = options.horizon;
  bp.nets = nets;
  bp.scenario = scenario;
  bp.comfort = comfort;
  bp.history = history;
  bp.cutoff = cutoff;
  bp.timeline = history.timeline(scenario);
  const Horizon& hz = bp.horizon;
  const int n_h = hz.length();
  auto& m = bp.model;

  for (int t = hz.first; t <= hz.last; ++t) {
    const double ub = t >= comfort.t_e ? 0.0 : comfort.p_rated;
    bp.p_var.push_back(m.add_variable("P_t" + std::to_string(t), 0.0, ub, scenario.prices[t - 1]));
  }

  const int n_z = static_cast<int>(nets.size());
  for (const auto& zc : comfort.zones) bp.zones.push_back(zc.zone);
  bp.t_var.assign(n_z, std::vector<int>(n_h, -1));
  bp.dth_var = bp.t_var;
  bp.dtl_var = bp.t_var;
  bp.blocks.assign(n_z, {});
  bp.sources.assign(n_z, {});

  auto zone_index = [&](int z) {
    for (int k = 0; k < n_z; ++k)
      if (bp.zones[k] == z) return k;
    return -1;
  };
  auto constant = [&](nn::Signal sig, int zone, int h) {
    const double v = bp.timeline.value(sig, zone, h);
    if (!std::isfinite(v))
      throw input_error(std::string("missing measured ") + nn::signal_name(sig) + " for hour " + std::to_string(h) +
                        (sig == nn::Signal::temp ? " in zone " + std::to_string(zone) : std::string()));
    return v;
  };

  // Most any single slack can take in a schedule that beats the cutoff.
  double e_min = 0.0;
  for (int t = hz.first; t <= hz.last; ++t) e_min += std::min(0.0, scenario.prices[t - 1]) * comfort.p_rated;
  auto slack_cap = [&](int t) {
    const double cv = comfort.c_v[t - 1];
    if (!std::isfinite(cutoff) || cv <= 0.0) return std::numeric_limits<double>::infinity();
    return std::max(0.0, cutoff - e_min) / cv;
  };

  // Reachable temperature per block: the encoded output range, cut to the
  // hard limits in occupied hours. Later blocks read it as their input range.
  std::vector<std::vector<nn::Bounds>> reach(n_z, std::vector<nn::Bounds>(n_h));

  // Blocks hour by hour so that feedback taps can refer to earlier outputs.
  for (int t = hz.first; t <= hz.last; ++t) {
    const int ti = t - hz.first;
    for (int k = 0; k < n_z; ++k) {
      const auto& net = nets[k];
      std::vector<ear::InputSource> src;
      for (const auto& s : net.layout.slots) {
        const int h = t - s.delay;
        switch (s.signal) {
          case nn::Signal::hour:
            src.push_back(ear::InputSource::constant(t));
            break;
          case nn::Signal::power:
            if (h >= hz.first) {
              const int pj = bp.p_var[h - hz.first];
              src.push_back(ear::InputSource::column(pj, m.variable(pj).lower, m.variable(pj).upper));
            }
            else
              src.push_back(ear::InputSource::constant(constant(s.signal, 0, h)));
            break;
          case nn::Signal::temp:
            if (h >= hz.first) {
              const int zk = zone_index(s.zone);
              if (zk < 0)
                throw config_error("network for zone " + std::to_string(bp.zones[k]) + " reads zone " +
                                   std::to_string(s.zone) + ", which is not scheduled");
              const auto& r = reach[zk][h - hz.first];
              src.push_back(ear::InputSource::column(bp.t_var[zk][h - hz.first], r.lo, r.hi));
            } else {
              src.push_back(ear::InputSource::constant(constant(s.signal, s.zone, h)));
            }
            break;
          default:
            src.push_back(ear::InputSource::constant(constant(s.signal, 0, h)));
        }
      }
      ear::EncodeOptions eo = options.encode;
      eo.branch_priority = t <= comfort.window.last ? thermal::kHours - t + 1 : -1;
      auto enc = ear::encode_network(m, net, bp.zones[k], t, src, eo);
      for (auto& w : enc.warnings) bp.warnings.push_back(w);
      bp.t_var[k][ti] = enc.t_var;
      nn::Bounds rg = enc.t_range;
      if (comfort.window.contains(t)) {
        const auto& zc = comfort.zones[k];
        const double hi = zc.t_max[t - 1] + slack_cap(t), lo = zc.t_min[t - 1] - slack_cap(t);
        const nn::Bounds cut{std::max({rg.lo, zc.ht_min[t - 1], lo}), std::min({rg.hi, zc.ht_max[t - 1], hi})};
        if (cut.lo <= cut.hi) rg = cut;
      }
      reach[k][ti] = rg;
      bp.blocks[k].push_back(std::move(enc));
      bp.sources[k].push_back(std::move(src));
    }
  }

  // Comfort rows inside the occupied window: hard limits, then soft band
  // rows with penalized slacks.
  for (int k = 0; k < n_z; ++k) {
    const auto& zc = comfort.zones[k];
    for (int t = hz.first; t <= hz.last; ++t) {
      if (!comfort.window.contains(t)) continue;
      const int ti = t - hz.first, c = t - 1;
      const int tv = bp.t_var[k][ti];
      const std::string tag = zt(zc.zone, t);
      m.add_constraint("hard15lo_" + tag, {{tv, 1.0}}, milp::Sense::ge, zc.ht_min[c]);
      m.add_constraint("hard15hi_" + tag, {{tv, 1.0}}, milp::Sense::le, zc.ht_max[c]);
      const int dh = m.add_variable("dTH_" + tag, 0.0, std::min(zc.ht_max[c] - zc.t_max[c], slack_cap(t)), comfort.c_v[c]);
      const int dl = m.add_variable("dTL_" + tag, 0.0, std::min(zc.t_min[c] - zc.ht_min[c], slack_cap(t)), comfort.c_v[c]);
      m.add_constraint("soft13_" + tag, {{tv, 1.0}, {dh, -1.0}}, milp::Sense::le, zc.t_max[c]);
      m.add_constraint("soft14_" + tag, {{tv, 1.0}, {dl, 1.0}}, milp::Sense::ge, zc.t_min[c]);
      bp.dth_var[k][ti] = dh;
      bp.dtl_var[k][ti] = dl;
    }
  }
  return bp;
}

// Best piecewise-rollout schedule from the flat profiles and `extra`.
double search_incumbent(const BuiltProblem& bp, const std::vector<Hourly>& extra, std::vector<double>& best_x) {
  std::vector<Hourly> starts = extra;
  const Horizon& hz = bp.horizon;
  for (int l = 0; l <= 4; ++l) {
    Hourly p{};
    for (int t = hz.first; t <= hz.last; ++t) p[t - 1] = bp.comfort.p_rated * l / 4.0;
    starts.push_back(p);
  }
  std::vector<double> x;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : starts) {
    double c = 0.0;
    bool ok = false;
    Hourly p = local_search(bp, s, x, &c);
    rollout(bp, p, x, &ok);
    if (ok && c < best) {
      best = c;
      best_x = x;
    }
  }
  return best;
}

}  // namespace

BuiltProblem build_problem(const std::vector<nn::NetworkSpec>& nets, const thermal::ScenarioDay& scenario,
                           const ComfortSpec& comfort, const History& history, const BuildOptions& options) {
  const double inf = std::numeric_limits<double>::infinity();
  if (!std::isnan(options.cutoff)) return build_once(nets, scenario, comfort, history, options, options.cutoff);
  BuiltProblem loose = build_once(nets, scenario, comfort, history, options, inf);
  std::vector<double> x;
  const double found = search_incumbent(loose, {}, x);
  if (!std::isfinite(found)) return loose;
  // A hair above the schedule's value so that it stays feasible.
  return build_once(nets, scenario, comfort, history, options, found + 1e-7 * (1.0 + std::abs(found)));
}

std::vector<double> pattern_for_power(const BuiltProblem& bp, const Hourly& power) {
  std::vector<double> x;
  rollout(bp, power, x);
  return x;
}

ScheduleResult solve_schedule(const BuiltProblem& bp, const milp::BnbConfig& config) {
  const auto& m = bp.model;
  const Horizon& hz = bp.horizon;
  // First call: local search from the LP powers and from flat profiles.
  // Later calls: from the node's LP powers only.
  bool first_call = true;
  auto heuristic = [&bp, &first_call](const std::vector<double>& lp_x) -> std::optional<std::vector<double>> {
    const Horizon& hz = bp.horizon;
    Hourly p{};
    for (int t = hz.first; t <= hz.last; ++t) p[t - 1] = lp_x[bp.p_var[t - hz.first]];
    std::vector<double> x;
    if (first_call) {
      first_call = false;
      if (std::isfinite(search_incumbent(bp, {p}, x))) return x;
      return std::nullopt;
    }
    double c = 0.0;
    local_search(bp, p, x, &c);
    return x;
  };
  const auto mr = milp::solve_mip(m, config, heuristic);

  if (mr.status == milp::MipStatus::infeasible) {
    std::vector<std::string> hard, all;
    for (int i : mr.certificate_rows) {
      const auto& name = m.constraint(i).name;
      all.push_back(name);
      if (name.rfind("hard15", 0) == 0) hard.push_back(name);
    }
    throw infeasible_error("schedule infeasible: hard comfort limits cannot be met",
                           hard.empty() ? all : hard);
  }
  if (!mr.has_solution())
    throw numerical_error(std::string("no feasible schedule found within the budget (") +
                          milp::status_name(mr.status) + ")");

  ScheduleResult r;
  r.zones = bp.zones;
  for (int t = 1; t < hz.first; ++t) r.power[t - 1] = bp.history.today_power[t - 1];
  for (int t = hz.first; t <= hz.last; ++t) {
    const auto& v = m.variable(bp.p_var[t - hz.first]);
    r.power[t - 1] = std::clamp(mr.x[bp.p_var[t - hz.first]], v.lower, v.upper);
  }
  const int n_z = static_cast<int>(bp.zones.size());
  for (int k = 0; k < n_z; ++k) {
    Hourly temps = nan_hourly(), hi{}, lo{};
    for (int t = 1; t < hz.first; ++t) temps[t - 1] = bp.history.today_temps[bp.zones[k] - 1][t - 1];
    for (int t = hz.first; t <= hz.last; ++t) {
      const int ti = t - hz.first;
      temps[t - 1] = mr.x[bp.t_var[k][ti]];
      if (bp.dth_var[k][ti] >= 0) {
        hi[t - 1] = mr.x[bp.dth_var[k][ti]];
        lo[t - 1] = mr.x[bp.dtl_var[k][ti]];
        r.t_v += bp.comfort.c_v[t - 1] * (hi[t - 1] + lo[t - 1]);
      }
    }
    r.zone_temps.push_back(temps);
    r.slack_hi.push_back(hi);
    r.slack_lo.push_back(lo);
  }
  for (int t = hz.first; t <= hz.last; ++t) r.e_c += bp.scenario.prices[t - 1] * r.power[t - 1];

  const double obj = m.objective_value(mr.x);
  if (std::abs(obj - (r.e_c + r.t_v)) > 1e-6 * std::max(1.0, std::abs(obj)))
    throw numerical_error("objective " + util::format_double(obj) + " differs from E_C + T_V = " +
                          util::format_double(r.e_c + r.t_v));

  r.solver.status = milp::status_name(mr.status);
  r.solver.objective = mr.objective;
  r.solver.bound = mr.bound;
  r.solver.gap = mr.gap;
  r.solver.nodes = mr.nodes;
  r.solver.seconds = mr.seconds;
  r.solver.optimal = mr.status == milp::MipStatus::optimal;
  r.log = mr.log;
  r.weak_duality_violations = mr.weak_duality_violations;
  r.bound_monotone = mr.bound_monotone;
  return r;
}

double violation_cost(const Hourly& temps, const ZoneComfort& zc, const ComfortSpec& comfort, Horizon horizon) {
  double tv = 0.0;
  for (int t = horizon.first; t <= horizon.last; ++t) {
    if (!comfort.window.contains(t)) continue;
    const int c = t - 1;
    tv += comfort.c_v[c] * (pos(temps[c] - zc.t_max[c]) + pos(zc.t_min[c] - temps[c]));
  }
  return tv;
}

namespace {

// Rejects profiles outside [0, P_rated] and clamps rounding noise.
Hourly checked_profile(const Hourly& power, const ComfortSpec& comfort) {
  Hourly out = power;
  for (int t = 1; t <= thermal::kHours; ++t) {
    const double p = power[t - 1];
    if (!(p >= -1e-9 && p <= comfort.p_rated + 1e-9))
      throw input_error("power at hour " + std::to_string(t) + " outside [0, P_rated]: " + util::format_double(p));
    out[t - 1] = std::clamp(p, 0.0, comfort.p_rated);
  }
  return out;
}

}  // namespace

Evaluation evaluate_schedule(const Hourly& profile, const std::vector<nn::NetworkSpec>& nets,
                             const thermal::ScenarioDay& scenario, const ComfortSpec& comfort, const History& history,
                             Horizon horizon) {
  check_horizon(horizon);
  const Hourly power = checked_profile(profile, comfort);
  if (nets.size() != comfort.zones.size()) throw config_error("need one network per scheduled zone");
  nn::Timeline tl = history.timeline(scenario);
  for (int t = horizon.first; t <= horizon.last; ++t) tl.set_power(t, power[t - 1]);
  Evaluation ev;
  for (int t = horizon.first; t <= horizon.last; ++t) ev.e_c += scenario.prices[t - 1] * power[t - 1];
  // Zone networks read only their own temperatures, so one rollout per zone.
  for (std::size_t k = 0; k < nets.size(); ++k) {
    auto temps = nn::rollout_closed_loop(nets[k], tl, horizon.first, horizon.last);
    for (int t = horizon.last + 1; t <= thermal::kHours; ++t) temps[t - 1] = kNaN;
    ev.zones.push_back(comfort.zones[k].zone);
    ev.t_v += violation_cost(temps, comfort.zones[k], comfort, horizon);
    ev.zone_temps.push_back(temps);
  }
  return ev;
}

Evaluation evaluate_schedule(const Hourly& profile, const thermal::BuildingModel& model,
                             const thermal::HvacModel& hvac, const thermal::ScenarioDay& scenario,
                             const ComfortSpec& comfort, const History& history) {
  const Hourly power = checked_profile(profile, comfort);
  const auto recs = thermal::simulate_day(model, hvac, scenario, power, history.state_before(1));
  Evaluation ev;
  ev.e_c = thermal::energy_cost(scenario.prices, power);
  for (const auto& zc : comfort.zones) {
    Hourly temps{};
    for (const auto& rec : recs) temps[rec.t - 1] = rec.zone_temps[zc.zone - 1];
    ev.zones.push_back(zc.zone);
    ev.t_v += violation_cost(temps, zc, comfort);
    ev.zone_temps.push_back(temps);
  }
  return ev;
}

GridResult grid_oracle(const std::vector<nn::NetworkSpec>& nets, const thermal::ScenarioDay& scenario,
                       const ComfortSpec& comfort, const History& history, int levels, Horizon horizon) {
  check_horizon(horizon);
  comfort.validate();
  if (levels < 2) throw config_error("grid needs at least 2 power levels");
  if (nets.size() != comfort.zones.size()) throw config_error("need one network per scheduled zone");
  std::vector<int> free_hours;
  for (int t = horizon.first; t <= horizon.last; ++t)
    if (t < comfort.t_e) free_hours.push_back(t);
  double total = 1.0;
  for (std::size_t i = 0; i < free_hours.size(); ++i) total *= levels;
  if (total > 5e7) throw config_error("grid too large: " + util::format_double(total) + " points");

  const nn::Timeline base = history.timeline(scenario);
  std::vector<int> digit(free_hours.size(), 0);
  std::vector<std::vector<double>> buf(nets.size());
  for (std::size_t k = 0; k < nets.size(); ++k) buf[k].resize(nets[k].input_size());

  GridResult best;
  best.objective = std::numeric_limits<double>::infinity();
  const long n = static_cast<long>(total);
  for (long idx = 0; idx < n; ++idx) {
    nn::Timeline tl = base;
    Hourly p{};
    for (int t = 1; t < horizon.first; ++t) p[t - 1] = history.today_power[t - 1];
    for (std::size_t i = 0; i < free_hours.size(); ++i) p[free_hours[i] - 1] = comfort.p_rated * digit[i] / (levels - 1);
    for (int t = horizon.first; t <= horizon.last; ++t) tl.set_power(t, p[t - 1]);
    ++best.evaluated;

    double cost = 0.0;
    for (int t = horizon.first; t <= horizon.last; ++t) cost += scenario.prices[t - 1] * p[t - 1];
    bool feasible = true;
    for (int t = horizon.first; t <= horizon.last && feasible; ++t) {
      for (std::size_t k = 0; k < nets.size() && feasible; ++k) {
        const auto& net = nets[k];
        tl.inputs(net.layout, t, buf[k]);
        const double temp = nn::forward(net, buf[k]);
        if (temp < net.out_bounds.lo || temp > net.out_bounds.hi) feasible = false;
        tl.set_temp(net.layout.zone, t, temp);
        if (comfort.window.contains(t)) {
          const auto& zc = comfort.zones[k];
          const int c = t - 1;
          if (temp < zc.ht_min[c] || temp > zc.ht_max[c]) feasible = false;
          cost += comfort.c_v[c] * (pos(temp - zc.t_max[c]) + pos(zc.t_min[c] - temp));
        }
      }
    }
    if (feasible) {
      ++best.feasible;
      if (cost < best.objective) {
        best.objective = cost;
        best.power = p;
      }
    }
    for (std::size_t i = 0; i < digit.size(); ++i) {
      if (++digit[i] < levels) break;
      digit[i] = 0;
    }
  }
  if (best.feasible == 0) throw infeasible_error("no grid point meets the hard comfort limits", {});
  return best;
}

ScheduleResult testbed_optimal(const thermal::BuildingModel& model, const thermal::HvacModel& hvac,
                               const thermal::ScenarioDay& scenario, const ComfortSpec& comfort,
                               const History& history) {
  comfort.validate();
  const auto init = history.state_before(1);
  // Temperatures are affine in the profile: free response plus unit responses.
  Hourly zero{};
  const auto free_resp = thermal::simulate_day(model, hvac, scenario, zero, init);
  std::vector<std::vector<thermal::OperatingRecord>> unit(thermal::kHours);
  for (int s = 1; s < comfort.t_e && s <= thermal::kHours; ++s) {
    Hourly e{};
    e[s - 1] = 1.0;
    unit[s - 1] = thermal::simulate_day(model, hvac, scenario, e, init);
  }

  milp::MilpModel m;
  std::vector<int> pv;
  for (int t = 1; t <= thermal::kHours; ++t)
    pv.push_back(m.add_variable("P_t" + std::to_string(t), 0.0, t >= comfort.t_e ? 0.0 : comfort.p_rated,
                                scenario.prices[t - 1]));
  const int n_z = static_cast<int>(comfort.zones.size());
  std::vector<std::vector<int>> tv(n_z, std::vector<int>(thermal::kHours, -1)), dh = tv, dl = tv;
  for (int k = 0; k < n_z; ++k) {
    const auto& zc = comfort.zones[k];
    const int zi = zc.zone - 1;
    for (int t = comfort.window.first; t <= comfort.window.last; ++t) {
      const int c = t - 1;
      const std::string tag = zt(zc.zone, t);
      tv[k][c] = m.add_variable("T_" + tag, zc.ht_min[c], zc.ht_max[c]);
      std::vector<milp::Term> terms{{tv[k][c], 1.0}};
      for (int s = 1; s <= t && s < comfort.t_e; ++s)
        terms.push_back({pv[s - 1], -(unit[s - 1][c].zone_temps[zi] - free_resp[c].zone_temps[zi])});
      m.add_constraint("sim_" + tag, std::move(terms), milp::Sense::eq, free_resp[c].zone_temps[zi]);
      dh[k][c] = m.add_variable("dTH_" + tag, 0.0, zc.ht_max[c] - zc.t_max[c], comfort.c_v[c]);
      dl[k][c] = m.add_variable("dTL_" + tag, 0.0, zc.t_min[c] - zc.ht_min[c], comfort.c_v[c]);
      m.add_constraint("soft13_" + tag, {{tv[k][c], 1.0}, {dh[k][c], -1.0}}, milp::Sense::le, zc.t_max[c]);
      m.add_constraint("soft14_" + tag, {{tv[k][c], 1.0}, {dl[k][c], 1.0}}, milp::Sense::ge, zc.t_min[c]);
    }
  }
  const auto mr = milp::solve_mip(m);
  if (mr.status == milp::MipStatus::infeasible) {
    std::vector<std::string> rows;
    for (int i : mr.certificate_rows) rows.push_back(m.constraint(i).name);
    throw infeasible_error("testbed cannot meet the hard comfort limits", rows);
  }
  if (!mr.has_solution()) throw numerical_error("testbed LP did not solve");

  ScheduleResult r;
  r.zones.clear();
  for (int t = 1; t <= thermal::kHours; ++t)
    r.power[t - 1] = std::clamp(mr.x[pv[t - 1]], 0.0, m.variable(pv[t - 1]).upper);
  const auto recs = thermal::simulate_day(model, hvac, scenario, r.power, init);
  for (int k = 0; k < n_z; ++k) {
    const auto& zc = comfort.zones[k];
    Hourly temps{}, hi{}, lo{};
    for (const auto& rec : recs) temps[rec.t - 1] = rec.zone_temps[zc.zone - 1];
    for (int t = comfort.window.first; t <= comfort.window.last; ++t) {
      hi[t - 1] = mr.x[dh[k][t - 1]];
      lo[t - 1] = mr.x[dl[k][t - 1]];
      r.t_v += comfort.c_v[t - 1] * (hi[t - 1] + lo[t - 1]);
    }
    r.zones.push_back(zc.zone);
    r.zone_temps.push_back(temps);
    r.slack_hi.push_back(hi);
    r.slack_lo.push_back(lo);
  }
  r.e_c = thermal::energy_cost(scenario.prices, r.power);
  r.solver.status = milp::status_name(mr.status);
  r.solver.objective = mr.objective;
  r.solver.bound = mr.bound;
  r.solver.gap = mr.gap;
  r.solver.seconds = mr.seconds;
  r.solver.optimal = mr.status == milp::MipStatus::optimal;
  return r;
}

}  // namespace hvacdr::sched
