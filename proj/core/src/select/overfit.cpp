// SPDX-License-Identifier: Apache-2.0
#include "hvacdr/select/overfit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "hvacdr/error.hpp"
#include "hvacdr/util/format.hpp"
#include "hvacdr/util/parallel.hpp"

namespace hvacdr::select {

DayScores perturbation_scores(const nn::NetworkSpec& net, const nn::Timeline& day,
                              const ProbeOptions& o) {
  if (o.K < 1 || !(o.dp_unit > 0.0)) throw config_error("probe needs K >= 1 and dP > 0");
  const auto power_taps = net.layout.indices(nn::InputRole::controllable);
  DayScores out(thermal::kHours, std::vector<double>(2 * o.K, kPass));
  std::vector<double> base(net.input_size()), x(net.input_size());
  for (int h = 1; h <= thermal::kHours; ++h) {
    day.inputs(net.layout, h, base);
    for (int sign : {+1, -1}) {
      double prev = forward(net, base);
      for (int k = 1; k <= o.K; ++k) {
        x = base;
        for (int i : power_taps) x[i] = std::clamp(base[i] + sign * k * o.dp_unit, 0.0, o.p_max);
        const double cur = forward(net, x);
        const bool ok = sign > 0 ? cur <= prev + o.slack : cur >= prev - o.slack;
        out[h - 1][(sign > 0 ? 0 : o.K) + k - 1] = ok ? kPass : kFail;
        prev = cur;
      }
    }
  }
  return out;
}

StepStats step_stats(std::span<const double> sc) {
  if (sc.empty()) return {};
  double s = 0.0, s2 = 0.0;
  for (double v : sc) {
    s += v;
    s2 += v * v;
  }
  const double n = static_cast<double>(sc.size());
  const double avg = s / n;
  return {avg, std::sqrt(std::max(0.0, s2 / n - avg * avg))};
}

namespace {

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double pop_std(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

OverfitScore aggregate(const std::vector<DayScores>& days, double c1, double c2) {
  std::vector<double> day_avg, day_std, day_std_alt;
  for (const auto& d : days) {
    if (d.empty()) continue;
    const std::size_t steps = d.front().size();
    std::vector<double> avgs, stds, col(d.size());
    for (std::size_t k = 0; k < steps; ++k) {
      for (std::size_t t = 0; t < d.size(); ++t) col[t] = d[t].at(k);
      auto st = step_stats(col);
      avgs.push_back(st.avg);
      stds.push_back(st.std);
    }
    day_avg.push_back(mean(avgs));
    day_std.push_back(mean(stds));
    day_std_alt.push_back(pop_std(avgs));
  }
  OverfitScore s;
  s.avg = mean(day_avg);
  s.std = mean(day_std);
  s.of = c1 * s.avg + c2 * s.std;
  s.std_alt = pop_std(day_avg);
  s.of_alt = c1 * s.avg + c2 * s.std_alt;
  return s;
}

std::size_t SearchRange::grid_size() const {
  const std::size_t per_layer = units.size() * activations.size();
  std::size_t arch = 0;
  for (int g : layers) {
    std::size_t c = 1;
    for (int i = 0; i < g; ++i) c *= per_layer;
    arch += c;
  }
  return tau1.size() * tau2.size() * tau3.size() * arch;
}

void SearchRange::validate() const {
  if (tau1.empty() || tau2.empty() || tau3.empty() || layers.empty() || units.empty() ||
      activations.empty())
    throw config_error("search range has an empty dimension");
  for (int t : tau1)
    if (t < 1) throw config_error("tau1 must be at least 1");
  for (const auto* v : {&tau2, &tau3})
    for (int t : *v)
      if (t < 0) throw config_error("delays must be non-negative");
  for (int g : layers)
    if (g < 1 || g > 10) throw config_error("hidden layer count out of range");
  for (int u : units)
    if (u < 1) throw config_error("unit count must be positive");
  if (cap == 0) throw config_error("candidate cap must be positive");
}

std::string Candidate::label() const {
  return "tau" + std::to_string(tau1) + std::to_string(tau2) + std::to_string(tau3) + "_" +
         arch.label();
}

namespace {

Candidate decode(const SearchRange& r, std::size_t index) {
  Candidate c;
  c.index = index;
  const std::size_t per_layer = r.units.size() * r.activations.size();
  std::size_t arch_count = 0;
  for (int g : r.layers) {
    std::size_t n = 1;
    for (int i = 0; i < g; ++i) n *= per_layer;
    arch_count += n;
  }
  std::size_t rest = index;
  const std::size_t tau_index = rest / arch_count;
  rest %= arch_count;
  c.tau3 = r.tau3[tau_index % r.tau3.size()];
  c.tau2 = r.tau2[(tau_index / r.tau3.size()) % r.tau2.size()];
  c.tau1 = r.tau1[tau_index / (r.tau3.size() * r.tau2.size())];
  for (int g : r.layers) {
    std::size_t n = 1;
    for (int i = 0; i < g; ++i) n *= per_layer;
    if (rest < n) {
      std::vector<std::size_t> digits(g);
      for (int i = g - 1; i >= 0; --i) {
        digits[i] = rest % per_layer;
        rest /= per_layer;
      }
      for (auto d : digits) {
        c.arch.units.push_back(r.units[d / r.activations.size()]);
        c.arch.activations.push_back(r.activations[d % r.activations.size()]);
      }
      return c;
    }
    rest -= n;
  }
  throw config_error("candidate index outside the grid");
}

}  // namespace

std::vector<Candidate> enumerate_candidates(const SearchRange& range, std::uint64_t seed) {
  range.validate();
  const std::size_t n = range.grid_size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (n > range.cap) {
    std::vector<std::size_t> pick;
    pick.reserve(range.cap);
    std::mt19937_64 rng(seed);
    std::sample(idx.begin(), idx.end(), std::back_inserter(pick), range.cap, rng);
    idx = std::move(pick);
  }
  std::vector<Candidate> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(decode(range, i));
  return out;
}

namespace {

struct Evaluated {
  CandidateReport report;
  std::vector<nn::NetworkSpec> nets;
  std::vector<nn::TrainReport> reports;
};

std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::uint64_t h = seed ^ 0x9e3779b97f4a7c15ull;
  for (std::uint64_t v : {a, b}) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    h *= 0xbf58476d1ce4e5b9ull;
  }
  return h;
}

}  // namespace

Selection select_architecture(const thermal::Dataset& data, const SearchRange& range,
                              std::uint64_t seed, const SelectOptions& o) {
  if (o.zones.empty()) throw config_error("selection needs at least one zone");
  if (o.M < 1) throw config_error("M must be at least 1");
  const auto cands = enumerate_candidates(range, seed);
  const int n_days = static_cast<int>(data.days.size());
  const int n_train = nn::train_day_count(n_days, o.train.train_fraction);

  std::vector<int> probe_days(n_train);
  std::iota(probe_days.begin(), probe_days.end(), 0);
  {
    std::mt19937_64 rng(mix(seed, 0xda75, 0));
    std::shuffle(probe_days.begin(), probe_days.end(), rng);
    probe_days.resize(std::min<std::size_t>(o.M, probe_days.size()));
    std::sort(probe_days.begin(), probe_days.end());
  }
  std::vector<nn::Timeline> probe_tl;
  for (int d : probe_days) probe_tl.push_back(nn::day_timeline(data, d));

  std::vector<Evaluated> ev(cands.size());
  util::parallel_for(static_cast<int>(cands.size()), o.jobs, [&](int ci) {
    const auto& c = cands[ci];
    auto& e = ev[ci];
    e.report.candidate = c;
    std::vector<OverfitScore> scores;
    try {
      for (int z : o.zones) {
        auto layout = nn::InputLayout::narx(c.tau1, c.tau2, c.tau3, z);
        auto res = nn::train(data, layout, c.arch, mix(seed, c.index, z), o.train);
        e.report.parameters = res.net.parameter_count();
        e.report.nmse_train.push_back(res.report.nmse_train);
        e.report.nmse_test.push_back(res.report.nmse_undefined ? std::nan("") : res.report.nmse_test);
        std::vector<DayScores> days;
        for (const auto& tl : probe_tl) days.push_back(perturbation_scores(res.net, tl, o.probe));
        scores.push_back(aggregate(days));
        e.nets.push_back(std::move(res.net));
        e.reports.push_back(res.report);
      }
    } catch (const training_diverged& err) {
      e.report.error = err.what();
      return;
    }
    OverfitScore mean_score;
    for (const auto& s : scores) {
      mean_score.avg += s.avg;
      mean_score.std += s.std;
      mean_score.std_alt += s.std_alt;
    }
    const double nz = static_cast<double>(scores.size());
    mean_score.avg /= nz;
    mean_score.std /= nz;
    mean_score.std_alt /= nz;
    mean_score.of = 0.5 * mean_score.avg + 0.5 * mean_score.std;
    mean_score.of_alt = 0.5 * mean_score.avg + 0.5 * mean_score.std_alt;
    e.report.score = mean_score;
    double worst = std::numeric_limits<double>::infinity();
    for (double v : e.report.nmse_test) worst = std::isnan(v) ? -1.0 : std::min(worst, v);
    e.report.survived = worst > o.e_th;
  });

  int best = -1;
  double best_nmse = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(ev.size()); ++i) {
    const auto& r = ev[i].report;
    for (double v : r.nmse_test)
      if (!std::isnan(v)) best_nmse = std::max(best_nmse, v);
    if (!r.survived) continue;
    if (best < 0) {
      best = i;
      continue;
    }
    const auto& b = ev[best].report;
    // Candidates arrive in enumeration order, so only strict improvements win.
    if (r.score.of < b.score.of - 1e-12 ||
        (std::abs(r.score.of - b.score.of) <= 1e-12 && r.parameters < b.parameters))
      best = i;
  }
  Selection sel;
  for (auto& e : ev) sel.table.push_back(e.report);
  if (best < 0)
    throw selection_failed("no candidate cleared the NMSE threshold", best_nmse);
  sel.table[best].selected = true;
  sel.best = ev[best].report.candidate;
  sel.nets = std::move(ev[best].nets);
  sel.reports = std::move(ev[best].reports);
  return sel;
}

std::string report_csv(const std::vector<CandidateReport>& rows) {
  std::size_t nz = 0;
  for (const auto& r : rows) nz = std::max(nz, r.nmse_test.size());
  std::string out = "index,tau1,tau2,tau3,G,units,activations,parameters";
  for (std::size_t z = 0; z < nz; ++z) out += ",nmse_train_" + std::to_string(z + 1);
  for (std::size_t z = 0; z < nz; ++z) out += ",nmse_test_" + std::to_string(z + 1);
  out += ",avg,std,of,std_alt,of_alt,survived,selected,error\n";
  for (const auto& r : rows) {
    const auto& c = r.candidate;
    std::string units, acts;
    for (std::size_t g = 0; g < c.arch.units.size(); ++g) {
      if (g) {
        units += ' ';
        acts += ' ';
      }
      units += std::to_string(c.arch.units[g]);
      acts += nn::activation_name(c.arch.activations[g]);
    }
    out += std::to_string(c.index) + ',' + std::to_string(c.tau1) + ',' + std::to_string(c.tau2) +
           ',' + std::to_string(c.tau3) + ',' + std::to_string(c.arch.hidden_layers()) + ',' +
           units + ',' + acts + ',' + std::to_string(r.parameters);
    for (std::size_t z = 0; z < nz; ++z)
      out += ',' + (z < r.nmse_train.size() ? util::format_double(r.nmse_train[z]) : "");
    for (std::size_t z = 0; z < nz; ++z)
      out += ',' + (z < r.nmse_test.size() ? util::format_double(r.nmse_test[z]) : "");
    for (double v : {r.score.avg, r.score.std, r.score.of, r.score.std_alt, r.score.of_alt})
      out += ',' + util::format_double(v);
    out += std::string(",") + (r.survived ? "1" : "0") + ',' + (r.selected ? "1" : "0") + ',';
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    out += err + '\n';
  }
  return out;
}

}  // namespace hvacdr::select
