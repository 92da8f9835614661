// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <limits>
#include <random>

#include "hvacdr/ear/encoder.hpp"
#include "hvacdr/milp/lp.hpp"
#include "hvacdr/milp/lp_format.hpp"
#include "hvacdr/nn/train.hpp"
#include "hvacdr/scenario/corpus.hpp"
#include "hvacdr/sched/scheduler.hpp"
#include "hvacdr/slamp/slamp.hpp"
#include "hvacdr/thermal/dataset.hpp"

using namespace hvacdr;

namespace {

// A 30-day dataset with two trained zone networks, built once.
struct Fixture {
  thermal::BuildingModel model = thermal::BuildingModel::small_office();
  thermal::HvacModel hvac;
  thermal::Dataset data;
  std::vector<nn::NetworkSpec> nets;
  thermal::ScenarioDay today;
  sched::History hist;

  Fixture() {
    scenario::SeasonConfig cfg;
    cfg.first_day = "2012-07-01";
    cfg.last_day = "2012-07-31";
    auto sc = scenario::build_corpus(cfg, 11);
    today = sc.back();
    sc.pop_back();
    data = thermal::generate_dataset(model, hvac, sc, thermal::default_bands(), 7);
    nn::TrainOptions o;
    o.restarts = 1;
    o.scg.max_epochs = 300;
    for (int z : {1, 2}) nets.push_back(nn::train(data, nn::InputLayout::narx(2, 1, 2, z), {{5}, {nn::Activation::relu}}, 2, o).net);
    hist = sched::History::from_prior_day(data.days.back().scenario, data.days.back().records);
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_SimulateDay(benchmark::State& st) {
  const auto& f = fixture();
  std::vector<double> p(thermal::kHours, 12.0);
  thermal::ZoneTemps s;
  s.fill(23.0);
  for (auto _ : st) benchmark::DoNotOptimize(thermal::simulate_day(f.model, f.hvac, f.today, p, s));
}
BENCHMARK(BM_SimulateDay);

void BM_ClosedLoopRollout(benchmark::State& st) {
  const auto& f = fixture();
  auto base = f.hist.timeline(f.today);
  for (int t = 1; t <= thermal::kHours; ++t) base.set_power(t, t < 20 ? 10.0 : 0.0);
  for (auto _ : st) {
    auto tl = base;
    benchmark::DoNotOptimize(nn::rollout_closed_loop(f.nets[0], tl));
  }
}
BENCHMARK(BM_ClosedLoopRollout);

void BM_BuildProblem(benchmark::State& st) {
  const auto& f = fixture();
  const auto comfort = sched::ComfortSpec::defaults({1, 2}, f.today.prices);
  sched::BuildOptions o;
  o.cutoff = std::numeric_limits<double>::infinity();
  for (auto _ : st) benchmark::DoNotOptimize(sched::build_problem(f.nets, f.today, comfort, f.hist, o));
}
BENCHMARK(BM_BuildProblem)->Unit(benchmark::kMillisecond);

void BM_RootLp(benchmark::State& st) {
  const auto& f = fixture();
  const auto comfort = sched::ComfortSpec::defaults({1, 2}, f.today.prices);
  const auto bp = sched::build_problem(f.nets, f.today, comfort, f.hist);
  for (auto _ : st) benchmark::DoNotOptimize(milp::solve_lp(bp.model));
  st.counters["rows"] = bp.model.num_constraints();
}
BENCHMARK(BM_RootLp)->Unit(benchmark::kMillisecond);

void BM_LpText(benchmark::State& st) {
  const auto& f = fixture();
  const auto bp = sched::build_problem(f.nets, f.today, sched::ComfortSpec::defaults({1, 2}, f.today.prices), f.hist);
  for (auto _ : st) benchmark::DoNotOptimize(milp::import_lp(milp::export_lp(bp.model)));
}
BENCHMARK(BM_LpText)->Unit(benchmark::kMillisecond);

void BM_EncodeSigmoid(benchmark::State& st) {
  const auto& f = fixture();
  auto net = f.nets[0];
  for (auto& l : net.layers) l.activation = nn::Activation::sigmoid;
  ear::EncodeOptions o;
  o.sigmoid_blocks = static_cast<int>(st.range(0));
  std::vector<ear::InputSource> src(net.input_size(), ear::InputSource::constant(0.0));
  for (auto _ : st) {
    milp::MilpModel m;
    for (int i = 0; i < net.input_size(); ++i) src[i] = ear::InputSource::column(m.add_variable("x" + std::to_string(i), 0, 30));
    benchmark::DoNotOptimize(ear::encode_network(m, net, 1, 1, src, o));
  }
}
BENCHMARK(BM_EncodeSigmoid)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMicrosecond);

void BM_MetaPredict(benchmark::State& st) {
  const auto& f = fixture();
  std::mt19937_64 rng(1);
  std::normal_distribution<double> N(0.0, 0.3);
  nn::NetworkSpec meta;
  meta.layout = nn::InputLayout::slamp(2, 2, 2, 2, {1, 2});
  int fan = meta.layout.size();
  for (int u : {20, 20}) {
    nn::Layer l;
    l.weights = Eigen::MatrixXd::NullaryExpr(u, fan, [&] { return N(rng); });
    l.bias = Eigen::VectorXd::NullaryExpr(u, [&] { return N(rng); });
    l.activation = nn::Activation::relu;
    meta.layers.push_back(l);
    fan = u;
  }
  meta.out_weights = Eigen::RowVectorXd::NullaryExpr(fan, [&] { return N(rng); });
  meta.in_bounds.assign(meta.layout.size(), {0.0, 40.0});
  meta.out_bounds = {0.0, 30.0};
  const auto comfort = sched::ComfortSpec::defaults({1, 2}, f.today.prices);
  for (auto _ : st) benchmark::DoNotOptimize(slamp::meta_predict(meta, f.today, f.hist, f.nets, comfort));
}
BENCHMARK(BM_MetaPredict)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
