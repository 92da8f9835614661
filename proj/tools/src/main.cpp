// SPDX-License-Identifier: Apache-2.0
#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <exception>
#include <string>
#include <vector>

#include "commands.hpp"
#include "hvacdr/error.hpp"

namespace {

int exit_code(const hvacdr::error& e) {
  switch (e.kind()) {
    case hvacdr::error_kind::infeasible: return 2;
    case hvacdr::error_kind::config:
    case hvacdr::error_kind::input: return 3;
    case hvacdr::error_kind::io: return 4;
    default: return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace hvacdr::tools;
  CLI::App app{"Price-based HVAC demand response: testbed, zone networks, MILP scheduling and meta-prediction"};
  app.require_subcommand(1);
  spdlog::set_pattern("[%l] %v");

  Options o;
  for (int i = 0; i < argc; ++i) o.argv.emplace_back(argv[i]);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Only log warnings and errors");

  auto common = [&o](CLI::App* c, bool seed = true) {
    c->add_option("--config", o.config, "Run config JSON");
    c->add_option("--out", o.out, "Output directory")->required();
    if (seed) c->add_option("--seed", o.seed, "Random seed");
    c->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::Range(1, 256));
  };
  auto solver = [&o](CLI::App* c) {
    c->add_option("--gap", o.gap, "Relative optimality gap");
    c->add_option("--time-limit", o.time_limit, "Solver time limit in seconds");
    c->add_option("--node-limit", o.node_limit, "Branch-and-bound node limit");
  };

  auto* sim = app.add_subcommand("simulate", "Generate a training dataset on the thermal testbed");
  common(sim);

  auto* scen = app.add_subcommand("scenario", "Emit one day of the scenario corpus as JSON");
  common(scen, false);
  scen->add_option("--date", o.date, "ISO date inside the season")->required();
  scen->add_option("--on-peak", o.on_peak, "Multiplier for on-peak prices (hours 11-18)");

  auto* train = app.add_subcommand("train", "Train zone networks with the configured architecture");
  common(train);
  train->add_option("--data", o.data, "Dataset directory")->required();

  auto* sel = app.add_subcommand("select", "Over-fitting aware architecture selection");
  common(sel);
  sel->add_option("--data", o.data, "Dataset directory")->required();

  auto* sch = app.add_subcommand("schedule", "Solve the day-ahead schedule with the encoded networks");
  common(sch, false);
  solver(sch);
  sch->add_option("--models", o.models, "Directory with zone_<z>.json networks")->required();
  sch->add_option("--scenario", o.scenario, "Scenario day JSON")->required();
  sch->add_option("--data", o.data, "Dataset providing the prior day")->required();
  sch->add_flag("--export-lp", o.export_lp, "Also write the model as CPLEX LP text");
  sch->add_option("--oracle", o.oracle, "Brute-force check grid:N,H (N levels over the last H hours before t_e)");

  auto* cor = app.add_subcommand("corpus", "Solve schedules for every dataset day (meta-predictor corpus)");
  common(cor, false);
  solver(cor);
  cor->add_option("--data", o.data, "Dataset directory")->required();
  cor->add_option("--models", o.models, "Zone network directory")->required();

  auto* sl = app.add_subcommand("slamp", "Search and train the meta-predictor on a corpus");
  common(sl);
  sl->add_option("--corpus", o.corpus, "Corpus directory")->required();
  sl->add_option("--models", o.models, "Zone network directory")->required();

  auto* pred = app.add_subcommand("predict", "Predict a schedule with a trained meta-predictor");
  common(pred, false);
  pred->add_option("--meta", o.meta, "Meta-predictor JSON")->required();
  pred->add_option("--models", o.models, "Zone network directory")->required();
  pred->add_option("--scenario", o.scenario, "Scenario day JSON")->required();
  pred->add_option("--data", o.data, "Dataset providing the prior day")->required();

  auto* cmp = app.add_subcommand("compare", "Baseline, MILP, meta-predictor and testbed optimum on one day");
  common(cmp, false);
  solver(cmp);
  cmp->add_option("--meta", o.meta, "Meta-predictor JSON")->required();
  cmp->add_option("--models", o.models, "Zone network directory")->required();
  cmp->add_option("--scenario", o.scenario, "Scenario day JSON")->required();
  cmp->add_option("--data", o.data, "Dataset providing the prior day")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }
  spdlog::set_level(quiet ? spdlog::level::warn : spdlog::level::info);

  try {
    if (*sim) return cmd_simulate(o);
    if (*scen) return cmd_scenario(o);
    if (*train) return cmd_train(o);
    if (*sel) return cmd_select(o);
    if (*sch) return cmd_schedule(o);
    if (*cor) return cmd_corpus(o);
    if (*sl) return cmd_slamp(o);
    if (*pred) return cmd_predict(o);
    if (*cmp) return cmd_compare(o);
  } catch (const hvacdr::infeasible_error& e) {
    spdlog::error("{}", e.what());
    for (const auto& r : e.rows) spdlog::error("  certificate row {}", r);
    return 2;
  } catch (const hvacdr::error& e) {
    spdlog::error("{}", e.what());
    return exit_code(e);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
