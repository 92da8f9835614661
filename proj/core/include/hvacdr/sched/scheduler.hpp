// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <limits>
#include <string>
#include <vector>

#include "hvacdr/ear/encoder.hpp"
#include "hvacdr/milp/bnb.hpp"
#include "hvacdr/nn/network.hpp"
#include "hvacdr/thermal/baseline.hpp"
#include "hvacdr/thermal/building.hpp"

namespace hvacdr::sched {

using thermal::Hourly;

// Every entry NaN: marks hours with no measurement.
Hourly nan_hourly();

struct ZoneComfort {
  int zone = 1;
  Hourly t_min{}, t_max{};    // soft band
  Hourly ht_min{}, ht_max{};  // hard limits
};

struct ComfortSpec {
  std::vector<ZoneComfort> zones;  // scheduled zones, one network each
  Hourly c_v{};                    // $ per degC-hour of band violation
  thermal::OccupiedWindow window;  // comfort rows exist only inside it
  int t_e = 20;                    // HVAC forced off from this hour on
  double p_rated = 30.0;

  // Bands from `bands` for the listed zones, hard limits at band +- margin,
  // C_V = 10 * max price * P_rated.
  static ComfortSpec defaults(const std::vector<int>& zones, const Hourly& prices,
                              const std::vector<thermal::ZoneBand>& bands = thermal::default_bands(),
                              double p_rated = 30.0, double hard_margin = 2.0);
  const ZoneComfort& zone(int z) const;
  void validate() const;
};

// Measured powers and temperatures of the day before (and, for a horizon
// that starts after hour 1, of today's earlier hours).
struct History {
  thermal::ScenarioDay prior_scenario;
  Hourly prior_power = nan_hourly();
  std::array<Hourly, thermal::kZones> prior_temps = nan_zones();
  Hourly today_power = nan_hourly();
  std::array<Hourly, thermal::kZones> today_temps = nan_zones();

  static std::array<Hourly, thermal::kZones> nan_zones();

  static History from_prior_day(const thermal::ScenarioDay& scenario,
                                const std::vector<thermal::OperatingRecord>& records);
  // Copies today's measured hours 1..through_hour from simulator records.
  void record_today(const std::vector<thermal::OperatingRecord>& records, int through_hour);
  nn::Timeline timeline(const thermal::ScenarioDay& today) const;
  thermal::ZoneTemps state_before(int hour) const;  // measured temps at hour-1
};

struct Horizon {
  int first = 1;
  int last = thermal::kHours;
  int length() const { return last - first + 1; }
};

struct BuildOptions {
  ear::EncodeOptions encode;
  Horizon horizon;
  // Objective value of a known schedule. Occupied-hour temperatures of any
  // schedule at least as good stay within band +- cutoff / C_V, so slack
  // bounds and the ranges fed to later blocks shrink accordingly. NaN: take
  // it from a local search over the piecewise rollout. Infinity: off.
  double cutoff = std::numeric_limits<double>::quiet_NaN();
};

struct BuiltProblem {
  milp::MilpModel model;
  Horizon horizon;
  std::vector<int> zones;
  std::vector<int> p_var;                            // per horizon hour
  std::vector<std::vector<int>> t_var, dth_var, dtl_var;  // [zone index][horizon hour], -1 when absent
  std::vector<std::vector<ear::BlockEncoding>> blocks;  // [zone index][horizon hour]
  std::vector<std::vector<std::vector<ear::InputSource>>> sources;
  std::vector<nn::NetworkSpec> nets;
  thermal::ScenarioDay scenario;
  ComfortSpec comfort;
  History history;
  double cutoff = std::numeric_limits<double>::infinity();
  nn::Timeline timeline;
  std::vector<std::string> warnings;

  int hour_index(int hour) const { return hour - horizon.first; }
};

// Throws config_error when zone networks do not share one input shape and
// input_error when history is missing or non-finite.
BuiltProblem build_problem(const std::vector<nn::NetworkSpec>& nets, const thermal::ScenarioDay& scenario,
                           const ComfortSpec& comfort, const History& history, const BuildOptions& options = {});

struct SolverStats {
  std::string status;
  double objective = 0.0;
  double bound = 0.0;
  double gap = 0.0;
  long nodes = 0;
  double seconds = 0.0;
  bool optimal = false;
};

struct ScheduleResult {
  Hourly power{};  // before the horizon: history; after it: 0
  std::vector<int> zones;
  std::vector<Hourly> zone_temps;          // per scheduled zone, NaN after the horizon
  std::vector<Hourly> slack_hi, slack_lo;  // per scheduled zone
  double e_c = 0.0;
  double t_v = 0.0;
  SolverStats solver;
  std::vector<milp::LogEntry> log;
  long weak_duality_violations = 0;
  bool bound_monotone = true;
};

// Decodes the incumbent and checks objective = E_C + T_V. Throws
// infeasible_error with the certificate's hard-bound rows when no schedule
// exists; a limit hit returns the incumbent with solver.optimal = false.
ScheduleResult solve_schedule(const BuiltProblem& problem, const milp::BnbConfig& config = {});

// Binary values of the encoded blocks for a given power profile, rolled out
// through the piecewise networks. Used as the branch-and-bound heuristic.
std::vector<double> pattern_for_power(const BuiltProblem& problem, const Hourly& power);

struct Evaluation {
  double e_c = 0.0;
  double t_v = 0.0;
  std::vector<int> zones;
  std::vector<Hourly> zone_temps;
  double total() const { return e_c + t_v; }
};

// Closed-loop rollout through the zone networks from hour `first` on.
Evaluation evaluate_schedule(const Hourly& power, const std::vector<nn::NetworkSpec>& nets,
                             const thermal::ScenarioDay& scenario, const ComfortSpec& comfort, const History& history,
                             Horizon horizon = {});

// Rollout on the ground-truth testbed from the prior day's last state.
Evaluation evaluate_schedule(const Hourly& power, const thermal::BuildingModel& model,
                             const thermal::HvacModel& hvac, const thermal::ScenarioDay& scenario,
                             const ComfortSpec& comfort, const History& history);

// Positive-part band exceedance cost of one zone's temperatures.
double violation_cost(const Hourly& temps, const ZoneComfort& zc, const ComfortSpec& comfort, Horizon horizon = {});

// Exhaustive search over `levels` evenly spaced power levels in [0, P_rated]
// for the horizon hours, each rolled out through the networks. Hard limits
// and the network output range are enforced; infeasible points are skipped.
struct GridResult {
  Hourly power{};
  double objective = 0.0;
  long evaluated = 0;
  long feasible = 0;
};
GridResult grid_oracle(const std::vector<nn::NetworkSpec>& nets, const thermal::ScenarioDay& scenario,
                       const ComfortSpec& comfort, const History& history, int levels, Horizon horizon);

// Cost-optimal schedule on the linear testbed itself (an LP, since zone
// temperatures are affine in the power profile).
ScheduleResult testbed_optimal(const thermal::BuildingModel& model, const thermal::HvacModel& hvac,
                               const thermal::ScenarioDay& scenario, const ComfortSpec& comfort,
                               const History& history);

}  // namespace hvacdr::sched
