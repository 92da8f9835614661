// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hvacdr/milp/lp.hpp"
#include "hvacdr/milp/model.hpp"

namespace hvacdr::milp {

struct BnbConfig {
  double rel_gap = 1e-4;
  double abs_gap = 1e-9;
  long node_limit = 1000000;
  double time_limit_s = 600.0;
  double integrality_tol = 1e-6;
  int heuristic_every = 25;  // nodes between heuristic calls after the root
  bool keep_log = true;
  LpOptions lp;

  void validate() const;
};

enum class MipStatus { optimal, node_limit, time_limit, infeasible, no_solution };

const char* status_name(MipStatus s);

struct LogEntry {
  long node = 0;
  long open = 0;
  double incumbent = 0.0;  // +inf until the first incumbent
  double bound = 0.0;
  double gap = 0.0;
};

struct MipResult {
  MipStatus status = MipStatus::no_solution;
  std::vector<double> x;  // incumbent, empty without one
  double objective = 0.0;
  double bound = 0.0;
  double gap = 0.0;
  long nodes = 0;
  long lp_iterations = 0;
  double seconds = 0.0;
  std::vector<LogEntry> log;

  // Per-node sanity checks.
  long weak_duality_violations = 0;
  double worst_duality_excess = 0.0;  // max over nodes of dual - primal
  bool bound_monotone = true;

  // Infeasible status only: rows carrying the root Farkas certificate.
  std::vector<int> certificate_rows;

  bool has_solution() const { return !x.empty(); }
};

// Proposes a full point from a node's LP values; only its binary entries are
// used. They are fixed and the LP is re-solved for the continuous part.
using Heuristic = std::function<std::optional<std::vector<double>>(const std::vector<double>& lp_x)>;

// Best-bound branch-and-bound over binary columns.
MipResult solve_mip(const MilpModel& model, const BnbConfig& config = {}, const Heuristic& heuristic = {});

std::string log_csv(const std::vector<LogEntry>& log);

double relative_gap(double incumbent, double bound);

}  // namespace hvacdr::milp
