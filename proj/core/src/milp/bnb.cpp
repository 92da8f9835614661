// SPDX-License-Identifier: Apache-2.0
#include "hvacdr/milp/bnb.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <queue>

#include "hvacdr/error.hpp"
#include "hvacdr/util/format.hpp"

namespace hvacdr::milp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Node {
  long id = 0;
  int depth = 0;
  double bound = -kInf;
  std::vector<std::pair<int, std::int8_t>> fixes;
  std::shared_ptr<const Basis> basis;
  // Branching that created the node, for pseudocost updates.
  int var = -1;
  bool up = false;
  double change = 0.0;
  double parent_objective = 0.0;
};

// Average objective gain per unit of fractionality, per column and side.
struct Pseudocosts {
  std::vector<double> sum_up, sum_down;
  std::vector<int> n_up, n_down;
  double total_up = 0.0, total_down = 0.0;
  int count_up = 0, count_down = 0;

  explicit Pseudocosts(int n) : sum_up(n, 0.0), sum_down(n, 0.0), n_up(n, 0), n_down(n, 0) {}

  void record(int j, bool up, double gain) {
    (up ? sum_up : sum_down)[j] += gain;
    ++(up ? n_up : n_down)[j];
    (up ? total_up : total_down) += gain;
    ++(up ? count_up : count_down);
  }
  double get(int j, bool up) const {
    const int n = (up ? n_up : n_down)[j];
    if (n > 0) return (up ? sum_up : sum_down)[j] / n;
    const int c = up ? count_up : count_down;
    return c > 0 ? (up ? total_up : total_down) / c : 1.0;
  }
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.id > b.id;
  }
};

}  // namespace

void BnbConfig::validate() const {
  if (!(rel_gap >= 0.0)) throw config_error("relative gap target must be non-negative");
  if (!(abs_gap >= 0.0)) throw config_error("absolute gap target must be non-negative");
  if (node_limit < 1) throw config_error("node limit must be positive");
  if (!(time_limit_s > 0.0)) throw config_error("time limit must be positive");
  if (!(integrality_tol > 0.0 && integrality_tol < 0.5)) throw config_error("integrality tolerance out of range");
}

const char* status_name(MipStatus s) {
  switch (s) {
    case MipStatus::optimal: return "optimal";
    case MipStatus::node_limit: return "node_limit";
    case MipStatus::time_limit: return "time_limit";
    case MipStatus::infeasible: return "infeasible";
    case MipStatus::no_solution: return "no_solution";
  }
  return "unknown";
}

double relative_gap(double incumbent, double bound) {
  if (!std::isfinite(incumbent)) return kInf;
  const double diff = std::max(0.0, incumbent - bound);
  if (diff == 0.0) return 0.0;
  return diff / std::max(std::abs(incumbent), 1e-10);
}

MipResult solve_mip(const MilpModel& model, const BnbConfig& cfg, const Heuristic& heuristic) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };

  LpSolver lp(model, cfg.lp);
  const int n = model.num_variables();
  std::vector<int> binaries;
  for (int j = 0; j < n; ++j)
    if (model.variable(j).binary) binaries.push_back(j);

  MipResult res;
  double incumbent = kInf;
  double last_bound = -kInf;

  auto set_fixes = [&](const std::vector<std::pair<int, std::int8_t>>& fixes) {
    lp.reset_bounds();
    for (auto [j, v] : fixes) lp.set_bounds(j, v, v);
  };
  auto lp_solve = [&](const Basis* warm) {
    auto s = lp.solve(warm);
    res.lp_iterations += s.iterations;
    return s;
  };
  auto prune_level = [&] {
    if (!std::isfinite(incumbent)) return kInf;
    return incumbent - std::max(cfg.abs_gap, cfg.rel_gap * std::abs(incumbent));
  };

  // Fixes every binary to its rounded value and re-solves; accepts the point
  // when it improves the incumbent.
  auto try_point = [&](const std::vector<double>& guess, const std::vector<std::pair<int, std::int8_t>>& base,
                       const Basis* warm) {
    std::vector<std::pair<int, std::int8_t>> fixes = base;
    std::vector<char> fixed(n, 0);
    for (auto [j, v] : base) fixed[j] = 1;
    for (int j : binaries)
      if (!fixed[j]) fixes.push_back({j, static_cast<std::int8_t>(guess[j] >= 0.5 ? 1 : 0)});
    set_fixes(fixes);
    LpSolution s;
    try {
      s = lp_solve(warm);
    } catch (const numerical_error&) {
      return false;
    }
    if (s.status != LpStatus::optimal || s.primal_infeasibility > 1e-7) return false;
    if (s.objective >= incumbent) return false;
    for (int j : binaries) s.x[j] = std::round(s.x[j]);
    incumbent = s.objective;
    res.x = std::move(s.x);
    return true;
  };

  Pseudocosts pc(n);
  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  open.push(Node{0, 0, -kInf, {}, nullptr});
  long next_id = 1;
  bool root = true;
  bool limit_hit = false;
  MipStatus limit_status = MipStatus::optimal;

  auto push_log = [&](double bound) {
    if (!cfg.keep_log) return;
    res.log.push_back({res.nodes, static_cast<long>(open.size()), incumbent, bound, relative_gap(incumbent, bound)});
  };

  while (!open.empty()) {
    Node node = open.top();
    open.pop();
    const double global = std::min(node.bound, incumbent);
    if (global < last_bound - 1e-9 * std::max(1.0, std::abs(last_bound))) res.bound_monotone = false;
    last_bound = std::max(last_bound, global);

    if (node.bound >= prune_level()) {
      // Best-bound order: every remaining node is at least as bad.
      open = {};
      break;
    }
    if (incumbent - node.bound <= cfg.abs_gap || relative_gap(incumbent, node.bound) <= cfg.rel_gap) {
      open.push(node);
      break;
    }
    if (res.nodes >= cfg.node_limit || elapsed() > cfg.time_limit_s) {
      limit_hit = true;
      limit_status = res.nodes >= cfg.node_limit ? MipStatus::node_limit : MipStatus::time_limit;
      open.push(node);
      break;
    }

    ++res.nodes;
    set_fixes(node.fixes);
    // A warm start that stalls or loses its factorization is retried cold.
    LpSolution sol;
    bool retry = false;
    try {
      sol = lp_solve(node.basis.get());
      retry = sol.status == LpStatus::iteration_limit && node.basis;
    } catch (const numerical_error&) {
      if (!node.basis) throw;
      retry = true;
    }
    if (retry) {
      set_fixes(node.fixes);
      sol = lp_solve(nullptr);
    }
    if (sol.status == LpStatus::iteration_limit)
      throw numerical_error("LP relaxation hit the iteration limit at node " + std::to_string(node.id));

    if (sol.status == LpStatus::infeasible) {
      if (root) {
        res.certificate_rows = sol.certificate_rows;
        root = false;
      }
      push_log(open.empty() ? incumbent : std::min(open.top().bound, incumbent));
      continue;
    }
    if (node.var >= 0 && node.change > 0.0)
      pc.record(node.var, node.up, std::max(0.0, sol.objective - node.parent_objective) / node.change);
    const double excess = sol.dual_objective - sol.objective;
    res.worst_duality_excess = std::max(res.worst_duality_excess, excess);
    if (excess > 1e-7 * std::max(1.0, std::abs(sol.objective))) ++res.weak_duality_violations;

    const double node_bound = std::max(node.bound, sol.dual_objective);
    if (node_bound >= prune_level()) {
      push_log(std::min(open.empty() ? incumbent : open.top().bound, incumbent));
      root = false;
      continue;
    }

    // Highest priority class first; inside it, the pseudocost product score.
    int branch = -1;
    double best_score = -1.0;
    int best_priority = std::numeric_limits<int>::min();
    for (int j : binaries) {
      const double v = sol.x[j];
      const double frac = std::min(v - std::floor(v), std::ceil(v) - v);
      if (frac <= cfg.integrality_tol) continue;
      const int pr = model.variable(j).priority;
      if (pr < best_priority) continue;
      const double f = v - std::floor(v);
      const double score = std::max(f * pc.get(j, false), 1e-6) * std::max((1.0 - f) * pc.get(j, true), 1e-6);
      if (pr > best_priority || score > best_score * (1.0 + 1e-9)) {
        best_priority = pr;
        best_score = score;
        branch = j;
      }
    }
    // Only negative-priority columns left fractional: let the heuristic try
    // to complete the point before branching on them.
    if (branch >= 0 && best_priority < 0 && heuristic) {
      if (auto guess = heuristic(sol.x)) try_point(*guess, node.fixes, nullptr);
      if (node_bound >= prune_level()) {
        root = false;
        push_log(std::min(open.empty() ? incumbent : open.top().bound, incumbent));
        continue;
      }
    }

    auto shared_basis = std::make_shared<const Basis>(std::move(sol.basis));
    if (branch < 0) {
      // Integral relaxation: polish by re-solving with the binaries pinned.
      if (!try_point(sol.x, node.fixes, shared_basis.get()) && sol.objective < incumbent) {
        for (int j : binaries) sol.x[j] = std::round(sol.x[j]);
        incumbent = sol.objective;
        res.x = sol.x;
      }
    } else {
      const bool run_heuristics = root || (cfg.heuristic_every > 0 && res.nodes % cfg.heuristic_every == 0);
      if (run_heuristics) {
        try_point(sol.x, node.fixes, shared_basis.get());
        if (heuristic)
          if (auto guess = heuristic(sol.x)) try_point(*guess, {}, shared_basis.get());
      }
      if (node_bound < prune_level()) {
        for (std::int8_t v : {std::int8_t{1}, std::int8_t{0}}) {
          Node child{next_id++, node.depth + 1, node_bound, node.fixes, shared_basis};
          child.fixes.push_back({branch, v});
          const double f = sol.x[branch] - std::floor(sol.x[branch]);
          child.var = branch;
          child.up = v == 1;
          child.change = v == 1 ? 1.0 - f : f;
          child.parent_objective = sol.objective;
          open.push(std::move(child));
        }
      }
    }
    root = false;
    push_log(std::min(open.empty() ? incumbent : open.top().bound, incumbent));
  }

  res.objective = incumbent;
  res.bound = open.empty() ? incumbent : std::min(open.top().bound, incumbent);
  if (!std::isfinite(res.bound) && !res.has_solution()) res.bound = kInf;
  res.gap = relative_gap(incumbent, res.bound);
  if (res.has_solution()) {
    res.status = limit_hit ? limit_status : MipStatus::optimal;
    if (limit_hit && res.gap <= cfg.rel_gap) res.status = MipStatus::optimal;
  } else {
    res.status = limit_hit ? MipStatus::no_solution : MipStatus::infeasible;
    res.objective = kInf;
  }
  res.seconds = elapsed();
  return res;
}

std::string log_csv(const std::vector<LogEntry>& log) {
  std::string out = "node,open,incumbent,bound,gap\n";
  for (const auto& e : log) {
    out += std::to_string(e.node) + ',' + std::to_string(e.open) + ',' + util::format_double(e.incumbent) + ',' +
           util::format_double(e.bound) + ',' + util::format_double(e.gap) + '\n';
  }
  return out;
}

}  // namespace hvacdr::milp
