// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "hvacdr/milp/model.hpp"

namespace hvacdr::milp {

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

const char* status_name(LpStatus s);

enum class VarState : std::uint8_t { basic, at_lower, at_upper };

// Columns are the model variables followed by one logical per row
// (row i reads a_i x + s_i = b_i).
struct Basis {
  std::vector<int> head;         // basic column per row position
  std::vector<VarState> state;   // per column
  bool empty() const { return head.empty(); }
};

struct LpOptions {
  double primal_tol = 1e-9;
  double dual_tol = 1e-9;
  double pivot_tol = 1e-7;
  int refactor_every = 64;
  long max_iterations = 200000;
  int degenerate_before_bland = 50;
  // Relative size of the cost shifts applied to nonbasic columns against
  // dual degeneracy; removed before the final optimality check. 0 disables.
  double cost_perturbation = 1e-7;
};

struct LpSolution {
  LpStatus status = LpStatus::iteration_limit;
  double objective = 0.0;
  // Lagrangian bound from sign-corrected row duals; a valid lower bound on
  // the LP optimum whatever the final basis quality.
  double dual_objective = 0.0;
  std::vector<double> x;         // structural values
  std::vector<double> duals;     // one per row
  std::vector<double> reduced;   // one per structural column
  Basis basis;
  long iterations = 0;
  int refactorizations = 0;
  bool used_bland = false;
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  // Infeasible status only: Farkas row multipliers and the rows they touch.
  std::vector<double> farkas;
  std::vector<int> certificate_rows;
};

// Bounded dual simplex over a fixed constraint matrix. Column bounds can be
// changed between solves, which is how branch-and-bound reuses one instance.
class LpSolver {
 public:
  explicit LpSolver(const MilpModel& model, LpOptions options = {});
  ~LpSolver();
  LpSolver(LpSolver&&) noexcept;
  LpSolver& operator=(LpSolver&&) noexcept;

  void set_bounds(int j, double lower, double upper);
  double lower(int j) const;
  double upper(int j) const;
  void reset_bounds();

  LpSolution solve(const Basis* warm = nullptr);

  int rows() const;
  int columns() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

LpSolution solve_lp(const MilpModel& model, const Basis* warm = nullptr, const LpOptions& options = {});

}  // namespace hvacdr::milp
