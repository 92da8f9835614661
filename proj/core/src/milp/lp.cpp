// SPDX-License-Identifier: Apache-2.0
#include "hvacdr/milp/lp.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "hvacdr/error.hpp"

namespace hvacdr::milp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

const char* status_name(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

struct LpSolver::Impl {
  using SpMat = Eigen::SparseMatrix<double>;

  int n = 0, m = 0, N = 0;
  std::vector<int> col_start, row_idx;
  std::vector<double> val;
  std::vector<double> cost, true_cost, lo, hi, model_lo, model_hi, b;
  std::vector<Sense> sense;
  double offset = 0.0;
  LpOptions opt;

  std::vector<int> head, pos;
  std::vector<VarState> state;
  std::vector<double> x, d;
  Eigen::VectorXd y;

  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  struct Eta {
    int r;
    Eigen::VectorXd col;
  };
  std::vector<Eta> etas;
  int refactors = 0;

  Impl(const MilpModel& model, LpOptions o) : opt(o) {
    model.validate();
    n = model.num_variables();
    m = model.num_constraints();
    N = n + m;
    std::vector<std::vector<std::pair<int, double>>> cols(n);
    for (int i = 0; i < m; ++i)
      for (const auto& t : model.constraint(i).terms) cols[t.var].push_back({i, t.coef});
    col_start.assign(n + 1, 0);
    for (int j = 0; j < n; ++j) {
      col_start[j + 1] = col_start[j] + static_cast<int>(cols[j].size());
      for (auto [i, a] : cols[j]) {
        row_idx.push_back(i);
        val.push_back(a);
      }
    }
    cost.assign(N, 0.0);
    lo.assign(N, 0.0);
    hi.assign(N, 0.0);
    for (int j = 0; j < n; ++j) {
      const auto& v = model.variable(j);
      cost[j] = v.objective;
      lo[j] = v.lower;
      hi[j] = v.upper;
    }
    b.resize(m);
    sense.resize(m);
    for (int i = 0; i < m; ++i) {
      const auto& r = model.constraint(i);
      b[i] = r.rhs;
      sense[i] = r.sense;
      switch (r.sense) {
        case Sense::le: lo[n + i] = 0.0; hi[n + i] = kInf; break;
        case Sense::ge: lo[n + i] = -kInf; hi[n + i] = 0.0; break;
        case Sense::eq: lo[n + i] = 0.0; hi[n + i] = 0.0; break;
      }
    }
    model_lo = lo;
    model_hi = hi;
    true_cost = cost;
    offset = model.objective_offset;
  }

  bool fixed(int j) const { return lo[j] == hi[j]; }

  double dot_col(int j, const Eigen::VectorXd& v) const {
    if (j >= n) return v[j - n];
    double s = 0.0;
    for (int k = col_start[j]; k < col_start[j + 1]; ++k) s += val[k] * v[row_idx[k]];
    return s;
  }

  void load_col(int j, Eigen::VectorXd& out) const {
    out.setZero(m);
    if (j >= n) {
      out[j - n] = 1.0;
      return;
    }
    for (int k = col_start[j]; k < col_start[j + 1]; ++k) out[row_idx[k]] = val[k];
  }

  bool factorize() {
    etas.clear();
    ++refactors;
    std::vector<Eigen::Triplet<double>> trip;
    for (int p = 0; p < m; ++p) {
      const int j = head[p];
      if (j >= n) {
        trip.emplace_back(j - n, p, 1.0);
      } else {
        for (int k = col_start[j]; k < col_start[j + 1]; ++k) trip.emplace_back(row_idx[k], p, val[k]);
      }
    }
    SpMat B(m, m);
    B.setFromTriplets(trip.begin(), trip.end());
    B.makeCompressed();
    lu.compute(B);
    return lu.info() == Eigen::Success;
  }

  void ftran(Eigen::VectorXd& v) const {
    v = lu.solve(v).eval();
    for (const auto& e : etas) {
      const double vr = v[e.r] / e.col[e.r];
      v -= vr * e.col;
      v[e.r] = vr;
    }
  }

  void btran(Eigen::VectorXd& u) {
    for (auto it = etas.rbegin(); it != etas.rend(); ++it) {
      const double ur = u[it->r];
      u[it->r] = 0.0;
      const double s = u.dot(it->col);
      u[it->r] = (ur - s) / it->col[it->r];
    }
    u = lu.transpose().solve(u).eval();
  }

  void place_nonbasic(int j) {
    if (state[j] == VarState::at_upper && std::isfinite(hi[j])) {
      x[j] = hi[j];
    } else if (std::isfinite(lo[j])) {
      state[j] = VarState::at_lower;
      x[j] = lo[j];
    } else {
      state[j] = VarState::at_upper;
      x[j] = hi[j];
    }
  }

  void slack_basis() {
    head.resize(m);
    pos.assign(N, -1);
    state.assign(N, VarState::at_lower);
    x.assign(N, 0.0);
    for (int i = 0; i < m; ++i) {
      head[i] = n + i;
      pos[n + i] = i;
      state[n + i] = VarState::basic;
    }
    for (int j = 0; j < n; ++j) {
      state[j] = cost[j] < 0.0 ? VarState::at_upper : VarState::at_lower;
      place_nonbasic(j);
    }
  }

  bool load_basis(const Basis& w) {
    if (static_cast<int>(w.head.size()) != m || static_cast<int>(w.state.size()) != N) return false;
    head = w.head;
    state = w.state;
    pos.assign(N, -1);
    for (int p = 0; p < m; ++p) {
      const int j = head[p];
      if (j < 0 || j >= N || pos[j] != -1 || state[j] != VarState::basic) return false;
      pos[j] = p;
    }
    x.assign(N, 0.0);
    for (int j = 0; j < N; ++j) {
      if (pos[j] >= 0) continue;
      if (state[j] == VarState::basic) return false;
      place_nonbasic(j);
    }
    return true;
  }

  void compute_primal() {
    Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(b.data(), m);
    for (int j = 0; j < N; ++j) {
      if (pos[j] >= 0 || x[j] == 0.0) continue;
      if (j >= n) {
        rhs[j - n] -= x[j];
      } else {
        for (int k = col_start[j]; k < col_start[j + 1]; ++k) rhs[row_idx[k]] -= val[k] * x[j];
      }
    }
    ftran(rhs);
    for (int p = 0; p < m; ++p) x[head[p]] = rhs[p];
  }

  void compute_duals() {
    y.resize(m);
    for (int p = 0; p < m; ++p) y[p] = cost[head[p]];
    btran(y);
    d.assign(N, 0.0);
    for (int j = 0; j < N; ++j)
      if (pos[j] < 0) d[j] = cost[j] - dot_col(j, y);
  }

  // Moves boxed nonbasics whose reduced cost has the wrong sign to the other
  // bound. Returns false when a one-sided column is dual infeasible.
  // With `lenient`, one-sided columns are left alone; the Lagrangian bound
  // stays valid, only slightly weaker.
  bool restore_dual_feasibility(int& flips, bool lenient = false) {
    flips = 0;
    for (int j = 0; j < N; ++j) {
      if (pos[j] >= 0 || fixed(j)) continue;
      if (state[j] == VarState::at_lower && d[j] < -opt.dual_tol) {
        if (!std::isfinite(hi[j])) {
          if (lenient) continue;
          return false;
        }
        state[j] = VarState::at_upper;
        x[j] = hi[j];
        ++flips;
      } else if (state[j] == VarState::at_upper && d[j] > opt.dual_tol) {
        if (!std::isfinite(lo[j])) {
          if (lenient) continue;
          return false;
        }
        state[j] = VarState::at_lower;
        x[j] = lo[j];
        ++flips;
      }
    }
    return true;
  }

  double infeasibility(int j) const {
    if (x[j] < lo[j] - opt.primal_tol) return lo[j] - x[j];
    if (x[j] > hi[j] + opt.primal_tol) return x[j] - hi[j];
    return 0.0;
  }

  int choose_leaving(bool bland) const {
    int r = -1;
    double best = 0.0;
    for (int p = 0; p < m; ++p) {
      const double v = infeasibility(head[p]);
      if (v <= 0.0) continue;
      if (bland) {
        if (r < 0 || head[p] < head[r]) r = p;
      } else if (v > best) {
        best = v;
        r = p;
      }
    }
    return r;
  }

  void cold_start() {
    slack_basis();
    if (!factorize()) throw numerical_error("identity basis failed to factorize");
    compute_primal();
    compute_duals();
  }

  LpSolution run(const Basis* warm) {
    LpSolution sol;
    const int refactors_before = refactors;
    if (m == 0) return trivial();

    bool warm_ok = warm && !warm->empty() && load_basis(*warm) && factorize();
    if (warm_ok) {
      compute_primal();
      compute_duals();
      int flips = 0;
      warm_ok = restore_dual_feasibility(flips);
      if (warm_ok && flips) compute_primal();
    }
    if (!warm_ok) cold_start();
    bool perturbed = perturb();
    int reperturbations = 0;

    long iter = 0;
    int degenerate = 0;
    bool bland = false;
    bool verified_infeasible = false;
    int breakdowns = 0;
    Eigen::VectorXd rho(m), alpha_q(m);
    std::vector<double> alpha_r(N, 0.0);

    for (;;) {
      if (iter >= opt.max_iterations) {
        sol.status = LpStatus::iteration_limit;
        break;
      }
      int r = choose_leaving(bland);
      if (r < 0) {
        if (!etas.empty()) {
          refresh();
          r = choose_leaving(bland);
        }
        if (r < 0 && perturbed) {
          // Back to the true costs; boxed columns that turn dual infeasible
          // flip bound and the dual simplex carries on.
          cost = true_cost;
          perturbed = false;
          compute_duals();
          primal_cleanup(iter);
          sol.status = LpStatus::optimal;
          break;
        }
        if (r < 0) {
          int flips = 0;
          if (!restore_dual_feasibility(flips)) {
            // Drifted one-sided reduced costs; restart from the slack basis.
            if (++breakdowns > 2) throw numerical_error("dual feasibility lost on a one-sided logical column");
            cold_start();
            continue;
          }
          if (flips) {
            compute_primal();
            continue;
          }
          sol.status = LpStatus::optimal;
          break;
        }
      }
      const int p = head[r];
      const double sigma = x[p] > hi[p] ? 1.0 : -1.0;
      const double target = sigma > 0 ? hi[p] : lo[p];

      rho.setZero(m);
      rho[r] = 1.0;
      btran(rho);

      int q = -1;
      double theta_max = kInf;
      for (int j = 0; j < N; ++j) {
        if (pos[j] >= 0 || fixed(j)) {
          alpha_r[j] = 0.0;
          continue;
        }
        alpha_r[j] = dot_col(j, rho);
        const double a = sigma * alpha_r[j];
        if (state[j] == VarState::at_lower && a > opt.pivot_tol)
          theta_max = std::min(theta_max, (d[j] + (bland ? 0.0 : opt.dual_tol)) / a);
        else if (state[j] == VarState::at_upper && a < -opt.pivot_tol)
          theta_max = std::min(theta_max, (d[j] - (bland ? 0.0 : opt.dual_tol)) / a);
      }
      if (std::isfinite(theta_max)) {
        double best = -1.0;
        for (int j = 0; j < N; ++j) {
          if (pos[j] >= 0 || fixed(j)) continue;
          const double a = sigma * alpha_r[j];
          const bool eligible = (state[j] == VarState::at_lower && a > opt.pivot_tol) ||
                                (state[j] == VarState::at_upper && a < -opt.pivot_tol);
          if (!eligible) continue;
          const double ratio = d[j] / a;
          if (bland) {
            if (ratio <= theta_max + 1e-12) {
              q = j;
              break;
            }
          } else if (ratio <= theta_max && std::abs(a) > best) {
            best = std::abs(a);
            q = j;
          }
        }
      }
      if (q < 0) {
        if (!verified_infeasible && !etas.empty()) {
          verified_infeasible = true;
          refresh();
          continue;
        }
        sol.status = LpStatus::infeasible;
        sol.farkas.assign(rho.data(), rho.data() + m);
        for (int i = 0; i < m; ++i)
          if (std::abs(rho[i]) > 1e-9) sol.certificate_rows.push_back(i);
        break;
      }
      verified_infeasible = false;

      load_col(q, alpha_q);
      ftran(alpha_q);
      if (std::abs(alpha_q[r] - alpha_r[q]) > 1e-7 * (1.0 + std::abs(alpha_q[r])) && !etas.empty()) {
        refresh();
        continue;
      }
      if (std::abs(alpha_q[r]) < 1e-11) {
        if (++breakdowns > 3) throw numerical_error("pivot element vanished after refactorization");
        refresh();
        continue;
      }

      const double t = std::max(0.0, d[q] / (sigma * alpha_r[q]));
      const double theta = sigma * t;
      for (int j = 0; j < N; ++j)
        if (pos[j] < 0 && alpha_r[j] != 0.0) d[j] -= theta * alpha_r[j];
      d[q] = 0.0;
      d[p] = -theta;

      const double delta = (x[p] - target) / alpha_q[r];
      for (int i = 0; i < m; ++i) x[head[i]] -= delta * alpha_q[i];
      x[q] += delta;
      x[p] = target;

      state[p] = sigma > 0 ? VarState::at_upper : VarState::at_lower;
      if (fixed(p)) state[p] = VarState::at_lower;
      state[q] = VarState::basic;
      pos[p] = -1;
      pos[q] = r;
      head[r] = q;
      etas.push_back({r, alpha_q});
      ++iter;

      if (t <= 1e-12) {
        if (++degenerate > opt.degenerate_before_bland) {
          // Stalling on the true costs: perturb again before resorting to Bland.
          if (!perturbed && !bland && reperturbations < 5) {
            ++reperturbations;
            perturbed = perturb();
            degenerate = 0;
          } else {
            bland = true;
          }
        }
      } else {
        degenerate = 0;
        bland = false;
        sol.used_bland = sol.used_bland || bland;
      }
      if (bland) sol.used_bland = true;
      if (static_cast<int>(etas.size()) >= opt.refactor_every) refresh();
    }
    if (perturbed) {
      cost = true_cost;
      compute_duals();
    }
    sol.iterations = iter;
    finish(sol);
    sol.refactorizations = refactors - refactors_before;
    return sol;
  }

  // Primal simplex from a primal feasible basis, used once the cost shifts
  // are removed. Leftover dual infeasibility after the iteration cap only
  // weakens the Lagrangian bound.
  void primal_cleanup(long& iter) {
    const long cap = iter + std::max<long>(2000, 2L * m);
    Eigen::VectorXd alpha(m), rho(m);
    std::vector<double> alpha_r(N, 0.0);
    while (iter < cap) {
      int q = -1;
      double best = opt.dual_tol;
      for (int j = 0; j < N; ++j) {
        if (pos[j] >= 0 || fixed(j)) continue;
        const double v = state[j] == VarState::at_lower ? -d[j] : d[j];
        if (v > best) {
          best = v;
          q = j;
        }
      }
      if (q < 0) return;
      const double dir = state[q] == VarState::at_lower ? 1.0 : -1.0;
      load_col(q, alpha);
      ftran(alpha);
      // Harris two-pass ratio test over the basic columns.
      double bound_step = hi[q] - lo[q];
      double relaxed = bound_step;
      for (int i = 0; i < m; ++i) {
        const double a = dir * alpha[i];
        const int b = head[i];
        if (a > opt.pivot_tol && std::isfinite(lo[b]))
          relaxed = std::min(relaxed, (x[b] - lo[b] + opt.primal_tol) / a);
        else if (a < -opt.pivot_tol && std::isfinite(hi[b]))
          relaxed = std::min(relaxed, (hi[b] - x[b] + opt.primal_tol) / -a);
      }
      if (!std::isfinite(relaxed)) return;  // unbounded ray; cannot occur with boxed columns
      int r = -1;
      double best_a = 0.0, step = bound_step;
      for (int i = 0; i < m; ++i) {
        const double a = dir * alpha[i];
        const int b = head[i];
        double ratio = kInf;
        if (a > opt.pivot_tol && std::isfinite(lo[b]))
          ratio = (x[b] - lo[b]) / a;
        else if (a < -opt.pivot_tol && std::isfinite(hi[b]))
          ratio = (hi[b] - x[b]) / -a;
        if (ratio <= relaxed && std::abs(a) > best_a) {
          best_a = std::abs(a);
          r = i;
          step = std::max(0.0, ratio);
        }
      }
      if (r < 0 || bound_step <= step) {
        // Entering column runs to its other bound.
        step = bound_step;
        for (int i = 0; i < m; ++i) x[head[i]] -= dir * step * alpha[i];
        x[q] += dir * step;
        state[q] = dir > 0 ? VarState::at_upper : VarState::at_lower;
        x[q] = dir > 0 ? hi[q] : lo[q];
        ++iter;
        continue;
      }
      const int p = head[r];
      const double a_r = alpha[r];
      rho.setZero(m);
      rho[r] = 1.0;
      btran(rho);
      for (int j = 0; j < N; ++j) alpha_r[j] = (pos[j] >= 0 || fixed(j)) ? 0.0 : dot_col(j, rho);
      const double ratio_d = d[q] / a_r;
      for (int j = 0; j < N; ++j)
        if (pos[j] < 0 && alpha_r[j] != 0.0) d[j] -= ratio_d * alpha_r[j];
      d[q] = 0.0;
      d[p] = -ratio_d;

      for (int i = 0; i < m; ++i) x[head[i]] -= dir * step * alpha[i];
      x[q] += dir * step;
      const bool to_lower = dir * a_r > 0;
      state[p] = to_lower ? VarState::at_lower : VarState::at_upper;
      x[p] = to_lower ? lo[p] : hi[p];
      if (fixed(p)) state[p] = VarState::at_lower;
      state[q] = VarState::basic;
      pos[p] = -1;
      pos[q] = r;
      head[r] = q;
      etas.push_back({r, alpha});
      ++iter;
      if (static_cast<int>(etas.size()) >= opt.refactor_every) refresh();
    }
  }

  // Shifts nonbasic structural costs away from zero reduced cost, in the
  // direction that keeps the basis dual feasible. Deterministic per column.
  bool perturb() {
    cost = true_cost;
    if (opt.cost_perturbation <= 0.0 || m == 0) return false;
    double scale = 1.0;
    for (int j = 0; j < n; ++j) scale = std::max(scale, std::abs(true_cost[j]));
    bool any = false;
    for (int j = 0; j < n; ++j) {
      if (pos[j] >= 0 || fixed(j)) continue;
      std::uint64_t h = static_cast<std::uint64_t>(j) * 0x9E3779B97F4A7C15ull;
      h ^= h >> 29;
      const double u = 1.0 + static_cast<double>(h % 1000) / 1000.0;
      const double delta = opt.cost_perturbation * u * (scale + std::abs(true_cost[j]));
      cost[j] += state[j] == VarState::at_upper ? -delta : delta;
      d[j] += state[j] == VarState::at_upper ? -delta : delta;
      any = true;
    }
    return any;
  }

  void refresh() {
    if (!factorize()) {
      // Fall back to the slack basis, which is always dual feasible here.
      cold_start();
      return;
    }
    compute_primal();
    compute_duals();
  }

  LpSolution trivial() {
    LpSolution sol;
    head.clear();
    pos.assign(N, -1);
    state.assign(N, VarState::at_lower);
    x.assign(N, 0.0);
    for (int j = 0; j < n; ++j) {
      state[j] = cost[j] < 0.0 ? VarState::at_upper : VarState::at_lower;
      place_nonbasic(j);
    }
    y.resize(0);
    d = cost;
    sol.status = LpStatus::optimal;
    finish(sol);
    return sol;
  }

  void finish(LpSolution& sol) {
    sol.x.assign(x.begin(), x.begin() + n);
    sol.basis.head = head;
    sol.basis.state = state;
    double obj = offset;
    for (int j = 0; j < n; ++j) obj += cost[j] * x[j];
    sol.objective = obj;
    if (m > 0 && sol.status != LpStatus::infeasible) {
      if (!etas.empty() && factorize()) compute_primal();
      compute_duals();
      sol.x.assign(x.begin(), x.begin() + n);
      obj = offset;
      for (int j = 0; j < n; ++j) obj += cost[j] * x[j];
      sol.objective = obj;
    }
    sol.duals.assign(m, 0.0);
    for (int i = 0; i < m && y.size() == m; ++i) sol.duals[i] = y[i];

    // Lagrangian bound with duals clipped to their feasible signs.
    Eigen::VectorXd yc = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < m && y.size() == m; ++i) {
      double v = y[i];
      if (sense[i] == Sense::le) v = std::min(v, 0.0);
      if (sense[i] == Sense::ge) v = std::max(v, 0.0);
      yc[i] = v;
    }
    double dual = offset;
    for (int i = 0; i < m; ++i) dual += yc[i] * b[i];
    sol.reduced.assign(n, 0.0);
    for (int j = 0; j < n; ++j) {
      const double dj = cost[j] - dot_col(j, yc);
      sol.reduced[j] = dj;
      dual += dj >= 0.0 ? dj * lo[j] : dj * hi[j];
    }
    sol.dual_objective = dual;

    double pinf = 0.0;
    for (int j = 0; j < n; ++j) pinf = std::max({pinf, lo[j] - x[j], x[j] - hi[j]});
    std::vector<double> act(m, 0.0);
    for (int j = 0; j < n; ++j)
      for (int k = col_start[j]; k < col_start[j + 1]; ++k) act[row_idx[k]] += val[k] * x[j];
    for (int i = 0; i < m; ++i) {
      const double s = b[i] - act[i];
      pinf = std::max({pinf, lo[n + i] - s, s - hi[n + i]});
    }
    sol.primal_infeasibility = pinf;
    double dinf = 0.0;
    for (int j = 0; j < N; ++j) {
      if (pos[j] >= 0 || fixed(j)) continue;
      if (state[j] == VarState::at_lower) dinf = std::max(dinf, -d[j]);
      if (state[j] == VarState::at_upper) dinf = std::max(dinf, d[j]);
    }
    sol.dual_infeasibility = dinf;
  }
};

LpSolver::LpSolver(const MilpModel& model, LpOptions options)
    : impl_(std::make_unique<Impl>(model, options)) {}
LpSolver::~LpSolver() = default;
LpSolver::LpSolver(LpSolver&&) noexcept = default;
LpSolver& LpSolver::operator=(LpSolver&&) noexcept = default;

void LpSolver::set_bounds(int j, double lower, double upper) {
  if (j < 0 || j >= impl_->n) throw input_error("bound change on an unknown column");
  if (lower > upper) throw input_error("crossed bounds on column " + std::to_string(j));
  impl_->lo[j] = lower;
  impl_->hi[j] = upper;
}
double LpSolver::lower(int j) const { return impl_->lo.at(j); }
double LpSolver::upper(int j) const { return impl_->hi.at(j); }
void LpSolver::reset_bounds() {
  impl_->lo = impl_->model_lo;
  impl_->hi = impl_->model_hi;
}
LpSolution LpSolver::solve(const Basis* warm) { return impl_->run(warm); }
int LpSolver::rows() const { return impl_->m; }
int LpSolver::columns() const { return impl_->n; }

LpSolution solve_lp(const MilpModel& model, const Basis* warm, const LpOptions& options) {
  LpSolver s(model, options);
  return s.solve(warm);
}

}  // namespace hvacdr::milp
