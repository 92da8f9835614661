// SPDX-License-Identifier: Apache-2.0
// Dense two-phase tableau simplex with Bland's rule. Slow and simple on
// purpose: it only serves as a reference for the production solver.
#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "hvacdr/milp/model.hpp"

namespace oracle {

struct TableauResult {
  bool feasible = false;
  double objective = 0.0;
  std::vector<double> x;
};

inline TableauResult tableau_lp(const hvacdr::milp::MilpModel& model,
                                const std::vector<double>* lower = nullptr,
                                const std::vector<double>* upper = nullptr) {
  using hvacdr::milp::Sense;
  const int n = model.num_variables();
  std::vector<double> lo(n), hi(n);
  for (int j = 0; j < n; ++j) {
    lo[j] = lower ? (*lower)[j] : model.variable(j).lower;
    hi[j] = upper ? (*upper)[j] : model.variable(j).upper;
    if (lo[j] > hi[j]) return {};
  }
  // Rows in x' = x - lo: a x' (sense) b - a lo, plus x'_j <= hi_j - lo_j.
  struct Row {
    std::vector<double> a;
    Sense s;
    double b;
  };
  std::vector<Row> rows;
  for (const auto& c : model.constraints()) {
    Row r{std::vector<double>(n, 0.0), c.sense, c.rhs};
    for (const auto& t : c.terms) {
      r.a[t.var] += t.coef;
      r.b -= t.coef * lo[t.var];
    }
    rows.push_back(std::move(r));
  }
  for (int j = 0; j < n; ++j) {
    Row r{std::vector<double>(n, 0.0), Sense::le, hi[j] - lo[j]};
    r.a[j] = 1.0;
    rows.push_back(std::move(r));
  }
  for (auto& r : rows)
    if (r.b < 0) {
      for (double& v : r.a) v = -v;
      r.b = -r.b;
      if (r.s == Sense::le) r.s = Sense::ge;
      else if (r.s == Sense::ge) r.s = Sense::le;
    }
  const int m = static_cast<int>(rows.size());
  int n_slack = 0, n_art = 0;
  for (const auto& r : rows) {
    if (r.s != Sense::eq) ++n_slack;
    if (r.s != Sense::le) ++n_art;
  }
  const int cols = n + n_slack + n_art;
  std::vector<std::vector<double>> T(m, std::vector<double>(cols + 1, 0.0));
  std::vector<int> basis(m);
  int sk = n, ak = n + n_slack;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) T[i][j] = rows[i].a[j];
    T[i][cols] = rows[i].b;
    if (rows[i].s == Sense::le) {
      T[i][sk] = 1.0;
      basis[i] = sk++;
    } else if (rows[i].s == Sense::ge) {
      T[i][sk++] = -1.0;
      T[i][ak] = 1.0;
      basis[i] = ak++;
    } else {
      T[i][ak] = 1.0;
      basis[i] = ak++;
    }
  }
  auto pivot = [&](int r, int c) {
    const double pv = T[r][c];
    for (double& v : T[r]) v /= pv;
    for (int i = 0; i < m; ++i) {
      if (i == r || T[i][c] == 0.0) continue;
      const double f = T[i][c];
      for (int k = 0; k <= cols; ++k) T[i][k] -= f * T[r][k];
    }
    basis[r] = c;
  };
  auto run = [&](const std::vector<double>& cost, int allowed) -> bool {
    for (int it = 0; it < 100000; ++it) {
      int enter = -1;
      for (int j = 0; j < allowed && enter < 0; ++j) {
        double dj = cost[j];
        for (int i = 0; i < m; ++i) dj -= cost[basis[i]] * T[i][j];
        if (dj < -1e-10) enter = j;
      }
      if (enter < 0) return true;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) {
        if (T[i][enter] <= 1e-12) continue;
        const double ratio = T[i][cols] / T[i][enter];
        if (ratio < best - 1e-12 || (std::abs(ratio - best) <= 1e-12 && basis[i] < basis[leave])) {
          best = ratio;
          leave = i;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
    return false;
  };
  std::vector<double> phase1(cols, 0.0);
  for (int j = n + n_slack; j < cols; ++j) phase1[j] = 1.0;
  run(phase1, cols);
  double infeas = 0.0;
  for (int i = 0; i < m; ++i)
    if (basis[i] >= n + n_slack) infeas += T[i][cols];
  if (infeas > 1e-7) return {};
  for (int i = 0; i < m; ++i) {
    if (basis[i] < n + n_slack) continue;
    for (int j = 0; j < n + n_slack; ++j)
      if (std::abs(T[i][j]) > 1e-9) {
        pivot(i, j);
        break;
      }
  }
  std::vector<double> phase2(cols, 0.0);
  for (int j = 0; j < n; ++j) phase2[j] = model.variable(j).objective;
  run(phase2, n + n_slack);
  TableauResult res;
  res.feasible = true;
  res.x = lo;
  for (int i = 0; i < m; ++i)
    if (basis[i] < n) res.x[basis[i]] += T[i][cols];
  res.objective = model.objective_value(res.x);
  return res;
}

}  // namespace oracle
