// SPDX-License-Identifier: Apache-2.0
#include "hvacdr/milp/model.hpp"

#include <algorithm>
#include <cmath>

#include "hvacdr/error.hpp"

namespace hvacdr::milp {

int MilpModel::add_variable(std::string name, double lower, double upper, double objective) {
  auto [it, fresh] = index_.emplace(name, num_variables());
  if (!fresh) throw config_error("duplicate variable name '" + name + "'");
  vars_.push_back({std::move(name), lower, upper, false, objective, 0});
  return it->second;
}

int MilpModel::add_binary(std::string name, double objective, int priority) {
  int j = add_variable(std::move(name), 0.0, 1.0, objective);
  vars_[j].binary = true;
  vars_[j].priority = priority;
  return j;
}

int MilpModel::add_constraint(std::string name, std::vector<Term> terms, Sense sense, double rhs) {
  // Merge repeated columns so every row holds each variable once.
  std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.var < b.var; });
  std::vector<Term> merged;
  for (const auto& t : terms) {
    if (t.var < 0 || t.var >= num_variables())
      throw config_error("constraint '" + name + "' references an unknown column");
    if (!merged.empty() && merged.back().var == t.var)
      merged.back().coef += t.coef;
    else
      merged.push_back(t);
  }
  std::erase_if(merged, [](const Term& t) { return t.coef == 0.0; });
  rows_.push_back({std::move(name), std::move(merged), sense, rhs});
  return num_constraints() - 1;
}

int MilpModel::binary_count() const {
  return static_cast<int>(std::count_if(vars_.begin(), vars_.end(), [](const Variable& v) { return v.binary; }));
}

std::optional<int> MilpModel::find(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int MilpModel::at(const std::string& name) const {
  auto j = find(name);
  if (!j) throw input_error("model has no variable '" + name + "'");
  return *j;
}

double MilpModel::objective_value(const std::vector<double>& x) const {
  double v = objective_offset;
  for (int j = 0; j < num_variables(); ++j) v += vars_[j].objective * x.at(j);
  return v;
}

double MilpModel::row_activity(int i, const std::vector<double>& x) const {
  double a = 0.0;
  for (const auto& t : rows_.at(i).terms) a += t.coef * x.at(t.var);
  return a;
}

double MilpModel::max_violation(const std::vector<double>& x, bool check_integrality) const {
  double worst = 0.0;
  for (int j = 0; j < num_variables(); ++j) {
    const auto& v = vars_[j];
    worst = std::max({worst, v.lower - x.at(j), x.at(j) - v.upper});
    if (check_integrality && v.binary) worst = std::max(worst, std::abs(x[j] - std::round(x[j])));
  }
  for (int i = 0; i < num_constraints(); ++i) {
    const double a = row_activity(i, x);
    const double b = rows_[i].rhs;
    switch (rows_[i].sense) {
      case Sense::le: worst = std::max(worst, a - b); break;
      case Sense::ge: worst = std::max(worst, b - a); break;
      case Sense::eq: worst = std::max(worst, std::abs(a - b)); break;
    }
  }
  return worst;
}

void MilpModel::validate() const {
  for (const auto& v : vars_) {
    if (!std::isfinite(v.lower) || !std::isfinite(v.upper))
      throw config_error("variable '" + v.name + "' needs finite bounds");
    if (v.lower > v.upper) throw config_error("variable '" + v.name + "' has crossed bounds");
    if (!std::isfinite(v.objective)) throw config_error("variable '" + v.name + "' has a non-finite cost");
    if (v.binary && (v.lower < 0.0 || v.upper > 1.0))
      throw config_error("binary '" + v.name + "' has bounds outside [0,1]");
  }
  for (const auto& r : rows_) {
    if (!std::isfinite(r.rhs)) throw config_error("row '" + r.name + "' has a non-finite right-hand side");
    for (const auto& t : r.terms) {
      if (t.var < 0 || t.var >= num_variables())
        throw config_error("row '" + r.name + "' references an unknown column");
      if (!std::isfinite(t.coef)) throw config_error("row '" + r.name + "' has a non-finite coefficient");
    }
  }
}

const char* sense_symbol(Sense s) {
  switch (s) {
    case Sense::le: return "<=";
    case Sense::ge: return ">=";
    case Sense::eq: return "=";
  }
  return "?";
}

}  // namespace hvacdr::milp
