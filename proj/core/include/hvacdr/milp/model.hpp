// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace hvacdr::milp {

enum class Sense { le, eq, ge };

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = 0.0;
  bool binary = false;
  double objective = 0.0;
  int priority = 0;  // higher values are branched on first
};

struct Term {
  int var = 0;
  double coef = 0.0;
};

struct Constraint {
  std::string name;
  std::vector<Term> terms;
  Sense sense = Sense::le;
  double rhs = 0.0;
};

// Minimization model with named columns. Names double as the registry that
// callers use to decode solutions, so they must be unique.
class MilpModel {
 public:
  int add_variable(std::string name, double lower, double upper, double objective = 0.0);
  int add_binary(std::string name, double objective = 0.0, int priority = 0);
  int add_constraint(std::string name, std::vector<Term> terms, Sense sense, double rhs);

  int num_variables() const { return static_cast<int>(vars_.size()); }
  int num_constraints() const { return static_cast<int>(rows_.size()); }
  int binary_count() const;

  const Variable& variable(int j) const { return vars_.at(j); }
  Variable& variable(int j) { return vars_.at(j); }
  const std::vector<Variable>& variables() const { return vars_; }
  const Constraint& constraint(int i) const { return rows_.at(i); }
  const std::vector<Constraint>& constraints() const { return rows_; }

  std::optional<int> find(const std::string& name) const;
  int at(const std::string& name) const;  // throws input_error when missing

  double objective_offset = 0.0;

  double objective_value(const std::vector<double>& x) const;
  double row_activity(int i, const std::vector<double>& x) const;
  // Largest bound, row or integrality violation of x.
  double max_violation(const std::vector<double>& x, bool check_integrality = true) const;

  // Rejects unknown columns, non-finite data and empty or crossed bounds.
  void validate() const;

 private:
  std::vector<Variable> vars_;
  std::vector<Constraint> rows_;
  std::unordered_map<std::string, int> index_;
};

const char* sense_symbol(Sense s);

}  // namespace hvacdr::milp
