// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "hvacdr/milp/model.hpp"

namespace hvacdr::milp {

// CPLEX LP text. Every column is written to the Bounds section in index
// order so that import restores the same column numbering. Numbers use 17
// significant digits, which makes the round trip exact.
std::string export_lp(const MilpModel& model);
MilpModel import_lp(std::string_view text);

// Solution files hold one `name=value` pair per line; columns that are not
// listed read as zero.
std::string export_solution(const MilpModel& model, const std::vector<double>& x);
std::vector<double> import_solution(std::string_view text, const MilpModel& model);

// Same columns, bounds, integrality, objective and rows, compared exactly.
// Branching priorities are not part of the LP format and are ignored.
bool same_structure(const MilpModel& a, const MilpModel& b);

}  // namespace hvacdr::milp
