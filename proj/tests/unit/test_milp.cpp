// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include <random>

#include "hvacdr/error.hpp"
#include "hvacdr/milp/bnb.hpp"
#include "hvacdr/milp/lp.hpp"
#include "hvacdr/milp/lp_format.hpp"
#include "tableau_lp.hpp"

using namespace hvacdr;
using namespace hvacdr::milp;

namespace {

MilpModel random_lp(std::mt19937_64& rng, int n, int rows) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  MilpModel m;
  for (int j = 0; j < n; ++j) m.add_variable("x" + std::to_string(j), -2 + U(rng), 3 + U(rng), U(rng));
  for (int i = 0; i < rows; ++i) {
    std::vector<Term> t;
    for (int j = 0; j < n; ++j) t.push_back({j, U(rng)});
    m.add_constraint("r" + std::to_string(i), t, i % 3 == 0 ? Sense::eq : (i % 3 == 1 ? Sense::le : Sense::ge), 2 * U(rng));
  }
  return m;
}

}  // namespace

TEST_SUITE("milp") {
  TEST_CASE("single bound LP") {
    MilpModel m;
    int x = m.add_variable("x", 0, 10, 1.0);
    m.add_constraint("c", {{x, 1.0}}, Sense::ge, 3.0);
    auto r = solve_lp(m);
    REQUIRE(r.status == LpStatus::optimal);
    CHECK(r.objective == doctest::Approx(3.0));
    CHECK(r.x[0] == doctest::Approx(3.0));
  }

  TEST_CASE("infeasible pair carries a certificate") {
    MilpModel m;
    int x = m.add_variable("x", -10, 10);
    m.add_constraint("le", {{x, 1.0}}, Sense::le, 1.0);
    m.add_constraint("ge", {{x, 1.0}}, Sense::ge, 2.0);
    auto r = solve_lp(m);
    CHECK(r.status == LpStatus::infeasible);
    CHECK(r.certificate_rows.size() == 2);
    CHECK(solve_mip(m).status == MipStatus::infeasible);
  }

  TEST_CASE("random LPs agree with the tableau reference") {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 80; ++k) {
      auto m = random_lp(rng, 3 + k % 12, 2 + (k * 7) % 10);
      auto a = solve_lp(m);
      auto o = oracle::tableau_lp(m);
      REQUIRE((a.status == LpStatus::optimal) == o.feasible);
      if (o.feasible) {
        CHECK(a.objective == doctest::Approx(o.objective).epsilon(1e-7));
        CHECK(a.dual_objective <= a.objective + 1e-7);
        CHECK(m.max_violation(a.x) < 1e-7);
      }
    }
  }

  TEST_CASE("warm start after a bound change") {
    std::mt19937_64 rng(8);
    auto m = random_lp(rng, 8, 5);
    LpSolver s(m);
    auto first = s.solve();
    s.set_bounds(2, 0.0, 0.5);
    auto warm = s.solve(&first.basis);
    auto cold = s.solve();
    REQUIRE(warm.status == cold.status);
    if (warm.status == LpStatus::optimal) CHECK(warm.objective == doctest::Approx(cold.objective).epsilon(1e-9));
  }

  TEST_CASE("pure LP is one node") {
    std::mt19937_64 rng(2);
    auto m = random_lp(rng, 6, 4);
    auto lp = solve_lp(m);
    auto r = solve_mip(m);
    if (lp.status == LpStatus::optimal) {
      CHECK(r.status == MipStatus::optimal);
      CHECK(r.nodes == 1);
      CHECK(r.gap == 0.0);
      CHECK(r.objective == doctest::Approx(lp.objective));
    }
  }

  TEST_CASE("two-item knapsack") {
    MilpModel m;
    int a = m.add_binary("a", -3.0), b = m.add_binary("b", -2.0);
    m.add_constraint("cap", {{a, 1.0}, {b, 1.0}}, Sense::le, 1.0);
    auto r = solve_mip(m);
    REQUIRE(r.status == MipStatus::optimal);
    CHECK(r.objective == doctest::Approx(-3.0));
    CHECK(r.x[a] == 1.0);
    CHECK(r.x[b] == 0.0);
    CHECK(r.bound_monotone);
    CHECK(r.weak_duality_violations == 0);
  }

  TEST_CASE("config validation") {
    BnbConfig c;
    c.rel_gap = -1.0;
    CHECK_THROWS_AS(c.validate(), config_error);
    MilpModel m;
    m.add_variable("x", 1.0, 0.0);
    CHECK_THROWS_AS(m.validate(), error);
    MilpModel d;
    d.add_variable("x", 0, 1);
    CHECK_THROWS(d.add_variable("x", 0, 1));
  }

  TEST_CASE("minimal LP file") {
    MilpModel m;
    int x = m.add_variable("x", 0, 5);
    m.add_constraint("c1", {{x, 2.0}}, Sense::le, 4.0);
    auto text = export_lp(m);
    CHECK(text.find("Minimize") != std::string::npos);
    CHECK(text.find("Subject To") != std::string::npos);
    CHECK(text.find("c1:") != std::string::npos);
    CHECK(text.find("End") != std::string::npos);
    CHECK(export_lp(import_lp(text)) == text);
  }

  TEST_CASE("LP text and solution round trips are exact") {
    std::mt19937_64 rng(3);
    auto m = random_lp(rng, 5, 4);
    m.add_binary("w1", 0.3);
    m.add_binary("w2", -1.0 / 3.0);
    m.objective_offset = 0.1;
    auto back = import_lp(export_lp(m));
    CHECK(same_structure(m, back));
    std::vector<double> x(m.num_variables());
    for (int j = 0; j < m.num_variables(); ++j) x[j] = 0.1 * j + 1.0 / 7.0;
    CHECK(import_solution(export_solution(m, x), m) == x);
    CHECK_THROWS_AS(import_lp("Minimize\n obj: 3 y\nSubject To\n c: y +\nEnd\n"), error);
  }

  TEST_CASE("log CSV has one row per entry") {
    MilpModel m;
    int a = m.add_binary("a", -1.0), b = m.add_binary("b", -1.0), c = m.add_binary("c", -1.0);
    m.add_constraint("k", {{a, 2.0}, {b, 2.0}, {c, 2.0}}, Sense::le, 3.0);
    auto r = solve_mip(m);
    CHECK(r.objective == doctest::Approx(-1.0));
    auto csv = log_csv(r.log);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(r.log.size()) + 1);
  }
}
