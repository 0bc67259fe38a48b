// Copyright 2026 The qkdplan Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "lp_oracle.hpp"
#include "qkdplan/simplex.hpp"
#include "random_instances.hpp"

namespace qkdplan {
namespace {

MilpModel dense_model(const std::vector<Rational>& cost, const std::vector<testing::Halfspace>& rows,
                      std::optional<Rational> upper = std::nullopt) {
  MilpModel m;
  for (std::size_t j = 0; j < cost.size(); ++j) {
    m.add_column({"x" + std::to_string(j), Rational(0), upper, VarType::kContinuous, cost[j]});
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    Row r{"r" + std::to_string(i), {}, rows[i].sense, rows[i].b};
    for (std::size_t j = 0; j < cost.size(); ++j) r.terms.push_back({j, rows[i].a[j]});
    m.add_row(std::move(r));
  }
  return m;
}

// Sign and complementary-slackness conditions that certify optimality.
void expect_certificate(const MilpModel& m, const LpSolution& s) {
  ASSERT_EQ(s.duals.size(), m.num_rows());
  for (std::size_t i = 0; i < m.num_rows(); ++i) {
    const Row& r = m.row(i);
    Rational slack = m.activity(i, s.values) - r.rhs;
    if (r.sense == Sense::kLessEqual) EXPECT_LE(s.duals[i], 0) << r.name;
    if (r.sense == Sense::kGreaterEqual) EXPECT_GE(s.duals[i], 0) << r.name;
    if (slack != 0) EXPECT_EQ(s.duals[i], 0) << r.name;
  }
  for (std::size_t j = 0; j < m.num_columns(); ++j) {
    const Column& c = m.column(j);
    Rational d = c.cost;
    for (std::size_t i = 0; i < m.num_rows(); ++i) {
      for (const Term& t : m.row(i).terms) {
        if (t.column == j) d -= s.duals[i] * t.coef;
      }
    }
    EXPECT_EQ(d, s.reduced_costs[j]) << c.name;
    const bool at_lower = c.lower && s.values[j] == *c.lower;
    const bool at_upper = c.upper && s.values[j] == *c.upper;
    if (!at_lower) EXPECT_LE(d, 0) << c.name;
    if (!at_upper) EXPECT_GE(d, 0) << c.name;
  }
}

TEST(Simplex, TextbookMaximization) {
  // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18
  MilpModel m = dense_model({-3, -5}, {{{1, 0}, Sense::kLessEqual, 4},
                                       {{0, 2}, Sense::kLessEqual, 12},
                                       {{3, 2}, Sense::kLessEqual, 18}});
  LpSolution s = solve_lp(m);
  ASSERT_EQ(s.status, LpStatus::kOptimal);
  EXPECT_EQ(s.objective, -36);
  EXPECT_EQ(s.values, (std::vector<Rational>{2, 6}));
  EXPECT_EQ(s.duals, (std::vector<Rational>{0, Rational(-3, 2), -1}));
  expect_certificate(m, s);
}

TEST(Simplex, InfeasibleAndUnbounded) {
  MilpModel inf = dense_model({1, 1}, {{{1, 1}, Sense::kGreaterEqual, 5}}, Rational(1));
  EXPECT_EQ(solve_lp(inf).status, LpStatus::kInfeasible);
  MilpModel unb = dense_model({-1, 0}, {{{0, 1}, Sense::kLessEqual, 3}});
  EXPECT_EQ(solve_lp(unb).status, LpStatus::kUnbounded);
  MilpModel eq = dense_model({1, 1}, {{{1, 1}, Sense::kEqual, 3}, {{1, -1}, Sense::kEqual, 4}});
  EXPECT_EQ(solve_lp(eq).status, LpStatus::kInfeasible);  // needs y = -1/2 < 0
}

TEST(Simplex, FreeFixedAndNegativeBounds) {
  MilpModel m;
  m.add_column({"f", std::nullopt, std::nullopt, VarType::kContinuous, 1});
  m.add_column({"g", Rational(-5), Rational(-2), VarType::kContinuous, -1});
  m.add_column({"h", Rational(7, 3), Rational(7, 3), VarType::kContinuous, 2});
  m.add_column({"u", std::nullopt, Rational(4), VarType::kContinuous, -1});
  m.add_row({"a", {{0, 1}, {1, 1}}, Sense::kGreaterEqual, Rational(-1, 2)});
  m.add_row({"b", {{0, 1}, {3, 1}}, Sense::kLessEqual, 10});
  LpSolution s = solve_lp(m);
  ASSERT_EQ(s.status, LpStatus::kOptimal);
  // g = -2, f = 3/2, u = min(4, 10 - f) = 4; objective 3/2 + 2 + 14/3 - 4.
  EXPECT_EQ(s.values, (std::vector<Rational>{Rational(3, 2), -2, Rational(7, 3), 4}));
  EXPECT_EQ(s.objective, Rational(3, 2) + 2 + Rational(14, 3) - 4);
  expect_certificate(m, s);
}

TEST(Simplex, BoundOverridesAndEmptyModel) {
  MilpModel m = dense_model({-1, -1}, {{{1, 1}, Sense::kLessEqual, 10}});
  LpBounds b = LpBounds::of(m);
  b.upper[0] = Rational(3);
  b.upper[1] = Rational(2);
  LpSolution s = solve_lp(m, b);
  ASSERT_EQ(s.status, LpStatus::kOptimal);
  EXPECT_EQ(s.objective, -5);
  b.lower[0] = Rational(4);
  EXPECT_EQ(solve_lp(m, b).status, LpStatus::kInfeasible);
  MilpModel empty;
  EXPECT_EQ(solve_lp(empty).status, LpStatus::kOptimal);
}

// Degenerate examples on which plain largest-coefficient pricing cycles.
TEST(Simplex, CyclingExamplesTerminate) {
  // max 10x1 - 57x2 - 9x3 - 24x4
  MilpModel chvatal = dense_model(
      {-10, 57, 9, 24}, {{{Rational(1, 2), Rational(-11, 2), Rational(-5, 2), 9}, Sense::kLessEqual, 0},
                         {{Rational(1, 2), Rational(-3, 2), Rational(-1, 2), 1}, Sense::kLessEqual, 0},
                         {{1, 0, 0, 0}, Sense::kLessEqual, 1}});
  // min -3/4 x4 + 20 x5 - 1/2 x6 + 6 x7
  MilpModel beale = dense_model(
      {Rational(-3, 4), 20, Rational(-1, 2), 6},
      {{{Rational(1, 4), -8, -1, 9}, Sense::kLessEqual, 0},
       {{Rational(1, 2), -12, Rational(-1, 2), 3}, Sense::kLessEqual, 0},
       {{0, 0, 1, 0}, Sense::kLessEqual, 1}});
  for (const MilpModel* m : {&chvatal, &beale}) {
    std::vector<testing::Halfspace> hs;
    std::vector<Rational> c;
    for (const Column& col : m->columns()) c.push_back(col.cost);
    for (const Row& r : m->rows()) {
      testing::Halfspace h{std::vector<Rational>(c.size()), r.sense, r.rhs};
      for (const Term& t : r.terms) h.a[t.column] = t.coef;
      hs.push_back(h);
    }
    for (std::size_t j = 0; j < c.size(); ++j) {
      std::vector<Rational> e(c.size());
      e[j] = 1;
      hs.push_back({e, Sense::kGreaterEqual, 0});
      hs.push_back({e, Sense::kLessEqual, 100});  // far outside the optimum
    }
    auto ref = testing::vertex_minimum(c, hs);
    ASSERT_TRUE(ref);
    for (LpOptions opt : {LpOptions{}, LpOptions{1, false}, LpOptions{32, true}}) {
      LpSolution s = solve_lp(*m, opt);
      ASSERT_EQ(s.status, LpStatus::kOptimal);
      EXPECT_EQ(s.objective, ref->objective);
      expect_certificate(*m, s);
    }
  }
}

TEST(Simplex, MatchesVertexEnumeration) {
  std::mt19937_64 rng(11);
  int optimal = 0;
  for (int k = 0; k < 150; ++k) {
    MilpModel m = testing::random_model(rng, false);
    MilpModel relaxed;
    for (Column c : m.columns()) {
      c.type = VarType::kContinuous;
      if (!c.lower) c.lower = Rational(0);
      if (!c.upper) c.upper = Rational(1);
      relaxed.add_column(c);
    }
    for (const Row& r : m.rows()) relaxed.add_row(r);
    auto ref = testing::brute_force_optimum(relaxed);
    LpSolution s = solve_lp(relaxed);
    if (!ref) {
      EXPECT_EQ(s.status, LpStatus::kInfeasible) << k;
      continue;
    }
    ++optimal;
    ASSERT_EQ(s.status, LpStatus::kOptimal) << k;
    EXPECT_EQ(s.objective, *ref) << k;
    EXPECT_FALSE(relaxed.first_violation(s.values).has_value()) << k;
    expect_certificate(relaxed, s);
  }
  EXPECT_GT(optimal, 40);
}

}  // namespace
}  // namespace qkdplan
