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
#include <string>

#include "qkdplan/branch_and_bound.hpp"
#include "qkdplan/lp_format.hpp"
#include "random_instances.hpp"

namespace qkdplan {
namespace {

TEST(LpFormat, WritesSections) {
  MilpModel m;
  m.add_column({"x", Rational(0), std::nullopt, VarType::kContinuous, Rational(1, 3)});
  m.add_column({"y", std::nullopt, std::nullopt, VarType::kInteger, -2});
  m.add_column({"b", Rational(0), Rational(1), VarType::kBinary, 0});
  m.add_row({"c1", {{0, Rational(1, 4)}, {1, 1}}, Sense::kGreaterEqual, Rational(1, 2)});
  m.add_row({"c2", {{1, 1}, {2, -3}}, Sense::kEqual, 0});
  const std::string text = export_lp_format(m);
  EXPECT_NE(text.find("Minimize"), std::string::npos);
  EXPECT_NE(text.find("\\ objective_scale 3"), std::string::npos);
  EXPECT_NE(text.find(" obj: 1 x - 6 y + 0 b"), std::string::npos) << text;
  EXPECT_NE(text.find(" c1: 0.25 x + 1 y >= 0.5"), std::string::npos) << text;
  EXPECT_NE(text.find(" y free"), std::string::npos);
  EXPECT_NE(text.find("Generals\n y"), std::string::npos);
  EXPECT_NE(text.find("Binaries\n b"), std::string::npos);
  EXPECT_NE(text.find("End"), std::string::npos);
}

TEST(LpFormat, ParsesHandWrittenText) {
  const char* text = R"(\ comment line
Maximize
 profit: 3 x + 2 y
Subject To
 a: x + y <= 4
 b: x + 3 y <= 6
Bounds
 x <= 3
General
 x y
End
)";
  MilpModel m = parse_lp_format(text);
  ASSERT_EQ(m.num_columns(), 2u);
  EXPECT_EQ(m.column(0).cost, -3);  // maximization is stored negated
  EXPECT_EQ(*m.column(0).upper, 3);
  EXPECT_EQ(m.column(1).type, VarType::kInteger);
  MilpResult r = solve_milp(m);
  ASSERT_EQ(r.status, MilpStatus::kOptimal);
  EXPECT_EQ(r.objective, -11);
}

TEST(LpFormat, RejectsBadInput) {
  EXPECT_THROW(parse_lp_format("Minimize\n obj: x\nSubject To\n c: x <=\nEnd\n"), ParseError);
  EXPECT_THROW(parse_lp_format("Subject To\n c: x >= 1\n"), ParseError);
  EXPECT_THROW(parse_lp_format("Minimize\n obj: 2 x\nBounds\n x <= abc\nEnd\n"), ParseError);
  MilpModel m;
  m.add_column({"bad name", Rational(0), Rational(1), VarType::kInteger, 1});
  EXPECT_THROW(export_lp_format(m), ValidationError);
}

TEST(LpFormat, RoundTripKeepsColumnsAndOptimum) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 60; ++k) {
    MilpModel m = testing::random_model(rng, false);
    MilpModel back = parse_lp_format(export_lp_format(m));
    ASSERT_EQ(back.columns(), m.columns()) << k;
    ASSERT_EQ(back.num_rows(), m.num_rows()) << k;
    for (std::size_t i = 0; i < m.num_rows(); ++i) {
      EXPECT_EQ(back.row(i).name, m.row(i).name);
      EXPECT_EQ(back.row(i).sense, m.row(i).sense);
    }
    MilpResult a = solve_milp(m);
    MilpResult b = solve_milp(back);
    ASSERT_EQ(a.status, b.status) << k;
    if (a.status == MilpStatus::kOptimal) EXPECT_EQ(a.objective, b.objective) << k;
  }
}

TEST(LpFormat, RoundTripPlanningModel) {
  testing::InstanceGenerator gen(3);
  for (int k = 0; k < 5; ++k) {
    MilpModel m = build_deterministic_equivalent(gen.next()).model;
    MilpModel back = parse_lp_format(export_lp_format(m));
    EXPECT_EQ(back.columns(), m.columns());
    MilpResult a = solve_milp(m);
    MilpResult b = solve_milp(back);
    ASSERT_EQ(a.status, b.status);
    if (a.has_solution()) EXPECT_EQ(a.objective, b.objective);
  }
}

}  // namespace
}  // namespace qkdplan
