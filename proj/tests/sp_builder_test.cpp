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

#include <vector>

#include "qkdplan/branch_and_bound.hpp"
#include "qkdplan/sp_builder.hpp"
#include "random_instances.hpp"

namespace qkdplan {
namespace {

// Two ground nodes joined by one 160 km fiber. Utilization is free and the
// on-demand pools are closed, so the optimum reserves exactly what one
// parallel link needs.
Instance two_nodes(std::vector<Rational> demand, std::int64_t ondemand = 0) {
  Link l{0, 1, Medium::kFiber, Rational(160), {}};
  l.caps = {4, 4, ondemand, ondemand};
  Instance inst;
  inst.topology = Topology({{0, Layer::kGround, ""}, {1, Layer::kGround, ""}}, {l});
  inst.requests = {Request{7, 0, 1, std::move(demand)}};
  inst.w_qkd = 1;
  inst.w_kml = 1;
  for (Medium m : kAllMedia) {
    inst.costs.set(m, Phase::kUtilization, inst.costs.at(m, Phase::kReservation).scaled(0));
  }
  inst.scenarios = enumerate_scenarios(rate_support_of(inst.requests),
                                       uniform_weather({Weather::kClear}));
  return inst;
}

TEST(SpBuilder, TwoNodeReservationCost) {
  Instance inst = two_nodes({Rational(1)});
  SolveOutcome out = solve_instance(inst);
  ASSERT_EQ(out.milp.status, MilpStatus::kOptimal);
  const Rational ch = inst.costs.at(Medium::kFiber, Phase::kReservation).ch;
  EXPECT_EQ(out.milp.objective, Rational(1750) + Rational(2700) + 2 * 160 * ch);
  ASSERT_TRUE(out.plan);
  EXPECT_EQ(out.plan->routes[0].nodes, (std::vector<int>{0, 1}));
  EXPECT_EQ(out.plan->allocation[0][0].rqk, 1);
  EXPECT_EQ(out.plan->allocation[0][0].rkm, 1);
  EXPECT_EQ(out.plan->cost.total, out.milp.objective);
}

TEST(SpBuilder, ClosedPoolsMakeHighDemandInfeasible) {
  Instance inst = two_nodes({Rational(5)});  // five parallel links, four reserved at most
  EXPECT_EQ(solve_instance(inst).milp.status, MilpStatus::kInfeasible);
  inst = two_nodes({Rational(5)}, 1);
  EXPECT_EQ(solve_instance(inst).milp.status, MilpStatus::kOptimal);
}

TEST(SpBuilder, ModelShape) {
  Instance inst = two_nodes({Rational(1), Rational(2)});
  SpModel sp = build_deterministic_equivalent(inst);
  // w on 1 arc, rqk/rkm on 1 link, 4 recourse columns over 2 scenarios.
  EXPECT_EQ(sp.model.num_columns(), 1u + 2u + 8u);
  EXPECT_TRUE(sp.model.find_column("w_0_1_7").has_value());
  EXPECT_EQ(sp.columns.eqk[0][0].size(), 2u);
}

TEST(ExpectedValue, RateRoundsUpToSupportGrid) {
  EXPECT_EQ(expected_value_rate({Rational(1), Rational(3)}), 2);
  EXPECT_EQ(expected_value_rate({Rational(2), Rational(4)}), 4);
  EXPECT_EQ(expected_value_rate({Rational(5)}), 5);
  EXPECT_EQ(expected_value_rate({Rational(1, 2), Rational(1)}), 1);
  EXPECT_THROW(expected_value_rate({}), ValidationError);
}

TEST(ExpectedValue, SingleClearScenario) {
  testing::InstanceGenerator gen(9);
  Instance inst = gen.next({false, true});
  Instance ev = expected_value_instance(inst);
  ASSERT_EQ(ev.scenarios.size(), 1u);
  EXPECT_EQ(ev.scenarios[0].weather, Weather::kClear);
  EXPECT_EQ(ev.scenarios[0].probability, 1);
}

// With the first stage fixed to the stochastic optimum, the per-scenario
// recourse problems reproduce the same expected cost.
TEST(FixedFirstStage, ReproducesStochasticOptimum) {
  testing::InstanceGenerator gen(13);
  int checked = 0;
  for (int k = 0; k < 20; ++k) {
    Instance inst = gen.next();
    SolveOutcome out = solve_instance(inst);
    if (!out.plan) continue;
    ++checked;
    RecourseEvaluation ev = evaluate_fixed_first_stage(inst, out.plan->first_stage(inst));
    EXPECT_EQ(ev.total, out.milp.objective) << k;
    EXPECT_EQ(ev.first_stage, out.plan->cost.first_stage) << k;
  }
  EXPECT_GE(checked, 8);
}

TEST(FixedFirstStage, ReportsShortfall) {
  Instance inst = two_nodes({Rational(1), Rational(3)});
  FirstStage fs;
  fs.route = {std::vector<bool>(inst.topology.arcs().size(), false)};
  fs.route[0][inst.topology.arc_of_link(0)] = true;
  fs.rqk = {{1}};
  fs.rkm = {{1}};
  try {
    evaluate_fixed_first_stage(inst, fs);
    FAIL() << "expected InfeasibleRecourse";
  } catch (const InfeasibleRecourse& e) {
    EXPECT_EQ(e.shortfall(), 2);
    EXPECT_EQ(inst.scenarios[e.scenario()].rates_kbps.at(7), 3);
  }
  fs.rqk = {{9}};
  EXPECT_THROW(evaluate_fixed_first_stage(inst, fs), ValidationError);
}

TEST(Extraction, RoutesSimpleAndCostsMatch) {
  testing::InstanceGenerator gen(17);
  for (int k = 0; k < 25; ++k) {
    Instance inst = gen.next({true, true});
    SolveOutcome out = solve_instance(inst);
    if (!out.plan) continue;
    for (std::size_t f = 0; f < inst.requests.size(); ++f) {
      EXPECT_TRUE(is_simple_path(inst, inst.requests[f], out.plan->routes[f]));
    }
    EXPECT_EQ(out.plan->cost.total, out.milp.objective);
    for (std::size_t s = 0; s < inst.scenarios.size(); ++s) {
      if (inst.scenarios[s].weather != Weather::kCloudy) continue;
      for (const auto& per_link : out.plan->allocation) {
        for (std::size_t l = 0; l < per_link.size(); ++l) {
          if (inst.topology.link(l).medium != Medium::kSatellite) continue;
          EXPECT_EQ(per_link[l].eqk[s] + per_link[l].ekm[s], 0);
          EXPECT_EQ(per_link[l].oqk[s] + per_link[l].okm[s], 0);
        }
      }
    }
  }
}

TEST(Extraction, RejectsInfeasibleAssignment) {
  Instance inst = two_nodes({Rational(1)});
  SpModel sp = build_deterministic_equivalent(inst);
  std::vector<Rational> zeros(sp.model.num_columns(), Rational(0));
  EXPECT_THROW(extract_solution(inst, sp, zeros), Error);
}

}  // namespace
}  // namespace qkdplan
