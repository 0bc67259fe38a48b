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

#include <sstream>
#include <string>
#include <vector>

#include "qkdplan/experiments.hpp"

namespace qkdplan {
namespace {

const std::string kData = QKDPLAN_DATA_DIR;
const std::string kTestData = QKDPLAN_TEST_DATA_DIR;

TEST(Grid, Parsing) {
  EXPECT_EQ(parse_grid("1,2,5"), (std::vector<Rational>{1, 2, 5}));
  EXPECT_EQ(parse_grid("0:10:5"), (std::vector<Rational>{0, 5, 10}));
  EXPECT_EQ(parse_grid("1/2:2:1/2"), (std::vector<Rational>{Rational(1, 2), 1, Rational(3, 2), 2}));
  EXPECT_THROW(parse_grid(""), Error);
  EXPECT_THROW(parse_grid("1:0:1"), Error);
  EXPECT_THROW(parse_grid("1:5:0"), Error);
  EXPECT_THROW(parse_grid("a,b"), Error);
  EXPECT_THROW(validate_grid({2, 1}, 0, false, "test"), ValidationError);
  EXPECT_THROW(validate_grid({0, 1}, 0, true, "test"), ValidationError);
  EXPECT_NO_THROW(validate_grid({0, 1}, 0, false, "test"));
}

TEST(Grid, FromDocument) {
  auto doc = json_util::parse_document(read_file(kData + "/nsfnet_sagin.json"));
  auto g = document_grid(doc, "cost_inflation_grid");
  ASSERT_TRUE(g);
  EXPECT_EQ(g->front(), 1);
  EXPECT_FALSE(document_grid(doc, "no_such_grid").has_value());
}

TEST(Diagnosis, RowFamilies) {
  EXPECT_EQ(detail::row_family("xrqk_cap_1_2"), "xrqk_cap");
  EXPECT_EQ(detail::row_family("dqk_1_2_0_0"), "dqk");
  EXPECT_EQ(detail::row_family("flow_3_0"), "flow");
}

TEST(Diagnosis, DemandRows) {
  Instance inst = load_instance_file(kTestData + "/infeasible.json");
  SolveOutcome out = solve_instance(inst);
  EXPECT_EQ(out.milp.status, MilpStatus::kInfeasible);
  std::string why = diagnose_infeasibility(inst);
  EXPECT_NE(why.find("dqk"), std::string::npos) << why;
  // Scenario 2 is the first with rate 2: six QKD wavelengths against four.
  EXPECT_NE(why.find("dqk_1_2_0_2"), std::string::npos) << why;
}

TEST(Diagnosis, Unreachable) {
  Instance inst = load_instance_file(kTestData + "/infeasible.json");
  inst.requests[0].source = 2;
  inst.requests[0].destination = 1;
  EXPECT_NE(diagnose_infeasibility(inst).find("no path"), std::string::npos);
}

TEST(Report, UavSatelliteExample) {
  Instance inst = load_instance_file(kData + "/uav_satellite.json");
  SolveOutcome out = solve_instance(inst);
  ASSERT_EQ(out.milp.status, MilpStatus::kOptimal);
  std::string report = format_report(inst, out);
  EXPECT_NE(report.find("status=optimal"), std::string::npos);
  EXPECT_NE(report.find("route.0=1 3 6 5"), std::string::npos) << report;
  EXPECT_NE(report.find("cost.total="), std::string::npos);
  // The sky can be cloudy and the satellite detour is never used.
  UsageByMedium u = medium_usage(inst, *out.plan);
  EXPECT_EQ(u[medium_index(Medium::kSatellite)].wavelengths(), 0);
}

TEST(Sweeps, DemandScalingAndCostInflation) {
  Instance inst = load_instance_file(kData + "/uav_satellite.json");
  Instance twice = scale_demand(inst, 2);
  EXPECT_EQ(twice.scenarios.rate_support.at(0), (std::vector<Rational>{2, 4}));
  EXPECT_THROW(scale_demand(inst, 0), ValidationError);
  Instance dear = inflate_costs(inst, 4);
  EXPECT_EQ(dear.costs.at(Medium::kUav, Phase::kReservation).tx,
            4 * inst.costs.at(Medium::kUav, Phase::kReservation).tx);
  EXPECT_EQ(dear.costs.at(Medium::kSatellite, Phase::kReservation),
            inst.costs.at(Medium::kSatellite, Phase::kReservation));
  EXPECT_THROW(inflate_costs(inst, Rational(1, 2)), ValidationError);
}

TEST(Sweeps, CsvLayoutIsStable) {
  Instance inst = load_instance_file(kData + "/medium_transition.json");
  std::vector<Rational> grid = {1, 64};
  std::vector<SweepRow> rows = cost_inflation_sweep(inst, grid);
  ASSERT_EQ(rows.size(), 2u);
  std::string csv = sweep_csv("cost-inflation", rows);
  EXPECT_EQ(csv, sweep_csv("cost-inflation", cost_inflation_sweep(inst, grid)));
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "#schema=qkdplan-sweep/1");
  std::getline(in, line);
  EXPECT_EQ(line, "#kind=cost-inflation");
  std::getline(in, line);
  const auto columns = std::count(line.begin(), line.end(), ',') + 1;
  EXPECT_EQ(columns, 6 + 18 + 2);
  while (std::getline(in, line)) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ',') + 1, columns) << line;
  }
  EXPECT_EQ(rows[0].routes, "1-x-2-x-3");
  EXPECT_GT(rows[1].usage[medium_index(Medium::kSatellite)].wavelengths(), 0);
}

TEST(Sweeps, ReservationLevelsBelowNeedAreInfeasible) {
  Instance inst = load_instance_file(kData + "/medium_transition.json");
  std::vector<SweepRow> rows = reservation_sweep(inst, {0, 3, 100000});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].status, "infeasible");  // on-demand pools are closed
  EXPECT_FALSE(rows[0].note.empty());
  EXPECT_EQ(rows[2].status, "infeasible");  // more than the caps can hold
}

}  // namespace
}  // namespace qkdplan
