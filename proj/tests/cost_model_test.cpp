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

#include "qkdplan/cost_model.hpp"
#include "qkdplan/topology.hpp"

namespace qkdplan {
namespace {

const MediumParams kFiber{Rational(160), Rational(1)};

TEST(ComponentCounts, SingleSpan) {
  ComponentCounts c = component_counts_link(1, Rational(160), kFiber);
  EXPECT_EQ(c, (ComponentCounts{2, 1, 2, 0, 1}));
  EXPECT_EQ(channel_cost_link(1, Rational(160)), Rational(640));
}

TEST(ComponentCounts, TwoSpansTwoParallel) {
  ComponentCounts c = component_counts_link(2, Rational(320), kFiber);
  EXPECT_EQ(c, (ComponentCounts{8, 4, 3, 1, 3}));
}

// A span that is only partly used still needs its devices.
TEST(ComponentCounts, PartialSpanRoundsUp) {
  EXPECT_EQ(span_count(Rational(161), Rational(160)), 2);
  EXPECT_EQ(span_count(Rational(1, 2), Rational(1)), 1);
  EXPECT_EQ(component_counts_link(3, Rational(161), kFiber), (ComponentCounts{12, 6, 3, 1, 3}));
}

TEST(ComponentCounts, ParallelLinks) {
  EXPECT_EQ(parallel_links(Rational(5), kFiber), 5);
  EXPECT_EQ(parallel_links(Rational(0), kFiber), 0);
  EXPECT_EQ(parallel_links(Rational(5, 2), MediumParams{Rational(160), Rational(2)}), 2);
  EXPECT_THROW(parallel_links(Rational(1), MediumParams{Rational(160), Rational(0)}),
               ValidationError);
}

TEST(ComponentCounts, RouteSumsLinks) {
  MediaParams media;
  std::vector<Link> route = {{1, 2, Medium::kFiber, Rational(160), {}},
                             {2, 3, Medium::kUav, Rational(3), {}}};
  ComponentCounts c = component_counts_route(1, route, media);
  // fiber: 1 span; UAV with 1 km spans: 3 spans.
  EXPECT_EQ(c, (ComponentCounts{2 + 6, 1 + 3, 2 + 4, 0 + 2, 1 + 5}));
  EXPECT_EQ(channel_cost_route(1, route), Rational(640 + 12));
  route.push_back(route[0]);
  EXPECT_THROW(component_counts_route(1, route, media), ValidationError);
}

TEST(UnitCosts, FiberReservationSingleSpan) {
  CostTable t = CostTable::table_one();
  PhaseUnitCosts u = phase_unit_costs(kFiber, t, Medium::kFiber, Rational(160));
  EXPECT_EQ(u.tau, Rational(1750));
  EXPECT_EQ(u.lambda, Rational(2700));
  EXPECT_EQ(u.psi, 2 * u.tau);
  EXPECT_EQ(u.xi, 2 * u.lambda);
  EXPECT_EQ(u.phi, u.tau);
  EXPECT_EQ(u.delta, u.lambda);
  EXPECT_EQ(u.ch_o, 2 * u.ch_r);
}

TEST(UnitCosts, SatelliteIsPricedPerOwnSpan) {
  CostTable t = CostTable::table_one();
  MediumParams sat{Rational(1000), Rational(1)};
  PhaseUnitCosts u = phase_unit_costs(sat, t, Medium::kSatellite, Rational(600));
  EXPECT_EQ(u.tau, Rational(2 * 12000 + 22000, 3));
  EXPECT_EQ(u.lambda, Rational(2 * 10000 + 1000));
}

TEST(CostTable, JsonRoundTripAndOverrides) {
  CostTable t = CostTable::table_one();
  EXPECT_EQ(cost_table_from_json(cost_table_to_json(t), CostTable()), t);
  CostTable u = load_cost_table(R"({"uav": {"utilization": {"tx": 0, "ch": "1/3"}}})");
  EXPECT_EQ(u.at(Medium::kUav, Phase::kUtilization).tx, Rational(0));
  EXPECT_EQ(u.at(Medium::kUav, Phase::kUtilization).ch, Rational(1, 3));
  EXPECT_EQ(u.at(Medium::kUav, Phase::kUtilization).rx, Rational(4500));
  EXPECT_THROW(load_cost_table(R"({"uav": {"someday": {}}})"), ParseError);
  EXPECT_THROW(load_cost_table(R"({"uav": {"reservation": {"laser": 1}}})"), ParseError);
  EXPECT_THROW(load_cost_table(R"({"uav": {"reservation": {"tx": -1}}})"), ValidationError);
}

}  // namespace
}  // namespace qkdplan
