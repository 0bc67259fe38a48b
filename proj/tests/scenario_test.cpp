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

#include <map>
#include <vector>

#include "qkdplan/scenario.hpp"

namespace qkdplan {
namespace {

RateSupport two_requests() { return {{0, {Rational(1), Rational(3)}}, {4, {Rational(2)}}}; }

TEST(Scenarios, CartesianProduct) {
  auto w = uniform_weather({Weather::kClear, Weather::kCloudy});
  ScenarioSet s = enumerate_scenarios(two_requests(), w);
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(total_probability(s), Rational(1));
  // first request slowest, weather fastest
  EXPECT_EQ(s[0].rates_kbps.at(0), Rational(1));
  EXPECT_EQ(s[0].weather, Weather::kClear);
  EXPECT_EQ(s[1].weather, Weather::kCloudy);
  EXPECT_EQ(s[2].rates_kbps.at(0), Rational(3));
  for (const Scenario& sc : s.scenarios) {
    EXPECT_EQ(sc.probability, Rational(1, 4));
    EXPECT_EQ(sc.rates_kbps.at(4), Rational(2));
  }
}

TEST(Scenarios, WeightedWeather) {
  std::vector<WeatherOutcome> w = {{Weather::kClear, Rational(2, 3)},
                                   {Weather::kCloudy, Rational(1, 3)}};
  ScenarioSet s = enumerate_scenarios({{0, {Rational(1), Rational(2)}}}, w);
  EXPECT_EQ(s[0].probability, Rational(1, 3));
  EXPECT_EQ(s[1].probability, Rational(1, 6));
  EXPECT_FALSE(satellite_available(s[1]));
  EXPECT_TRUE(satellite_available(s[0]));
}

TEST(Scenarios, LimitAndValidation) {
  auto w = uniform_weather({Weather::kClear, Weather::kCloudy});
  EXPECT_THROW(enumerate_scenarios(two_requests(), w, 3), ValidationError);
  EXPECT_THROW(enumerate_scenarios({}, w), ValidationError);
  EXPECT_THROW(enumerate_scenarios({{0, {}}}, w), ValidationError);
  EXPECT_THROW(enumerate_scenarios(two_requests(), {{Weather::kClear, Rational(1, 2)}}),
               ValidationError);
  EXPECT_THROW(enumerate_scenarios(two_requests(), {{Weather::kClear, Rational(1, 2)},
                                                    {Weather::kClear, Rational(1, 2)}}),
               ValidationError);
  EXPECT_THROW(parse_weather("foggy"), ParseError);
}

TEST(Scenarios, SamplingIsSeededAndNormalized) {
  auto w = uniform_weather({Weather::kClear, Weather::kCloudy});
  ScenarioSet a = sample_scenarios(two_requests(), w, 7, 500);
  ScenarioSet b = sample_scenarios(two_requests(), w, 7, 500);
  ScenarioSet c = sample_scenarios(two_requests(), w, 8, 500);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  EXPECT_EQ(total_probability(a), Rational(1));
  EXPECT_LE(a.size(), 4u);
  for (const Scenario& s : a.scenarios) {
    Rational canon = s.probability;
    canon.canonicalize();
    EXPECT_EQ(canon.get_num(), s.probability.get_num());
  }
  // 500 draws over 4 equally likely outcomes land near 1/4 each.
  for (const Scenario& s : a.scenarios) {
    EXPECT_GT(s.probability, Rational(1, 5));
    EXPECT_LT(s.probability, Rational(3, 10));
  }
}

}  // namespace
}  // namespace qkdplan
