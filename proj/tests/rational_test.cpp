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

#include "qkdplan/rational.hpp"

namespace qkdplan {
namespace {

TEST(ParseRational, Decimals) {
  EXPECT_EQ(parse_rational("0.75"), Rational(3, 4));
  EXPECT_EQ(parse_rational("1.2"), Rational(6, 5));
  EXPECT_EQ(parse_rational("-0.05"), Rational(-1, 20));
  EXPECT_EQ(parse_rational("2.5e3"), Rational(2500));
  EXPECT_EQ(parse_rational("15e-1"), Rational(3, 2));
  EXPECT_EQ(parse_rational("+7"), Rational(7));
}

// Leading zeros must not switch GMP into octal.
TEST(ParseRational, LeadingZerosStayDecimal) {
  EXPECT_EQ(parse_rational("075"), Rational(75));
  EXPECT_EQ(parse_rational("0.09"), Rational(9, 100));
  EXPECT_EQ(parse_rational("010/08"), Rational(5, 4));
}

TEST(ParseRational, Fractions) {
  EXPECT_EQ(parse_rational("6/4"), Rational(3, 2));
  EXPECT_EQ(parse_rational("-46000/3"), Rational(-46000, 3));
}

TEST(ParseRational, Rejects) {
  for (const char* bad : {"", "-", "1/0", "1/-2", "1.2.3", "abc", "1e", " 1", "1/ 2", "0x10"}) {
    EXPECT_THROW(parse_rational(bad), ParseError) << bad;
  }
}

TEST(FormatRational, TerminatingAndNot) {
  EXPECT_EQ(format_rational(Rational(3, 4)), "0.75");
  EXPECT_EQ(format_rational(Rational(-1, 20)), "-0.05");
  EXPECT_EQ(format_rational(Rational(1750)), "1750");
  EXPECT_EQ(format_rational(Rational(1, 3)), "1/3");
  EXPECT_EQ(format_rational(Rational(-7, 6)), "-7/6");
}

TEST(FormatRational, RoundTrips) {
  for (int p = -40; p <= 40; ++p) {
    for (int q = 1; q <= 40; ++q) {
      Rational v(p, q);
      v.canonicalize();
      EXPECT_EQ(parse_rational(format_rational(v)), v);
    }
  }
}

TEST(RationalHelpers, FloorCeil) {
  EXPECT_EQ(floor_of(Rational(-7, 2)), -4);
  EXPECT_EQ(ceil_of(Rational(-7, 2)), -3);
  EXPECT_EQ(ceil_of(Rational(5)), 5);
  EXPECT_TRUE(is_integral(Rational(4, 2)));
  EXPECT_THROW(to_int64(Integer("100000000000000000000", 10)), Error);
}

}  // namespace
}  // namespace qkdplan
