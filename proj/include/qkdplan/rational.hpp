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

#pragma once

#include <gmpxx.h>

#include <cctype>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace qkdplan {

using Integer = mpz_class;

// mpq_class whose (numerator, denominator) constructor always canonicalizes;
// the plain gmpxx one leaves 4/2 as is, which breaks equality tests.
class Rational : public mpq_class {
 public:
  using mpq_class::mpq_class;
  Rational() = default;
  Rational(const mpq_class& v) : mpq_class(v) {}
  Rational(mpq_class&& v) noexcept : mpq_class(std::move(v)) {}
  Rational(const mpz_class& num, const mpz_class& den) : mpq_class(num, den) {
    if (den == 0) throw std::domain_error("rational with zero denominator");
    canonicalize();
  }
};

// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed text (documents, numbers, LP files).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that violates a model invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

inline Integer floor_of(const Rational& value) {
  Integer result;
  mpz_fdiv_q(result.get_mpz_t(), value.get_num_mpz_t(), value.get_den_mpz_t());
  return result;
}

inline Integer ceil_of(const Rational& value) {
  Integer result;
  mpz_cdiv_q(result.get_mpz_t(), value.get_num_mpz_t(), value.get_den_mpz_t());
  return result;
}

inline bool is_integral(const Rational& value) { return value.get_den() == 1; }

inline std::int64_t to_int64(const Integer& value) {
  if (!value.fits_slong_p()) {
    throw Error("integer value out of 64-bit range: " + value.get_str());
  }
  return static_cast<std::int64_t>(value.get_si());
}

// Accepts "12", "-3", "1.25", "2.5e3", "6/5". Whitespace is not allowed.
inline Rational parse_rational(std::string_view text) {
  auto fail = [&]() -> ParseError {
    return ParseError("not a rational number: '" + std::string(text) + "'");
  };
  if (text.empty()) throw fail();

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    std::string num(text.substr(0, slash));
    std::string den(text.substr(slash + 1));
    auto digits_ok = [](const std::string& s, bool allow_sign) {
      std::size_t start = (allow_sign && !s.empty() && (s[0] == '-' || s[0] == '+')) ? 1 : 0;
      if (start >= s.size()) return false;
      for (std::size_t i = start; i < s.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
      }
      return true;
    };
    if (!digits_ok(num, true) || !digits_ok(den, false)) throw fail();
    if (num[0] == '+') num.erase(0, 1);
    Integer d(den, 10);
    if (d == 0) throw ParseError("zero denominator in '" + std::string(text) + "'");
    Rational result(Integer(num, 10), d);
    result.canonicalize();
    return result;
  }

  std::size_t pos = 0;
  bool negative = false;
  if (text[pos] == '+' || text[pos] == '-') {
    negative = text[pos] == '-';
    ++pos;
  }
  std::string mantissa;
  long scale = 0;
  bool seen_digit = false;
  bool seen_point = false;
  for (; pos < text.size(); ++pos) {
    char c = text[pos];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      mantissa.push_back(c);
      seen_digit = true;
      if (seen_point) --scale;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!seen_digit) throw fail();
  if (pos < text.size()) {
    if (text[pos] != 'e' && text[pos] != 'E') throw fail();
    ++pos;
    bool exp_negative = false;
    if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
      exp_negative = text[pos] == '-';
      ++pos;
    }
    if (pos >= text.size()) throw fail();
    long exponent = 0;
    for (; pos < text.size(); ++pos) {
      if (!std::isdigit(static_cast<unsigned char>(text[pos]))) throw fail();
      if (exponent > 100000) throw fail();
      exponent = exponent * 10 + (text[pos] - '0');
    }
    scale += exp_negative ? -exponent : exponent;
  }

  Integer num(mantissa, 10);
  Integer power;
  mpz_ui_pow_ui(power.get_mpz_t(), 10, static_cast<unsigned long>(scale < 0 ? -scale : scale));
  Rational result = scale >= 0 ? Rational(num * power) : Rational(num, power);
  result.canonicalize();
  if (negative) result = -result;
  return result;
}

// Decimal text when the expansion terminates (denominator of the form 2^a 5^b),
// "p/q" otherwise. parse_rational(format_rational(x)) == x.
inline std::string format_rational(const Rational& value) {
  if (value.get_den() == 1) return value.get_num().get_str();
  Integer den = value.get_den();
  unsigned long twos = 0;
  unsigned long fives = 0;
  while (mpz_divisible_ui_p(den.get_mpz_t(), 2)) {
    den /= 2;
    ++twos;
  }
  while (mpz_divisible_ui_p(den.get_mpz_t(), 5)) {
    den /= 5;
    ++fives;
  }
  if (den != 1) return value.get_str();

  unsigned long digits = twos > fives ? twos : fives;
  Integer power;
  mpz_ui_pow_ui(power.get_mpz_t(), 10, digits);
  Integer scaled_num = value.get_num() * power / value.get_den();
  bool negative = scaled_num < 0;
  if (negative) scaled_num = -scaled_num;
  std::string s = scaled_num.get_str();
  if (s.size() <= digits) s.insert(0, digits - s.size() + 1, '0');
  s.insert(s.size() - digits, ".");
  return negative ? "-" + s : s;
}

inline double to_double(const Rational& value) { return value.get_d(); }

}  // namespace qkdplan
