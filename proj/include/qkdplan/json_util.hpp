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

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <string_view>

#include "qkdplan/rational.hpp"

namespace qkdplan::json_util {

using Json = nlohmann::json;

// Parses a document and reports syntax errors with a 1-based line number.
inline Json parse_document(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    std::size_t line = 1;
    std::size_t limit = e.byte > 0 ? e.byte - 1 : 0;
    for (std::size_t i = 0; i < limit && i < text.size(); ++i) {
      if (text[i] == '\n') ++line;
    }
    throw ParseError("line " + std::to_string(line) + ": " + e.what());
  }
}

inline const Json& require(const Json& object, const char* key, const std::string& path) {
  if (!object.is_object()) throw ParseError(path + ": expected an object");
  auto it = object.find(key);
  if (it == object.end()) throw ParseError(path + "." + key + ": missing field");
  return *it;
}

inline const Json& require_array(const Json& object, const char* key, const std::string& path) {
  const Json& value = require(object, key, path);
  if (!value.is_array()) throw ParseError(path + "." + key + ": expected an array");
  return value;
}

// Numbers may be JSON integers, JSON floats (read through their shortest
// decimal text, so 1.2 is exactly 6/5) or strings such as "46000/3".
inline Rational to_rational(const Json& value, const std::string& path) {
  try {
    if (value.is_number_integer()) return Rational(Integer(value.dump(), 10));
    if (value.is_number_float()) return parse_rational(value.dump());
    if (value.is_string()) return parse_rational(value.get<std::string>());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
  throw ParseError(path + ": expected a number");
}

inline std::int64_t to_int(const Json& value, const std::string& path) {
  if (!value.is_number_integer()) throw ParseError(path + ": expected an integer");
  return value.get<std::int64_t>();
}

inline std::string to_string(const Json& value, const std::string& path) {
  if (!value.is_string()) throw ParseError(path + ": expected a string");
  return value.get<std::string>();
}

// Integers are written as JSON integers; everything else as an exact string.
inline Json from_rational(const Rational& value) {
  if (is_integral(value) && value.get_num().fits_slong_p()) {
    return Json(static_cast<std::int64_t>(value.get_num().get_si()));
  }
  return Json(format_rational(value));
}

}  // namespace qkdplan::json_util
