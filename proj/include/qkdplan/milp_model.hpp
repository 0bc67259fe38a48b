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

// Generic minimization MILP: columns with optional bounds, integrality and an
// objective coefficient; rows as sparse linear forms with a sense and a
// right-hand side. Everything is an exact rational.

#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qkdplan/rational.hpp"

namespace qkdplan {

enum class VarType { kContinuous, kInteger, kBinary };
enum class Sense { kLessEqual, kGreaterEqual, kEqual };

inline std::string_view sense_symbol(Sense s) {
  switch (s) {
    case Sense::kLessEqual: return "<=";
    case Sense::kGreaterEqual: return ">=";
    case Sense::kEqual: return "=";
  }
  return "?";
}

struct Column {
  std::string name;
  std::optional<Rational> lower = Rational(0);  // nullopt = -infinity
  std::optional<Rational> upper;                // nullopt = +infinity
  VarType type = VarType::kContinuous;
  Rational cost;

  bool is_integral() const { return type != VarType::kContinuous; }
  friend bool operator==(const Column&, const Column&) = default;
};

struct Term {
  std::size_t column = 0;
  Rational coef;
  friend bool operator==(const Term&, const Term&) = default;
};

struct Row {
  std::string name;
  std::vector<Term> terms;
  Sense sense = Sense::kLessEqual;
  Rational rhs;
  friend bool operator==(const Row&, const Row&) = default;
};

class MilpModel {
 public:
  // Binary columns always carry bounds [0, 1].
  std::size_t add_column(Column column) {
    if (column.name.empty()) throw ValidationError("column name must not be empty");
    if (column.type == VarType::kBinary) {
      column.lower = Rational(0);
      column.upper = Rational(1);
    }
    if (column.lower && column.upper && *column.lower > *column.upper) {
      throw ValidationError("column " + column.name + " has lower bound above upper bound");
    }
    if (!by_name_.emplace(column.name, columns_.size()).second) {
      throw ValidationError("duplicate column name " + column.name);
    }
    columns_.push_back(std::move(column));
    return columns_.size() - 1;
  }

  // Terms on the same column are merged and zero coefficients dropped; the
  // stored terms are sorted by column index.
  std::size_t add_row(Row row) {
    std::map<std::size_t, Rational> merged;
    for (Term& t : row.terms) {
      if (t.column >= columns_.size()) {
        throw ValidationError("row " + row.name + " references unknown column " +
                              std::to_string(t.column));
      }
      merged[t.column] += t.coef;
    }
    row.terms.clear();
    for (auto& [c, v] : merged) {
      if (v != 0) row.terms.push_back({c, std::move(v)});
    }
    rows_.push_back(std::move(row));
    return rows_.size() - 1;
  }

  const std::vector<Column>& columns() const { return columns_; }
  const std::vector<Row>& rows() const { return rows_; }
  const Column& column(std::size_t j) const { return columns_.at(j); }
  const Row& row(std::size_t i) const { return rows_.at(i); }
  std::size_t num_columns() const { return columns_.size(); }
  std::size_t num_rows() const { return rows_.size(); }

  void set_bounds(std::size_t j, std::optional<Rational> lower, std::optional<Rational> upper) {
    Column& c = columns_.at(j);
    if (lower && upper && *lower > *upper) {
      throw ValidationError("column " + c.name + " has lower bound above upper bound");
    }
    c.lower = std::move(lower);
    c.upper = std::move(upper);
  }

  void set_cost(std::size_t j, Rational cost) { columns_.at(j).cost = std::move(cost); }

  std::optional<std::size_t> find_column(std::string_view name) const {
    auto it = by_name_.find(std::string(name));
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t column_index(std::string_view name) const {
    auto j = find_column(name);
    if (!j) throw ValidationError("no column named " + std::string(name));
    return *j;
  }

  Rational objective_value(const std::vector<Rational>& values) const {
    check_size(values);
    Rational total = 0;
    for (std::size_t j = 0; j < columns_.size(); ++j) {
      if (columns_[j].cost != 0) total += columns_[j].cost * values[j];
    }
    return total;
  }

  Rational activity(std::size_t i, const std::vector<Rational>& values) const {
    check_size(values);
    Rational a = 0;
    for (const Term& t : rows_.at(i).terms) a += t.coef * values[t.column];
    return a;
  }

  // Amount by which row i is violated (0 when satisfied).
  Rational row_violation(std::size_t i, const std::vector<Rational>& values) const {
    const Row& r = rows_.at(i);
    Rational a = activity(i, values);
    switch (r.sense) {
      case Sense::kLessEqual: return a > r.rhs ? Rational(a - r.rhs) : Rational(0);
      case Sense::kGreaterEqual: return a < r.rhs ? Rational(r.rhs - a) : Rational(0);
      case Sense::kEqual: return a > r.rhs ? Rational(a - r.rhs) : Rational(r.rhs - a);
    }
    return 0;
  }

  // First violated row, bound or integrality condition, or nullopt.
  std::optional<std::string> first_violation(const std::vector<Rational>& values,
                                             bool check_integrality = true) const {
    check_size(values);
    for (std::size_t j = 0; j < columns_.size(); ++j) {
      const Column& c = columns_[j];
      if (c.lower && values[j] < *c.lower) return "column " + c.name + " below its lower bound";
      if (c.upper && values[j] > *c.upper) return "column " + c.name + " above its upper bound";
      if (check_integrality && c.is_integral() && !is_integral(values[j])) {
        return "column " + c.name + " is fractional";
      }
    }
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      Rational v = row_violation(i, values);
      if (v != 0) return "row " + rows_[i].name + " violated by " + format_rational(v);
    }
    return std::nullopt;
  }

  bool is_feasible(const std::vector<Rational>& values, bool check_integrality = true) const {
    return !first_violation(values, check_integrality).has_value();
  }

  bool has_integer_columns() const {
    return std::any_of(columns_.begin(), columns_.end(),
                       [](const Column& c) { return c.is_integral(); });
  }

  friend bool operator==(const MilpModel& a, const MilpModel& b) {
    return a.columns_ == b.columns_ && a.rows_ == b.rows_;
  }

 private:
  void check_size(const std::vector<Rational>& values) const {
    if (values.size() != columns_.size()) {
      throw ValidationError("assignment has " + std::to_string(values.size()) +
                            " values for " + std::to_string(columns_.size()) + " columns");
    }
  }

  std::vector<Column> columns_;
  std::vector<Row> rows_;
  std::map<std::string, std::size_t> by_name_;
};

}  // namespace qkdplan
