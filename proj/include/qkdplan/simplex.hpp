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

// Exact-rational bounded primal simplex (two phases) on a sparse tableau.
//
// Every column is mapped to internal variables with lower bound 0: shifted by
// its finite lower bound, mirrored at its upper bound when only that one is
// finite, or split in two when free. Fixed columns are substituted out.
// Rows get a slack (inequalities) and an artificial when the slack cannot
// start basic. Pricing is Dantzig's largest reduced cost; after a run of
// degenerate pivots the solver switches to Bland's smallest-index rule until
// the objective moves again, which rules out cycling.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "qkdplan/milp_model.hpp"
#include "qkdplan/rational.hpp"

namespace qkdplan {

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

inline std::string_view lp_status_name(LpStatus s) {
  switch (s) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
  }
  return "?";
}

enum class BasisStatus { kBasic, kAtLower, kAtUpper, kFixed, kFree };

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  std::vector<Rational> values;  // empty unless optimal
  Rational objective;
  std::vector<BasisStatus> basis;        // per column
  std::vector<Rational> duals;           // per row
  std::vector<Rational> reduced_costs;   // per column
  std::size_t iterations = 0;
};

// Column bounds that replace the model's own (branch-and-bound nodes).
struct LpBounds {
  std::vector<std::optional<Rational>> lower;
  std::vector<std::optional<Rational>> upper;

  static LpBounds of(const MilpModel& model) {
    LpBounds b;
    for (const Column& c : model.columns()) {
      b.lower.push_back(c.lower);
      b.upper.push_back(c.upper);
    }
    return b;
  }
};

struct LpOptions {
  // Consecutive degenerate pivots before switching to Bland's rule.
  std::size_t bland_after = 32;
  // Forces Bland's rule from the first pivot.
  bool always_bland = false;
};

namespace detail {

struct TableauEntry {
  std::uint32_t col;
  Rational val;
};
using SparseRow = std::vector<TableauEntry>;

inline const Rational* find_entry(const SparseRow& row, std::uint32_t col) {
  auto it = std::lower_bound(row.begin(), row.end(), col,
                             [](const TableauEntry& e, std::uint32_t c) { return e.col < c; });
  if (it == row.end() || it->col != col) return nullptr;
  return &it->val;
}

// target -= factor * source
inline void axpy_row(SparseRow& target, const Rational& factor, const SparseRow& source) {
  SparseRow out;
  out.reserve(target.size() + source.size());
  std::size_t a = 0;
  std::size_t b = 0;
  Rational tmp;
  while (a < target.size() || b < source.size()) {
    if (b == source.size() || (a < target.size() && target[a].col < source[b].col)) {
      out.push_back(std::move(target[a++]));
    } else if (a == target.size() || source[b].col < target[a].col) {
      tmp = -factor * source[b].val;
      out.push_back({source[b].col, tmp});
      ++b;
    } else {
      tmp = factor * source[b].val;
      target[a].val -= tmp;
      if (target[a].val != 0) out.push_back(std::move(target[a]));
      ++a;
      ++b;
    }
  }
  target = std::move(out);
}

// How an original column maps onto internal variables.
struct ColumnMap {
  enum Kind { kFixedValue, kShift, kMirror, kSplit } kind = kShift;
  Rational offset;       // fixed value, lower bound or upper bound
  std::uint32_t var = 0;   // internal variable (first half of a split)
};

class Tableau {
 public:
  Tableau(const MilpModel& model, const LpBounds& bounds, const LpOptions& options)
      : model_(model), options_(options) {
    const std::size_t n = model.num_columns();
    maps_.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      const auto& lo = bounds.lower[j];
      const auto& up = bounds.upper[j];
      ColumnMap& m = maps_[j];
      if (lo && up && *lo > *up) {
        bound_conflict_ = true;
        return;
      }
      if (lo && up && *lo == *up) {
        m.kind = ColumnMap::kFixedValue;
        m.offset = *lo;
      } else if (lo) {
        m.kind = ColumnMap::kShift;
        m.offset = *lo;
        m.var = new_var(up ? std::optional<Rational>(*up - *lo) : std::nullopt);
      } else if (up) {
        m.kind = ColumnMap::kMirror;
        m.offset = *up;
        m.var = new_var(std::nullopt);
      } else {
        m.kind = ColumnMap::kSplit;
        m.var = new_var(std::nullopt);
        new_var(std::nullopt);
      }
    }
    structural_ = upper_.size();

    // Internal cost of each structural variable.
    cost_.assign(structural_, Rational(0));
    for (std::size_t j = 0; j < n; ++j) {
      const Rational& c = model.column(j).cost;
      if (c == 0) continue;
      switch (maps_[j].kind) {
        case ColumnMap::kFixedValue: break;
        case ColumnMap::kShift: cost_[maps_[j].var] = c; break;
        case ColumnMap::kMirror: cost_[maps_[j].var] = -c; break;
        case ColumnMap::kSplit:
          cost_[maps_[j].var] = c;
          cost_[maps_[j].var + 1] = -c;
          break;
      }
    }

    const std::size_t m = model.num_rows();
    rows_.resize(m);
    rhs_.resize(m);
    sign_.assign(m, 1);
    unit_.resize(m);
    std::vector<std::optional<std::uint32_t>> slack(m);
    for (std::size_t i = 0; i < m; ++i) {
      const Row& row = model.row(i);
      Rational b = row.rhs;
      SparseRow& r = rows_[i];
      for (const Term& t : row.terms) {
        const ColumnMap& cm = maps_[t.column];
        switch (cm.kind) {
          case ColumnMap::kFixedValue: b -= t.coef * cm.offset; break;
          case ColumnMap::kShift:
            b -= t.coef * cm.offset;
            r.push_back({cm.var, t.coef});
            break;
          case ColumnMap::kMirror:
            b -= t.coef * cm.offset;
            r.push_back({cm.var, -t.coef});
            break;
          case ColumnMap::kSplit:
            r.push_back({cm.var, t.coef});
            r.push_back({cm.var + 1, -t.coef});
            break;
        }
      }
      std::sort(r.begin(), r.end(),
                [](const TableauEntry& x, const TableauEntry& y) { return x.col < y.col; });
      rhs_[i] = b;
    }
    // Slacks after all structural variables, then artificials, so that
    // every tableau row stays sorted by column.
    std::vector<Rational> slack_coef(m, Rational(0));
    for (std::size_t i = 0; i < m; ++i) {
      Sense s = model.row(i).sense;
      if (s == Sense::kEqual) continue;
      slack[i] = new_var(std::nullopt);
      slack_coef[i] = s == Sense::kLessEqual ? 1 : -1;
    }
    for (std::size_t i = 0; i < m; ++i) {
      if (slack[i]) rows_[i].push_back({*slack[i], slack_coef[i]});
      if (rhs_[i] < 0) {
        sign_[i] = -1;
        rhs_[i] = -rhs_[i];
        for (TableauEntry& e : rows_[i]) e.val = -e.val;
        if (slack[i]) slack_coef[i] = -slack_coef[i];
      }
    }
    first_artificial_ = upper_.size();
    basis_.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      if (slack[i] && slack_coef[i] == 1) {
        basis_[i] = *slack[i];
        unit_[i] = *slack[i];
      } else {
        std::uint32_t a = new_var(std::nullopt);
        rows_[i].push_back({a, Rational(1)});
        basis_[i] = a;
        unit_[i] = a;
      }
    }
    cost_.resize(upper_.size(), Rational(0));
    value_.assign(upper_.size(), Rational(0));
    at_upper_.assign(upper_.size(), false);
    position_.assign(upper_.size(), -1);
    for (std::size_t i = 0; i < m; ++i) {
      value_[basis_[i]] = rhs_[i];
      position_[basis_[i]] = static_cast<std::int64_t>(i);
    }
  }

  LpSolution solve() {
    LpSolution out;
    if (bound_conflict_) return out;

    if (first_artificial_ < upper_.size()) {
      std::vector<Rational> phase_one(upper_.size(), Rational(0));
      for (std::size_t k = first_artificial_; k < upper_.size(); ++k) phase_one[k] = 1;
      price(phase_one);
      iterate();  // phase one is bounded below by 0
      Rational infeasibility = 0;
      for (std::size_t k = first_artificial_; k < upper_.size(); ++k) infeasibility += value_[k];
      out.iterations = iterations_;
      if (infeasibility != 0) return out;
      for (std::size_t k = first_artificial_; k < upper_.size(); ++k) upper_[k] = Rational(0);
    }
    price(cost_);
    if (!iterate()) {
      out.status = LpStatus::kUnbounded;
      out.iterations = iterations_;
      return out;
    }
    out.status = LpStatus::kOptimal;
    out.iterations = iterations_;
    recover(out);
    return out;
  }

 private:
  std::uint32_t new_var(std::optional<Rational> upper) {
    upper_.push_back(std::move(upper));
    return static_cast<std::uint32_t>(upper_.size() - 1);
  }

  // d = c - c_B * T
  void price(const std::vector<Rational>& c) {
    objective_ = c;
    d_ = c;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const Rational& cb = c[basis_[i]];
      if (cb == 0) continue;
      for (const TableauEntry& e : rows_[i]) d_[e.col] -= cb * e.val;
    }
  }

  bool can_move(std::size_t k) const {
    return !(upper_[k] && *upper_[k] == 0);
  }

  // Returns false when the objective is unbounded below.
  bool iterate() {
    std::size_t degenerate_run = 0;
    const std::size_t m = rows_.size();
    std::vector<Rational> column(m);
    std::vector<bool> in_column(m);
    Rational ratio;
    while (true) {
      const bool bland = options_.always_bland || degenerate_run >= options_.bland_after;
      // Entering variable.
      std::int64_t enter = -1;
      Rational best = 0;
      for (std::size_t k = 0; k < d_.size(); ++k) {
        if (position_[k] >= 0 || d_[k] == 0 || !can_move(k)) continue;
        bool improving = at_upper_[k] ? d_[k] > 0 : d_[k] < 0;
        if (!improving) continue;
        if (bland) {
          enter = static_cast<std::int64_t>(k);
          break;
        }
        Rational mag = abs(d_[k]);
        if (enter < 0 || mag > best) {
          enter = static_cast<std::int64_t>(k);
          best = mag;
        }
      }
      if (enter < 0) return true;
      const std::uint32_t k = static_cast<std::uint32_t>(enter);
      const int dir = at_upper_[k] ? -1 : 1;

      // Ratio test; ties go to the smallest variable index.
      std::optional<Rational> theta;
      std::int64_t leave_row = -1;  // -1 with theta set means a bound flip
      std::size_t leave_var = 0;
      if (upper_[k]) {
        theta = *upper_[k];
        leave_var = k;
      }
      for (std::size_t i = 0; i < m; ++i) {
        const Rational* t = find_entry(rows_[i], k);
        in_column[i] = t != nullptr;
        if (!t) continue;
        column[i] = *t;
        const std::uint32_t b = basis_[i];
        const bool decreasing = (sgn(*t) * dir) > 0;
        if (decreasing) {
          ratio = value_[b] / abs(*t);
        } else if (upper_[b]) {
          ratio = (*upper_[b] - value_[b]) / abs(*t);
        } else {
          continue;
        }
        if (!theta || ratio < *theta || (ratio == *theta && b < leave_var)) {
          theta = ratio;
          leave_row = static_cast<std::int64_t>(i);
          leave_var = b;
        }
      }
      if (!theta) return false;
      ++iterations_;
      degenerate_run = *theta == 0 ? degenerate_run + 1 : 0;

      if (*theta != 0) {
        Rational step = dir > 0 ? *theta : Rational(-*theta);
        value_[k] += step;
        for (std::size_t i = 0; i < m; ++i) {
          if (in_column[i]) value_[basis_[i]] -= column[i] * step;
        }
      }
      if (leave_row < 0) {
        at_upper_[k] = !at_upper_[k];
        value_[k] = at_upper_[k] ? *upper_[k] : Rational(0);
        continue;
      }
      const std::size_t r = static_cast<std::size_t>(leave_row);
      const std::uint32_t out_var = basis_[r];
      const bool decreasing = (sgn(column[r]) * dir) > 0;
      at_upper_[out_var] = !decreasing;
      value_[out_var] = decreasing ? Rational(0) : *upper_[out_var];
      position_[out_var] = -1;
      basis_[r] = k;
      position_[k] = static_cast<std::int64_t>(r);
      at_upper_[k] = false;
      pivot(r, k, column, in_column);
    }
  }

  void pivot(std::size_t r, std::uint32_t k, const std::vector<Rational>& column,
             const std::vector<bool>& in_column) {
    const Rational inv = 1 / column[r];
    for (TableauEntry& e : rows_[r]) e.val *= inv;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (i == r || !in_column[i]) continue;
      axpy_row(rows_[i], column[i], rows_[r]);
    }
    if (d_[k] != 0) {
      const Rational f = d_[k];
      for (const TableauEntry& e : rows_[r]) d_[e.col] -= f * e.val;
    }
  }

  void recover(LpSolution& out) const {
    const std::size_t n = model_.num_columns();
    out.values.assign(n, Rational(0));
    out.basis.assign(n, BasisStatus::kAtLower);
    for (std::size_t j = 0; j < n; ++j) {
      const ColumnMap& cm = maps_[j];
      switch (cm.kind) {
        case ColumnMap::kFixedValue:
          out.values[j] = cm.offset;
          out.basis[j] = BasisStatus::kFixed;
          break;
        case ColumnMap::kShift:
          out.values[j] = cm.offset + value_[cm.var];
          out.basis[j] = position_[cm.var] >= 0 ? BasisStatus::kBasic
                         : at_upper_[cm.var]    ? BasisStatus::kAtUpper
                                                : BasisStatus::kAtLower;
          break;
        case ColumnMap::kMirror:
          out.values[j] = cm.offset - value_[cm.var];
          out.basis[j] = position_[cm.var] >= 0 ? BasisStatus::kBasic : BasisStatus::kAtUpper;
          break;
        case ColumnMap::kSplit:
          out.values[j] = value_[cm.var] - value_[cm.var + 1];
          out.basis[j] = (position_[cm.var] >= 0 || position_[cm.var + 1] >= 0)
                             ? BasisStatus::kBasic
                             : BasisStatus::kFree;
          break;
      }
    }
    out.objective = model_.objective_value(out.values);

    // Row duals from the reduced costs of the initial identity columns.
    const std::size_t m = model_.num_rows();
    out.duals.assign(m, Rational(0));
    for (std::size_t i = 0; i < m; ++i) {
      out.duals[i] = -d_[unit_[i]];
      if (sign_[i] < 0) out.duals[i] = -out.duals[i];
    }
    out.reduced_costs.resize(n);
    for (std::size_t j = 0; j < n; ++j) out.reduced_costs[j] = model_.column(j).cost;
    for (std::size_t i = 0; i < m; ++i) {
      if (out.duals[i] == 0) continue;
      for (const Term& t : model_.row(i).terms) {
        out.reduced_costs[t.column] -= out.duals[i] * t.coef;
      }
    }
  }

  const MilpModel& model_;
  LpOptions options_;
  bool bound_conflict_ = false;
  std::vector<ColumnMap> maps_;
  std::size_t structural_ = 0;
  std::size_t first_artificial_ = 0;

  std::vector<std::optional<Rational>> upper_;
  std::vector<Rational> cost_;
  std::vector<SparseRow> rows_;
  std::vector<Rational> rhs_;
  std::vector<int> sign_;
  std::vector<std::uint32_t> unit_;
  std::vector<std::uint32_t> basis_;
  std::vector<std::int64_t> position_;
  std::vector<Rational> value_;
  std::vector<bool> at_upper_;
  std::vector<Rational> objective_;
  std::vector<Rational> d_;
  std::size_t iterations_ = 0;
};

}  // namespace detail

// Solves the LP relaxation of `model` (integrality ignored) under `bounds`.
inline LpSolution solve_lp(const MilpModel& model, const LpBounds& bounds,
                           const LpOptions& options = {}) {
  if (bounds.lower.size() != model.num_columns() || bounds.upper.size() != model.num_columns()) {
    throw ValidationError("bound vectors do not match the model's columns");
  }
  detail::Tableau tableau(model, bounds, options);
  return tableau.solve();
}

inline LpSolution solve_lp(const MilpModel& model, const LpOptions& options = {}) {
  return solve_lp(model, LpBounds::of(model), options);
}

}  // namespace qkdplan
