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

// Brute-force oracle for small pure-integer models. It shares no code with
// the simplex: assignments are enumerated depth first in column order, with
// three exact reductions that never skip an improving assignment:
//   - interval propagation of every row over the integer domains,
//   - cost bound (sum of the cheapest end of each domain) against the best
//     assignment found so far,
//   - splitting into independent sub-searches once the still-open columns
//     fall apart into groups that share no row.

#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "qkdplan/branch_and_bound.hpp"
#include "qkdplan/milp_model.hpp"
#include "qkdplan/rational.hpp"

namespace qkdplan {

struct ExhaustiveParams {
  // Refuse models whose raw assignment space, the product of (ub - lb + 1)
  // over all columns, exceeds this. nullopt disables the check.
  std::optional<Integer> max_product = Integer(10000000);
};

// Size of the raw assignment space of an all-integer, fully bounded model.
inline Integer assignment_space(const MilpModel& model) {
  Integer product = 1;
  for (const Column& c : model.columns()) {
    if (!c.is_integral()) throw ValidationError("column " + c.name + " is not integer");
    if (!c.lower || !c.upper) throw ValidationError("column " + c.name + " is unbounded");
    Integer lo = ceil_of(*c.lower);
    Integer hi = floor_of(*c.upper);
    if (hi < lo) return 0;
    product *= hi - lo + 1;
  }
  return product;
}

namespace detail {

class Enumerator {
 public:
  explicit Enumerator(const MilpModel& model) : model_(model) {
    const std::size_t n = model.num_columns();
    rows_of_.resize(n);
    for (std::size_t i = 0; i < model.num_rows(); ++i) {
      for (const Term& t : model.row(i).terms) rows_of_[t.column].push_back(i);
    }
    lo_.resize(n);
    hi_.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      lo_[j] = to_int64(ceil_of(*model.column(j).lower));
      hi_[j] = to_int64(floor_of(*model.column(j).upper));
    }
    stamp_.assign(model.num_rows(), 0);
  }

  struct Best {
    Rational cost;
    std::vector<std::int64_t> values;  // full vector; only the searched columns matter
  };

  std::optional<Best> run() {
    for (std::size_t j = 0; j < lo_.size(); ++j) {
      if (lo_[j] > hi_[j]) return std::nullopt;
    }
    for (const Row& r : model_.rows()) {
      if (r.terms.empty() && !satisfied(Rational(0), r)) return std::nullopt;
    }
    std::vector<std::size_t> all(lo_.size());
    std::iota(all.begin(), all.end(), 0);
    Domains d{lo_, hi_};
    return search(d, all, std::nullopt);
  }

  std::uint64_t nodes() const { return nodes_; }

 private:
  struct Domains {
    std::vector<std::int64_t> lo;
    std::vector<std::int64_t> hi;
  };

  static bool satisfied(const Rational& a, const Row& r) {
    switch (r.sense) {
      case Sense::kLessEqual: return a <= r.rhs;
      case Sense::kGreaterEqual: return a >= r.rhs;
      case Sense::kEqual: return a == r.rhs;
    }
    return false;
  }

  std::vector<std::size_t> rows_touching(const std::vector<std::size_t>& vars) {
    ++epoch_;
    std::vector<std::size_t> out;
    for (std::size_t j : vars) {
      for (std::size_t i : rows_of_[j]) {
        if (stamp_[i] != epoch_) {
          stamp_[i] = epoch_;
          out.push_back(i);
        }
      }
    }
    return out;
  }

  // Tightens domains until no row changes them. False on a wipe-out.
  bool propagate(Domains& d, const std::vector<std::size_t>& scope) {
    std::deque<std::size_t> queue(scope.begin(), scope.end());
    std::vector<char> queued(model_.num_rows(), 0);
    for (std::size_t i : scope) queued[i] = 1;
    Rational min_act, max_act, rest, bound;
    while (!queue.empty()) {
      const std::size_t i = queue.front();
      queue.pop_front();
      queued[i] = 0;
      const Row& r = model_.row(i);
      min_act = 0;
      max_act = 0;
      for (const Term& t : r.terms) {
        if (t.coef > 0) {
          min_act += t.coef * d.lo[t.column];
          max_act += t.coef * d.hi[t.column];
        } else {
          min_act += t.coef * d.hi[t.column];
          max_act += t.coef * d.lo[t.column];
        }
      }
      const bool le = r.sense != Sense::kGreaterEqual;
      const bool ge = r.sense != Sense::kLessEqual;
      if (le && min_act > r.rhs) return false;
      if (ge && max_act < r.rhs) return false;
      bool changed_any = false;
      for (const Term& t : r.terms) {
        const std::size_t j = t.column;
        if (d.lo[j] == d.hi[j]) continue;
        std::int64_t new_lo = d.lo[j];
        std::int64_t new_hi = d.hi[j];
        if (le) {
          // a x_j <= rhs - (min_act - own minimum)
          rest = r.rhs - min_act + (t.coef > 0 ? t.coef * d.lo[j] : t.coef * d.hi[j]);
          bound = rest / t.coef;
          if (t.coef > 0) {
            new_hi = std::min(new_hi, to_int64(floor_of(bound)));
          } else {
            new_lo = std::max(new_lo, to_int64(ceil_of(bound)));
          }
        }
        if (ge) {
          rest = r.rhs - max_act + (t.coef > 0 ? t.coef * d.hi[j] : t.coef * d.lo[j]);
          bound = rest / t.coef;
          if (t.coef > 0) {
            new_lo = std::max(new_lo, to_int64(ceil_of(bound)));
          } else {
            new_hi = std::min(new_hi, to_int64(floor_of(bound)));
          }
        }
        if (new_lo > new_hi) return false;
        if (new_lo != d.lo[j] || new_hi != d.hi[j]) {
          d.lo[j] = new_lo;
          d.hi[j] = new_hi;
          changed_any = true;
          for (std::size_t k : rows_of_[j]) {
            if (k != i && !queued[k]) {
              queued[k] = 1;
              queue.push_back(k);
            }
          }
        }
      }
      if (changed_any && !queued[i]) {
        queued[i] = 1;
        queue.push_back(i);
      }
    }
    return true;
  }

  Rational cost_floor(const Domains& d, const std::vector<std::size_t>& vars) const {
    Rational lb = 0;
    for (std::size_t j : vars) {
      const Rational& c = model_.column(j).cost;
      if (c > 0) {
        lb += c * d.lo[j];
      } else if (c < 0) {
        lb += c * d.hi[j];
      }
    }
    return lb;
  }

  // Groups of open columns linked through rows with at least two open columns.
  std::vector<std::vector<std::size_t>> components(const Domains& d,
                                                   const std::vector<std::size_t>& open) {
    std::vector<std::size_t> parent(open.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    std::vector<std::int64_t> slot(lo_.size(), -1);
    for (std::size_t k = 0; k < open.size(); ++k) slot[open[k]] = static_cast<std::int64_t>(k);
    for (std::size_t i : rows_touching(open)) {
      std::int64_t first = -1;
      for (const Term& t : model_.row(i).terms) {
        if (slot[t.column] < 0 || d.lo[t.column] == d.hi[t.column]) continue;
        if (first < 0) {
          first = slot[t.column];
        } else {
          parent[find(static_cast<std::size_t>(slot[t.column]))] =
              find(static_cast<std::size_t>(first));
        }
      }
    }
    std::vector<std::vector<std::size_t>> groups;
    std::vector<std::int64_t> group_of(open.size(), -1);
    for (std::size_t k = 0; k < open.size(); ++k) {
      std::size_t root = find(k);
      if (group_of[root] < 0) {
        group_of[root] = static_cast<std::int64_t>(groups.size());
        groups.emplace_back();
      }
      groups[static_cast<std::size_t>(group_of[root])].push_back(open[k]);
    }
    return groups;
  }

  // Cheapest assignment of `vars` with cost strictly below `budget`.
  std::optional<Best> search(Domains& d, const std::vector<std::size_t>& vars,
                             const std::optional<Rational>& budget) {
    ++nodes_;
    if (!propagate(d, rows_touching(vars))) return std::nullopt;
    const Rational floor = cost_floor(d, vars);
    if (budget && floor >= *budget) return std::nullopt;

    std::vector<std::size_t> open;
    for (std::size_t j : vars) {
      if (d.lo[j] < d.hi[j]) open.push_back(j);
    }
    if (open.empty()) return Best{floor, d.lo};

    Rational fixed_cost = floor - cost_floor(d, open);
    auto groups = components(d, open);
    if (groups.size() > 1) {
      std::vector<Rational> floors;
      Rational floor_sum = 0;
      for (const auto& g : groups) {
        floors.push_back(cost_floor(d, g));
        floor_sum += floors.back();
      }
      Rational spent = fixed_cost;
      Rational pending = floor_sum;
      for (std::size_t g = 0; g < groups.size(); ++g) {
        pending -= floors[g];
        std::optional<Rational> local;
        if (budget) local = *budget - spent - pending;
        auto sub = search(d, groups[g], local);
        if (!sub) return std::nullopt;
        for (std::size_t j : groups[g]) {
          d.lo[j] = sub->values[j];
          d.hi[j] = sub->values[j];
        }
        spent += sub->cost;
      }
      return Best{spent, d.lo};
    }

    const std::size_t j = open.front();
    std::optional<Best> best;
    std::optional<Rational> limit = budget;
    const std::int64_t lo = d.lo[j];
    const std::int64_t hi = d.hi[j];
    for (std::int64_t v = lo; v <= hi; ++v) {
      Domains child = d;
      child.lo[j] = v;
      child.hi[j] = v;
      std::optional<Rational> child_limit;
      if (limit) child_limit = *limit - fixed_cost;
      auto sub = search(child, open, child_limit);
      if (sub) {
        Rational total = sub->cost + fixed_cost;
        if (!limit || total < *limit) {
          limit = total;
          sub->cost = total;
          best = std::move(sub);
        }
      }
    }
    return best;
  }

  const MilpModel& model_;
  std::vector<std::vector<std::size_t>> rows_of_;
  std::vector<std::int64_t> lo_;
  std::vector<std::int64_t> hi_;
  std::vector<std::uint64_t> stamp_;
  std::uint64_t epoch_ = 0;
  std::uint64_t nodes_ = 0;
};

}  // namespace detail

inline MilpResult solve_exhaustive(const MilpModel& model, const ExhaustiveParams& params = {}) {
  const auto start = std::chrono::steady_clock::now();
  Integer space = assignment_space(model);
  if (params.max_product && space > *params.max_product) {
    throw ValidationError("enumeration space " + space.get_str() + " exceeds the cap of " +
                          params.max_product->get_str());
  }
  detail::Enumerator e(model);
  auto best = e.run();
  MilpResult result;
  result.nodes = e.nodes();
  if (best) {
    result.status = MilpStatus::kOptimal;
    for (std::int64_t v : best->values) result.values.emplace_back(v);
    result.objective = model.objective_value(result.values);
    result.best_bound = result.objective;
  } else {
    result.status = MilpStatus::kInfeasible;
  }
  result.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace qkdplan
