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

// Brute-force references for small bounded models: LP optima by vertex
// enumeration, MILP optima by looping over the integer box and solving the
// continuous rest by vertex enumeration.

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "qkdplan/milp_model.hpp"
#include "qkdplan/rational.hpp"

namespace qkdplan::testing {

struct Halfspace {
  std::vector<Rational> a;  // dense
  Sense sense;
  Rational b;
};

// Solves the square system A x = b; nullopt when singular.
inline std::optional<std::vector<Rational>> solve_square(std::vector<std::vector<Rational>> a,
                                                         std::vector<Rational> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && a[piv][col] == 0) ++piv;
    if (piv == n) return std::nullopt;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || a[r][col] == 0) continue;
      Rational f = a[r][col] / a[col][col];
      for (std::size_t k = col; k < n; ++k) a[r][k] -= f * a[col][k];
      b[r] -= f * b[col];
    }
  }
  std::vector<Rational> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return x;
}

inline bool satisfies(const Halfspace& h, const std::vector<Rational>& x) {
  Rational act = 0;
  for (std::size_t j = 0; j < x.size(); ++j) act += h.a[j] * x[j];
  switch (h.sense) {
    case Sense::kLessEqual: return act <= h.b;
    case Sense::kGreaterEqual: return act >= h.b;
    case Sense::kEqual: return act == h.b;
  }
  return false;
}

struct VertexOptimum {
  Rational objective;
  std::vector<Rational> x;
};

// Minimum of c.x over a bounded polyhedron; nullopt when it is empty.
inline std::optional<VertexOptimum> vertex_minimum(const std::vector<Rational>& c,
                                                   const std::vector<Halfspace>& hs) {
  const std::size_t n = c.size();
  std::optional<VertexOptimum> best;
  if (n == 0) {
    for (const Halfspace& h : hs) {
      if (!satisfies(h, {})) return std::nullopt;
    }
    return VertexOptimum{0, {}};
  }
  std::vector<std::size_t> pick;
  std::function<void(std::size_t)> rec = [&](std::size_t start) {
    if (pick.size() == n) {
      std::vector<std::vector<Rational>> a;
      std::vector<Rational> b;
      for (std::size_t i : pick) {
        a.push_back(hs[i].a);
        b.push_back(hs[i].b);
      }
      auto x = solve_square(a, b);
      if (!x) return;
      for (const Halfspace& h : hs) {
        if (!satisfies(h, *x)) return;
      }
      Rational obj = 0;
      for (std::size_t j = 0; j < n; ++j) obj += c[j] * (*x)[j];
      if (!best || obj < best->objective) best = VertexOptimum{obj, *x};
      return;
    }
    for (std::size_t i = start; i < hs.size(); ++i) {
      pick.push_back(i);
      rec(i + 1);
      pick.pop_back();
    }
  };
  rec(0);
  return best;
}

// Optimum of a model whose columns all have finite bounds. Integer columns
// are enumerated; continuous ones go through vertex enumeration.
inline std::optional<Rational> brute_force_optimum(const MilpModel& m) {
  std::vector<std::size_t> ints, conts;
  for (std::size_t j = 0; j < m.num_columns(); ++j) {
    (m.column(j).is_integral() ? ints : conts).push_back(j);
  }
  std::optional<Rational> best;
  std::vector<Rational> fixed(m.num_columns());
  std::function<void(std::size_t)> rec = [&](std::size_t k) {
    if (k == ints.size()) {
      std::vector<Halfspace> hs;
      std::vector<Rational> c;
      Rational base = 0;
      for (std::size_t j : ints) base += m.column(j).cost * fixed[j];
      for (std::size_t j : conts) c.push_back(m.column(j).cost);
      for (const Row& r : m.rows()) {
        Halfspace h{std::vector<Rational>(conts.size()), r.sense, r.rhs};
        for (const Term& t : r.terms) {
          bool found = false;
          for (std::size_t q = 0; q < conts.size(); ++q) {
            if (conts[q] == t.column) {
              h.a[q] += t.coef;
              found = true;
            }
          }
          if (!found) h.b -= t.coef * fixed[t.column];
        }
        hs.push_back(std::move(h));
      }
      for (std::size_t q = 0; q < conts.size(); ++q) {
        const Column& col = m.column(conts[q]);
        std::vector<Rational> e(conts.size());
        e[q] = 1;
        hs.push_back({e, Sense::kGreaterEqual, *col.lower});
        hs.push_back({e, Sense::kLessEqual, *col.upper});
      }
      auto v = vertex_minimum(c, hs);
      if (v && (!best || base + v->objective < *best)) best = base + v->objective;
      return;
    }
    const Column& col = m.column(ints[k]);
    for (Integer v = ceil_of(*col.lower); v <= floor_of(*col.upper); ++v) {
      fixed[ints[k]] = Rational(v);
      rec(k + 1);
    }
  };
  rec(0);
  return best;
}

}  // namespace qkdplan::testing
