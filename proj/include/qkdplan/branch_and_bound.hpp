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

// LP-based branch and bound over the exact simplex.
//
// Nodes hold the bound changes made along their path from the root. The open
// list is ordered by LP bound with FIFO tie-break (or LIFO for depth-first).
// A node is pruned when its bound is not below the incumbent, so the search
// stops only once every open node is proven useless.

#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "qkdplan/milp_model.hpp"
#include "qkdplan/rational.hpp"
#include "qkdplan/simplex.hpp"

namespace qkdplan {

enum class MilpStatus { kOptimal, kFeasible, kInfeasible, kLimitReached, kUnbounded };

// kFeasible: a limit stopped the search with an incumbent in hand.
// kLimitReached: a limit stopped the search before any incumbent was found.
inline std::string_view milp_status_name(MilpStatus s) {
  switch (s) {
    case MilpStatus::kOptimal: return "optimal";
    case MilpStatus::kFeasible: return "feasible";
    case MilpStatus::kInfeasible: return "infeasible";
    case MilpStatus::kLimitReached: return "limit_reached";
    case MilpStatus::kUnbounded: return "unbounded";
  }
  return "?";
}

enum class BranchingRule { kLowestIndex, kMostFractional };
enum class NodeSelection { kBestBound, kDepthFirst };

struct SolverParams {
  std::uint64_t node_limit = 1000000;
  double time_limit_s = 3600;
  Rational integrality_tolerance = 0;
  BranchingRule branching = BranchingRule::kLowestIndex;
  NodeSelection selection = NodeSelection::kBestBound;
  unsigned threads = 1;
  LpOptions lp;

  void validate() const {
    if (node_limit == 0) throw ValidationError("node limit must be positive");
    if (!(time_limit_s > 0)) throw ValidationError("time limit must be positive");
    if (threads == 0) throw ValidationError("thread count must be positive");
    if (integrality_tolerance < 0 || integrality_tolerance >= Rational(1, 2)) {
      throw ValidationError("integrality tolerance must lie in [0, 1/2)");
    }
  }
};

struct MilpResult {
  MilpStatus status = MilpStatus::kInfeasible;
  std::vector<Rational> values;  // incumbent, empty if none
  Rational objective;
  Rational best_bound;
  std::uint64_t nodes = 0;
  double wall_time_s = 0;

  bool has_solution() const { return !values.empty(); }
};

namespace detail {

struct BoundChange {
  std::size_t column;
  bool upper;  // true: x <= value, false: x >= value
  Rational value;
};

struct BbNode {
  std::vector<BoundChange> path;
  Rational bound;
  std::uint64_t seq = 0;
};

class BranchAndBound {
 public:
  BranchAndBound(const MilpModel& model, const SolverParams& params)
      : model_(model), params_(params), root_bounds_(LpBounds::of(model)) {
    // Integer columns only take integer values, so their bounds may be rounded.
    for (std::size_t j = 0; j < model.num_columns(); ++j) {
      if (!model.column(j).is_integral()) continue;
      if (root_bounds_.lower[j]) root_bounds_.lower[j] = Rational(ceil_of(*root_bounds_.lower[j]));
      if (root_bounds_.upper[j]) root_bounds_.upper[j] = Rational(floor_of(*root_bounds_.upper[j]));
    }
  }

  MilpResult run() {
    const auto start = std::chrono::steady_clock::now();
    deadline_ = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                            std::chrono::duration<double>(params_.time_limit_s));
    push(BbNode{{}, Rational(0), 0}, /*has_bound=*/false);

    const unsigned workers = params_.threads;
    if (workers == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (unsigned t = 0; t < workers; ++t) pool.emplace_back([this] { worker(); });
      for (auto& th : pool) th.join();
    }

    MilpResult result;
    result.nodes = nodes_.load();
    result.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (unbounded_) {
      result.status = MilpStatus::kUnbounded;
      return result;
    }
    if (incumbent_) {
      result.values = *incumbent_;
      result.objective = incumbent_value_;
    }
    if (!stopped_) {
      if (incumbent_) {
        result.status = MilpStatus::kOptimal;
        result.best_bound = incumbent_value_;
      } else {
        result.status = MilpStatus::kInfeasible;
      }
      return result;
    }
    result.status = incumbent_ ? MilpStatus::kFeasible : MilpStatus::kLimitReached;
    // Best bound over what is left open (and nodes abandoned mid-flight).
    std::optional<Rational> bound = open_floor_;
    for (const auto& [key, node] : best_first_) {
      if (!bound || node.bound < *bound) bound = node.bound;
    }
    for (const BbNode& node : stack_) {
      if (!bound || node.bound < *bound) bound = node.bound;
    }
    if (incumbent_ && (!bound || incumbent_value_ < *bound)) bound = incumbent_value_;
    result.best_bound = bound ? *bound : Rational(0);
    return result;
  }

 private:
  using Key = std::pair<Rational, std::uint64_t>;

  // Caller holds no lock.
  void push(BbNode node, bool has_bound) {
    std::lock_guard<std::mutex> lock(mutex_);
    push_locked(std::move(node), has_bound);
  }

  void push_locked(BbNode node, bool has_bound) {
    node.seq = next_seq_++;
    if (!has_bound) node.bound = Rational(0);
    if (params_.selection == NodeSelection::kBestBound) {
      Key key{node.bound, node.seq};
      best_first_.emplace(std::move(key), std::move(node));
    } else {
      stack_.push_back(std::move(node));
    }
    cv_.notify_one();
  }

  bool empty_locked() const { return best_first_.empty() && stack_.empty(); }

  BbNode pop_locked() {
    if (params_.selection == NodeSelection::kBestBound) {
      auto it = best_first_.begin();
      BbNode node = std::move(it->second);
      best_first_.erase(it);
      return node;
    }
    BbNode node = std::move(stack_.back());
    stack_.pop_back();
    return node;
  }

  bool prunable_locked(const Rational& bound) const {
    return incumbent_ && bound >= incumbent_value_;
  }

  void worker() {
    while (true) {
      BbNode node;
      {
        std::unique_lock<std::mutex> lock(mutex_);
        cv_.wait(lock, [this] { return !empty_locked() || active_ == 0 || stopped_ || unbounded_; });
        if (stopped_ || unbounded_) return;
        if (empty_locked()) {
          if (active_ == 0) {
            cv_.notify_all();
            return;
          }
          continue;
        }
        node = pop_locked();
        if (node.seq != 0 && prunable_locked(node.bound)) continue;
        if (nodes_.load() >= params_.node_limit ||
            std::chrono::steady_clock::now() >= deadline_) {
          stopped_ = true;
          if (!open_floor_ || node.bound < *open_floor_) open_floor_ = node.bound;
          cv_.notify_all();
          return;
        }
        ++active_;
        ++nodes_;
      }
      process(node);
      {
        std::lock_guard<std::mutex> lock(mutex_);
        --active_;
        cv_.notify_all();
      }
    }
  }

  void process(const BbNode& node) {
    LpBounds bounds = root_bounds_;
    for (const BoundChange& c : node.path) {
      if (c.upper) {
        bounds.upper[c.column] = c.value;
      } else {
        bounds.lower[c.column] = c.value;
      }
    }
    LpSolution lp = solve_lp(model_, bounds, params_.lp);
    if (lp.status == LpStatus::kInfeasible) return;
    if (lp.status == LpStatus::kUnbounded) {
      // An unbounded relaxation at the root means the MILP has no finite
      // optimum either (rational data); deeper nodes inherit the same ray.
      std::lock_guard<std::mutex> lock(mutex_);
      unbounded_ = true;
      cv_.notify_all();
      return;
    }

    std::optional<std::size_t> branch_col = choose_branch(lp.values);
    std::lock_guard<std::mutex> lock(mutex_);
    if (prunable_locked(lp.objective)) return;
    if (!branch_col) {
      std::vector<Rational> values = lp.values;
      for (std::size_t j = 0; j < values.size(); ++j) {
        // Snap values inside the tolerance onto their integer.
        if (model_.column(j).is_integral() && !is_integral(values[j])) {
          values[j] = Rational(floor_of(values[j] + Rational(1, 2)));
        }
      }
      Rational obj = model_.objective_value(values);
      if (!incumbent_ || obj < incumbent_value_) {
        incumbent_ = std::move(values);
        incumbent_value_ = obj;
      }
      return;
    }
    const std::size_t j = *branch_col;
    BbNode down{node.path, lp.objective, 0};
    down.path.push_back({j, true, Rational(floor_of(lp.values[j]))});
    BbNode up{node.path, lp.objective, 0};
    up.path.push_back({j, false, Rational(ceil_of(lp.values[j]))});
    if (params_.selection == NodeSelection::kDepthFirst) {
      push_locked(std::move(up), true);
      push_locked(std::move(down), true);
    } else {
      push_locked(std::move(down), true);
      push_locked(std::move(up), true);
    }
  }

  bool fractional(const Rational& v) const {
    if (is_integral(v)) return false;
    if (params_.integrality_tolerance == 0) return true;
    Rational dist = v - Rational(floor_of(v));
    if (dist > Rational(1, 2)) dist = 1 - dist;
    return dist > params_.integrality_tolerance;
  }

  std::optional<std::size_t> choose_branch(const std::vector<Rational>& values) const {
    std::optional<std::size_t> best;
    Rational best_score = -1;
    for (std::size_t j = 0; j < values.size(); ++j) {
      if (!model_.column(j).is_integral() || !fractional(values[j])) continue;
      if (params_.branching == BranchingRule::kLowestIndex) return j;
      Rational f = values[j] - Rational(floor_of(values[j]));
      Rational score = f < 1 - f ? f : Rational(1 - f);
      if (score > best_score) {
        best_score = score;
        best = j;
      }
    }
    return best;
  }

  const MilpModel& model_;
  SolverParams params_;
  LpBounds root_bounds_;
  std::chrono::steady_clock::time_point deadline_;

  std::mutex mutex_;
  std::condition_variable cv_;
  std::map<Key, BbNode> best_first_;
  std::deque<BbNode> stack_;
  std::uint64_t next_seq_ = 0;
  unsigned active_ = 0;
  bool stopped_ = false;
  bool unbounded_ = false;
  std::optional<Rational> open_floor_;
  std::atomic<std::uint64_t> nodes_{0};
  std::optional<std::vector<Rational>> incumbent_;
  Rational incumbent_value_;
};

}  // namespace detail

inline MilpResult solve_milp(const MilpModel& model, const SolverParams& params = {}) {
  params.validate();
  detail::BranchAndBound bb(model, params);
  return bb.run();
}

}  // namespace qkdplan
