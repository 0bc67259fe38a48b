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

// qkdplan command-line front end.
//
// Exit codes: 0 optimal (or success), 2 infeasible, 3 limit reached,
// 64 usage or input error, 1 anything else.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "qkdplan/qkdplan.hpp"

namespace {

constexpr int kExitOptimal = 0;
constexpr int kExitInfeasible = 2;
constexpr int kExitLimit = 3;
constexpr int kExitUsage = 64;

struct CommonOptions {
  std::string instance;
  std::string out;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  std::uint64_t node_limit = 1000000;
  double time_limit_s = 3600;
  std::string grid;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool with_grid) {
  cmd->add_option("--instance", o.instance, "instance document (JSON)")->required();
  cmd->add_option("--out", o.out, "write the result here instead of stdout");
  cmd->add_option("--seed", o.seed, "seed for scenario sampling");
  cmd->add_option("--threads", o.threads, "branch-and-bound worker threads")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--node-limit", o.node_limit, "branch-and-bound node limit")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--time-limit-s", o.time_limit_s, "wall-clock limit per solve")
      ->check(CLI::PositiveNumber);
  if (with_grid) {
    cmd->add_option("--grid", o.grid,
                    "sweep values, 'a,b,c' or 'start:stop:step' (default: the instance's "
                    "experiments block)");
  }
}

qkdplan::SolverParams solver_params(const CommonOptions& o) {
  qkdplan::SolverParams p;
  p.threads = o.threads;
  p.node_limit = o.node_limit;
  p.time_limit_s = o.time_limit_s;
  return p;
}

void emit(const CommonOptions& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw qkdplan::Error("cannot write " + o.out);
  f << text;
  if (!f) throw qkdplan::Error("write to " + o.out + " failed");
}

int exit_code(qkdplan::MilpStatus s) {
  switch (s) {
    case qkdplan::MilpStatus::kOptimal: return kExitOptimal;
    case qkdplan::MilpStatus::kInfeasible: return kExitInfeasible;
    case qkdplan::MilpStatus::kFeasible:
    case qkdplan::MilpStatus::kLimitReached: return kExitLimit;
    case qkdplan::MilpStatus::kUnbounded: return 1;
  }
  return 1;
}

struct Loaded {
  qkdplan::json_util::Json doc;
  qkdplan::Instance inst;
};

Loaded load(const CommonOptions& o) {
  Loaded l;
  try {
    l.doc = qkdplan::json_util::parse_document(qkdplan::read_file(o.instance));
    qkdplan::LoadOptions lo;
    lo.seed = o.seed;
    l.inst = qkdplan::instance_from_json(l.doc, lo);
  } catch (const qkdplan::ParseError& e) {
    throw qkdplan::ParseError(o.instance + ": " + e.what());
  } catch (const qkdplan::ValidationError& e) {
    throw qkdplan::ValidationError(o.instance + ": " + e.what());
  }
  return l;
}

std::vector<qkdplan::Rational> grid_for(const CommonOptions& o, const Loaded& l,
                                        const std::string& key) {
  if (!o.grid.empty()) return qkdplan::parse_grid(o.grid);
  auto g = qkdplan::document_grid(l.doc, key);
  if (!g) throw qkdplan::ValidationError("no --grid given and the instance has no experiments." + key);
  return *g;
}

int run_solve(const CommonOptions& o) {
  Loaded l = load(o);
  qkdplan::SolverParams params = solver_params(o);
  qkdplan::SolveOutcome out = qkdplan::solve_instance(l.inst, params);
  std::string report = qkdplan::format_report(l.inst, out);
  if (out.milp.status == qkdplan::MilpStatus::kInfeasible) {
    report += "diagnostic=" + qkdplan::diagnose_infeasibility(l.inst, params) + "\n";
  }
  emit(o, report);
  return exit_code(out.milp.status);
}

// Sweeps exit 0 once the table is written; per-row status lives in the CSV.
int run_sweep(const CommonOptions& o, const std::string& kind) {
  Loaded l = load(o);
  qkdplan::SolverParams params = solver_params(o);
  std::vector<qkdplan::SweepRow> rows;
  if (kind == "reservation") {
    rows = qkdplan::reservation_sweep(l.inst, grid_for(o, l, "reservation_grid"), params);
  } else if (kind == "km") {
    rows = qkdplan::km_reservation_sweep(l.inst, grid_for(o, l, "km_grid"), params);
  } else if (kind == "demand") {
    rows = qkdplan::demand_sweep(l.inst, grid_for(o, l, "demand_grid"), params);
  } else {
    rows = qkdplan::cost_inflation_sweep(l.inst, grid_for(o, l, "cost_inflation_grid"), params);
  }
  emit(o, qkdplan::sweep_csv(kind, rows));
  return kExitOptimal;
}

int run_export(const CommonOptions& o, bool expected_value) {
  Loaded l = load(o);
  qkdplan::SpModel sp = expected_value ? qkdplan::expected_value_problem(l.inst)
                                       : qkdplan::build_deterministic_equivalent(l.inst);
  emit(o, qkdplan::export_lp_format(sp.model));
  return kExitOptimal;
}

int run_validate(const CommonOptions& o) {
  Loaded l = load(o);
  qkdplan::SpModel sp = qkdplan::build_deterministic_equivalent(l.inst);
  std::string s = "valid=1\n";
  s += "nodes=" + std::to_string(l.inst.topology.nodes().size()) + "\n";
  s += "links=" + std::to_string(l.inst.topology.links().size()) + "\n";
  s += "requests=" + std::to_string(l.inst.requests.size()) + "\n";
  s += "scenarios=" + std::to_string(l.inst.scenarios.size()) + "\n";
  s += "columns=" + std::to_string(sp.model.num_columns()) + "\n";
  s += "rows=" + std::to_string(sp.model.num_rows()) + "\n";
  emit(o, s);
  return kExitOptimal;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage stochastic QKD resource planner"};
  app.require_subcommand(1);
  CommonOptions o;
  bool expected_value = false;

  auto* solve = app.add_subcommand("solve", "solve the deterministic equivalent and report the plan");
  add_common(solve, o, false);
  struct Sweep {
    const char* name;
    const char* kind;
    const char* help;
  };
  const Sweep sweeps[] = {
      {"sweep-reservation", "reservation", "vary total reserved QKD wavelengths on the route"},
      {"sweep-km", "km", "vary total reserved KM wavelengths on the route"},
      {"sweep-demand", "demand", "scale every request's rate support"},
      {"sweep-cost-inflation", "cost-inflation",
       "scale fiber and UAV reservation device prices"},
  };
  std::vector<std::pair<CLI::App*, std::string>> sweep_cmds;
  for (const Sweep& s : sweeps) {
    auto* cmd = app.add_subcommand(s.name, s.help);
    add_common(cmd, o, true);
    sweep_cmds.emplace_back(cmd, s.kind);
  }
  auto* exp = app.add_subcommand("export-lp", "write the deterministic equivalent as LP text");
  add_common(exp, o, false);
  exp->add_flag("--expected-value", expected_value, "export the expected-value problem instead");
  auto* validate = app.add_subcommand("validate", "check an instance and print its model size");
  add_common(validate, o, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (solve->parsed()) return run_solve(o);
    for (auto& [cmd, kind] : sweep_cmds) {
      if (cmd->parsed()) return run_sweep(o, kind);
    }
    if (exp->parsed()) return run_export(o, expected_value);
    if (validate->parsed()) return run_validate(o);
  } catch (const qkdplan::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const qkdplan::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const qkdplan::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitUsage;
}
