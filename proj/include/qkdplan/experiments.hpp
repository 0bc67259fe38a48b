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

// Experiment drivers: single solves with a report, and the four sweeps.
//
// Sweep CSV (schema qkdplan-sweep/1):
//   #schema=qkdplan-sweep/1
//   #kind=<reservation|km|demand|cost-inflation>
//   value,status,first_stage,second_stage_expected,on_demand_expected,total,
//   <medium>_{reserved,utilized,ondemand}_{qkd,km} for fiber, uav, satellite,
//   routes,note
// Utilized and on-demand columns are probability-weighted expectations.
// Cells of rows without a plan are left empty.

#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qkdplan/branch_and_bound.hpp"
#include "qkdplan/instance.hpp"
#include "qkdplan/json_util.hpp"
#include "qkdplan/milp_model.hpp"
#include "qkdplan/rational.hpp"
#include "qkdplan/sp_builder.hpp"

namespace qkdplan {

struct MediumUsage {
  Rational reserved_qkd, reserved_km;
  Rational utilized_qkd, utilized_km;  // expected
  Rational ondemand_qkd, ondemand_km;  // expected

  // Wavelengths the medium carries: reserved ones plus expected on-demand.
  Rational wavelengths() const { return reserved_qkd + reserved_km + ondemand_qkd + ondemand_km; }
};

using UsageByMedium = std::array<MediumUsage, 3>;

inline UsageByMedium medium_usage(const Instance& inst, const PlanSolution& plan) {
  UsageByMedium u;
  const Topology& topo = inst.topology;
  for (std::size_t f = 0; f < plan.allocation.size(); ++f) {
    for (std::size_t l = 0; l < plan.allocation[f].size(); ++l) {
      const LinkAllocation& la = plan.allocation[f][l];
      MediumUsage& m = u[medium_index(topo.link(l).medium)];
      m.reserved_qkd += la.rqk;
      m.reserved_km += la.rkm;
      for (std::size_t s = 0; s < inst.scenarios.size(); ++s) {
        const Rational& p = inst.scenarios[s].probability;
        m.utilized_qkd += p * la.eqk[s];
        m.utilized_km += p * la.ekm[s];
        m.ondemand_qkd += p * la.oqk[s];
        m.ondemand_km += p * la.okm[s];
      }
    }
  }
  return u;
}

// "15-x-12-y-18": nodes with the medium prefixes used on each hop (joined by
// '+' when an arc carries several). Requests are separated by '|'.
inline std::string route_summary(const Instance& inst, const PlanSolution& plan) {
  const Topology& topo = inst.topology;
  std::string out;
  for (std::size_t f = 0; f < plan.routes.size(); ++f) {
    const RoutePlan& r = plan.routes[f];
    if (f) out += "|";
    out += std::to_string(r.nodes.front());
    for (std::size_t h = 0; h < r.arcs.size(); ++h) {
      std::string media;
      const Arc& arc = topo.arc(r.arcs[h]);
      for (std::size_t l : arc.links) {
        if (plan.allocation[f][l].empty()) continue;
        if (!media.empty()) media += "+";
        media += medium_prefix(topo.link(l).medium);
      }
      if (media.empty()) media = "?";
      out += "-" + media + "-" + std::to_string(r.nodes[h + 1]);
    }
  }
  return out;
}

// Checks every route of a plan; throws Error on the first one that is not a
// simple source-to-destination path.
inline void check_routes(const Instance& inst, const PlanSolution& plan) {
  for (std::size_t f = 0; f < plan.routes.size(); ++f) {
    if (!is_simple_path(inst, inst.requests[f], plan.routes[f])) {
      throw Error("route of request " + std::to_string(inst.requests[f].id) +
                  " is not a simple path");
    }
  }
}

// --- infeasibility diagnosis ---------------------------------------------------

namespace detail {

// Row family: the name up to the first '_' that follows the family letters,
// e.g. "xrqk_cap_1_2" -> "xrqk_cap", "dqk_1_2_0_0" -> "dqk".
inline std::string row_family(const std::string& name) {
  for (std::string_view fam : {"_cap_", "_link_", "_use_"}) {
    auto pos = name.find(fam);
    if (pos != std::string::npos) return name.substr(0, pos + fam.size() - 1);
  }
  return name.substr(0, name.find('_'));
}

inline bool reachable(const Topology& topo, int from, int to) {
  std::set<int> seen{from};
  std::vector<int> stack{from};
  while (!stack.empty()) {
    int n = stack.back();
    stack.pop_back();
    if (n == to) return true;
    for (std::size_t a : topo.outgoing_arcs(n)) {
      if (seen.insert(topo.arc(a).to).second) stack.push_back(topo.arc(a).to);
    }
  }
  return false;
}

}  // namespace detail

// Names the first aggregate capacity or demand row family whose removal makes
// the deterministic equivalent feasible, and the first row of that family
// (in model order) at which feasibility is lost.
inline std::string diagnose_infeasibility(const Instance& inst, const SolverParams& params = {}) {
  for (const Request& r : inst.requests) {
    if (!detail::reachable(inst.topology, r.source, r.destination)) {
      return "flow rows: request " + std::to_string(r.id) + " has no path from " +
             std::to_string(r.source) + " to " + std::to_string(r.destination);
    }
  }
  SpModel sp = build_deterministic_equivalent(inst);
  std::vector<std::string> families;
  for (const Row& r : sp.model.rows()) {
    std::string fam = detail::row_family(r.name);
    const bool candidate = fam.find("_cap") != std::string::npos || fam == "dqk" || fam == "dkm";
    if (candidate && std::find(families.begin(), families.end(), fam) == families.end()) {
      families.push_back(fam);
    }
  }
  // Aggregate capacities first, then demand.
  std::stable_partition(families.begin(), families.end(), [](const std::string& f) {
    return f.find("_cap") != std::string::npos;
  });
  // Model without the family plus its first k rows.
  auto with_prefix = [&](const std::string& fam, std::size_t k) {
    MilpModel m;
    for (const Column& c : sp.model.columns()) m.add_column(c);
    std::size_t taken = 0;
    for (const Row& r : sp.model.rows()) {
      if (detail::row_family(r.name) != fam) {
        m.add_row(r);
      } else if (taken < k) {
        m.add_row(r);
        ++taken;
      }
    }
    return m;
  };
  for (const std::string& fam : families) {
    if (!solve_milp(with_prefix(fam, 0), params).has_solution()) continue;
    std::vector<const Row*> members;
    for (const Row& r : sp.model.rows()) {
      if (detail::row_family(r.name) == fam) members.push_back(&r);
    }
    // Smallest prefix of the family that is already infeasible.
    std::size_t lo = 1;
    std::size_t hi = members.size();
    while (lo < hi) {
      std::size_t mid = lo + (hi - lo) / 2;
      if (solve_milp(with_prefix(fam, mid), params).status == MilpStatus::kInfeasible) {
        hi = mid;
      } else {
        lo = mid + 1;
      }
    }
    return "row family " + fam + " cannot be met (first conflicting row " + members[lo - 1]->name +
           ")";
  }
  return "no single aggregate capacity or demand row family explains the infeasibility";
}

// --- single solve ----------------------------------------------------------------

// Machine-readable key=value report of a solve.
inline std::string format_report(const Instance& inst, const SolveOutcome& out) {
  std::ostringstream s;
  const MilpResult& m = out.milp;
  s << "status=" << milp_status_name(m.status) << "\n";
  if (m.has_solution()) s << "objective=" << format_rational(m.objective) << "\n";
  if (m.status == MilpStatus::kOptimal || m.status == MilpStatus::kFeasible) {
    s << "best_bound=" << format_rational(m.best_bound) << "\n";
  }
  s << "nodes=" << m.nodes << "\n";
  s << "wall_time_s=" << m.wall_time_s << "\n";
  if (!out.plan) return s.str();
  const PlanSolution& plan = *out.plan;
  const Topology& topo = inst.topology;
  for (std::size_t f = 0; f < plan.routes.size(); ++f) {
    const int id = plan.routes[f].request_id;
    std::string hops;
    for (std::size_t a : plan.routes[f].arcs) {
      const Arc& arc = topo.arc(a);
      for (std::size_t l : arc.links) {
        if (plan.allocation[f][l].empty()) continue;
        if (!hops.empty()) hops += " ";
        hops += std::to_string(arc.from) + "->" + std::to_string(arc.to) + ":" +
                std::string(medium_name(topo.link(l).medium));
      }
    }
    std::string nodes;
    for (int n : plan.routes[f].nodes) nodes += (nodes.empty() ? "" : " ") + std::to_string(n);
    s << "route." << id << "=" << nodes << "\n";
    s << "hops." << id << "=" << hops << "\n";
    for (std::size_t l = 0; l < topo.links().size(); ++l) {
      const LinkAllocation& la = plan.allocation[f][l];
      if (la.empty()) continue;
      const Link& link = topo.link(l);
      std::string key = "alloc." + std::to_string(id) + "." + std::to_string(link.from) + "_" +
                        std::to_string(link.to) + "_" + std::string(medium_name(link.medium));
      s << key << ".reserved=qkd:" << la.rqk << " km:" << la.rkm << "\n";
      for (std::size_t sc = 0; sc < inst.scenarios.size(); ++sc) {
        s << key << ".scenario" << sc << "=utilized qkd:" << la.eqk[sc] << " km:" << la.ekm[sc]
          << " on_demand qkd:" << la.oqk[sc] << " km:" << la.okm[sc] << "\n";
      }
    }
  }
  const CostBreakdown& c = plan.cost;
  s << "cost.routing=" << format_rational(c.routing) << "\n";
  s << "cost.first_stage=" << format_rational(c.first_stage) << "\n";
  for (std::size_t sc = 0; sc < c.second_stage.size(); ++sc) {
    const Scenario& scn = inst.scenarios[sc];
    s << "cost.second_stage." << sc << "=" << format_rational(c.second_stage[sc])
      << " weather:" << weather_name(scn.weather)
      << " p:" << format_rational(scn.probability) << "\n";
  }
  s << "cost.second_stage_expected=" << format_rational(c.second_stage_expected) << "\n";
  s << "cost.on_demand_expected=" << format_rational(c.on_demand_expected) << "\n";
  s << "cost.total=" << format_rational(c.total) << "\n";
  return s.str();
}

// --- sweeps ----------------------------------------------------------------------

struct SweepRow {
  Rational value;
  std::string status;  // optimal, feasible, infeasible, limit_reached
  std::optional<PlanSolution> plan;
  UsageByMedium usage;
  std::string routes;
  std::string note;

  bool solved() const { return plan.has_value(); }
  const CostBreakdown& cost() const { return plan->cost; }
};

inline void validate_grid(const std::vector<Rational>& grid, const Rational& min_value,
                          bool strict_min, const char* what) {
  if (grid.empty()) throw ValidationError(std::string(what) + " grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const bool low = strict_min ? grid[i] <= min_value : grid[i] < min_value;
    if (low) {
      throw ValidationError(std::string(what) + " grid value " + format_rational(grid[i]) +
                            (strict_min ? " must exceed " : " is below ") +
                            format_rational(min_value));
    }
    if (i && grid[i] <= grid[i - 1]) {
      throw ValidationError(std::string(what) + " grid must be strictly increasing");
    }
  }
}

namespace detail {

inline SweepRow row_from_plan(const Instance& inst, const Rational& value, std::string status,
                              PlanSolution plan) {
  check_routes(inst, plan);
  if (plan.cost.total != plan.cost.first_stage + plan.cost.second_stage_expected) {
    throw Error("cost identity broken at sweep value " + format_rational(value));
  }
  SweepRow row;
  row.value = value;
  row.status = std::move(status);
  row.usage = medium_usage(inst, plan);
  row.routes = route_summary(inst, plan);
  row.plan = std::move(plan);
  return row;
}

inline SweepRow row_without_plan(const Rational& value, std::string status, std::string note) {
  SweepRow row;
  row.value = value;
  row.status = std::move(status);
  row.note = std::move(note);
  return row;
}

inline SweepRow solve_row(const Instance& inst, const Rational& value,
                          const SolverParams& params) {
  SolveOutcome out = solve_instance(inst, params);
  std::string status(milp_status_name(out.milp.status));
  if (!out.plan) {
    std::string note = out.milp.status == MilpStatus::kInfeasible
                           ? diagnose_infeasibility(inst, params)
                           : "no incumbent before the limit";
    return row_without_plan(value, status, note);
  }
  return row_from_plan(inst, value, status, std::move(*out.plan));
}

enum class ReserveKind { kQkd, kKm };

// Worst-case wavelengths of one kind a request needs on an arc over all scenarios.
inline std::int64_t worst_case_need(const Instance& inst, std::size_t f, const Arc& arc,
                                    ReserveKind kind) {
  std::int64_t need = 0;
  const std::int64_t mult = kind == ReserveKind::kQkd ? inst.w_qkd : inst.w_kml;
  for (const Scenario& sc : inst.scenarios.scenarios) {
    need = std::max(need, mult * arc_parallel_links(inst, arc, sc.rates_kbps.at(inst.requests[f].id)));
  }
  return need;
}

// Spreads `level` reserved wavelengths over the baseline routes in route
// order. Pass one brings each hop's primary link (the one the baseline
// reserved most on, non-satellite first on ties) up to the hop's worst-case
// need; pass two spills the rest up to the reserved capacities. Returns the
// per-request, per-link reservation, or nullopt when the routes cannot hold
// `level`.
inline std::optional<std::vector<std::vector<std::int64_t>>> apportion(
    const Instance& inst, const PlanSolution& base, std::int64_t level, ReserveKind kind) {
  const Topology& topo = inst.topology;
  const std::size_t nl = topo.links().size();
  auto cap_of = [&](std::size_t l) {
    const Link& link = topo.link(l);
    return kind == ReserveKind::kQkd ? link.caps.qkd_reserved_max : link.caps.km_reserved_max;
  };
  auto base_of = [&](std::size_t f, std::size_t l) {
    const LinkAllocation& la = base.allocation[f][l];
    return kind == ReserveKind::kQkd ? la.rqk : la.rkm;
  };
  std::vector<std::vector<std::int64_t>> out(base.routes.size(), std::vector<std::int64_t>(nl, 0));
  std::vector<std::int64_t> used(nl, 0);  // shared by all requests
  std::int64_t left = level;
  auto give = [&](std::size_t f, std::size_t l, std::int64_t want) {
    std::int64_t n = std::min({want, left, cap_of(l) - used[l]});
    if (n <= 0) return;
    out[f][l] += n;
    used[l] += n;
    left -= n;
  };
  for (std::size_t f = 0; f < base.routes.size(); ++f) {
    for (std::size_t a : base.routes[f].arcs) {
      const Arc& arc = topo.arc(a);
      std::size_t primary = arc.links.front();
      for (std::size_t l : arc.links) {
        auto rank = [&](std::size_t x) {
          return std::pair{base_of(f, x), topo.link(x).medium != Medium::kSatellite};
        };
        if (rank(l) > rank(primary)) primary = l;
      }
      give(f, primary, worst_case_need(inst, f, arc, kind));
    }
  }
  for (std::size_t f = 0; f < base.routes.size(); ++f) {
    for (std::size_t a : base.routes[f].arcs) {
      for (std::size_t l : topo.arc(a).links) give(f, l, left);
    }
  }
  if (left > 0) return std::nullopt;
  return out;
}

inline PlanSolution baseline_plan(const Instance& inst, const SolverParams& params) {
  SolveOutcome out = solve_instance(inst, params);
  if (!out.plan) {
    throw Error("baseline solve ended " + std::string(milp_status_name(out.milp.status)) +
                (out.milp.status == MilpStatus::kInfeasible
                     ? ": " + diagnose_infeasibility(inst, params)
                     : std::string()));
  }
  check_routes(inst, *out.plan);
  return std::move(*out.plan);
}

inline std::vector<SweepRow> fixed_level_sweep(const Instance& inst,
                                               const std::vector<Rational>& grid,
                                               const SolverParams& params, ReserveKind kind) {
  validate_grid(grid, 0, false, kind == ReserveKind::kQkd ? "reservation" : "KM reservation");
  for (const Rational& v : grid) {
    if (!is_integral(v)) throw ValidationError("reservation levels must be integers");
  }
  const PlanSolution base = baseline_plan(inst, params);
  std::vector<SweepRow> rows;
  for (const Rational& level : grid) {
    auto split = apportion(inst, base, to_int64(level.get_num()), kind);
    if (!split) {
      rows.push_back(row_without_plan(level, "infeasible",
                                      "level exceeds the reserved capacity along the route"));
      continue;
    }
    FirstStage fs = base.first_stage(inst);
    (kind == ReserveKind::kQkd ? fs.rqk : fs.rkm) = *split;
    try {
      RecourseEvaluation ev = evaluate_fixed_first_stage(inst, fs, params);
      rows.push_back(row_from_plan(inst, level, "optimal", std::move(ev.plan)));
    } catch (const InfeasibleRecourse& e) {
      rows.push_back(row_without_plan(level, "infeasible", e.what()));
    }
  }
  return rows;
}

}  // namespace detail

// Fixes the baseline routing and KM reservation, sets the total reserved QKD
// wavelengths on the routes to each grid level and evaluates the recourse.
inline std::vector<SweepRow> reservation_sweep(const Instance& inst,
                                               const std::vector<Rational>& levels,
                                               const SolverParams& params = {}) {
  return detail::fixed_level_sweep(inst, levels, params, detail::ReserveKind::kQkd);
}

// Same with the KM reservation swept and the QKD reservation held.
inline std::vector<SweepRow> km_reservation_sweep(const Instance& inst,
                                                  const std::vector<Rational>& levels,
                                                  const SolverParams& params = {}) {
  return detail::fixed_level_sweep(inst, levels, params, detail::ReserveKind::kKm);
}

inline Instance scale_demand(const Instance& inst, const Rational& factor) {
  if (factor <= 0) throw ValidationError("demand scaling must be positive");
  Instance out = inst;
  for (Request& r : out.requests) {
    for (Rational& v : r.demand_kbps) v *= factor;
  }
  for (auto& [id, support] : out.scenarios.rate_support) {
    for (Rational& v : support) v *= factor;
  }
  for (Scenario& sc : out.scenarios.scenarios) {
    for (auto& [id, rate] : sc.rates_kbps) rate *= factor;
  }
  return out;
}

inline std::vector<SweepRow> demand_sweep(const Instance& inst,
                                          const std::vector<Rational>& scalings,
                                          const SolverParams& params = {}) {
  validate_grid(scalings, 0, true, "demand");
  std::vector<SweepRow> rows;
  for (const Rational& k : scalings) rows.push_back(detail::solve_row(scale_demand(inst, k), k, params));
  return rows;
}

// Multiplies the reservation-phase device prices (tx, rx, km, si, md) of
// fiber and UAV links; channel prices stay.
inline Instance inflate_costs(const Instance& inst, const Rational& factor) {
  if (factor < 1) throw ValidationError("cost multipliers must be at least 1");
  Instance out = inst;
  for (Medium m : {Medium::kFiber, Medium::kUav}) {
    ComponentPrices p = out.costs.at(m, Phase::kReservation);
    for (Rational* v : {&p.tx, &p.rx, &p.km, &p.si, &p.md}) *v *= factor;
    out.costs.set(m, Phase::kReservation, p);
  }
  return out;
}

inline std::vector<SweepRow> cost_inflation_sweep(const Instance& inst,
                                                  const std::vector<Rational>& multipliers,
                                                  const SolverParams& params = {}) {
  validate_grid(multipliers, 1, false, "cost multiplier");
  std::vector<SweepRow> rows;
  for (const Rational& k : multipliers) {
    rows.push_back(detail::solve_row(inflate_costs(inst, k), k, params));
  }
  return rows;
}

// --- grids -----------------------------------------------------------------------

// "0,5,10" lists the values; "0:80:5" runs from 0 to 80 inclusive in steps of 5.
inline std::vector<Rational> parse_grid(std::string_view text) {
  std::vector<Rational> out;
  if (text.find(':') != std::string_view::npos) {
    std::vector<Rational> parts;
    std::size_t start = 0;
    while (true) {
      std::size_t colon = text.find(':', start);
      parts.push_back(parse_rational(text.substr(start, colon - start)));
      if (colon == std::string_view::npos) break;
      start = colon + 1;
    }
    if (parts.size() != 3 || parts[2] <= 0 || parts[1] < parts[0]) {
      throw ParseError("grid range must read start:stop:step with step > 0 and stop >= start");
    }
    for (Rational v = parts[0]; v <= parts[1]; v += parts[2]) out.push_back(v);
    return out;
  }
  std::size_t start = 0;
  while (true) {
    std::size_t comma = text.find(',', start);
    out.push_back(parse_rational(text.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

// Grid stored in an instance document under experiments.<key>, if any.
inline std::optional<std::vector<Rational>> document_grid(const json_util::Json& doc,
                                                          const std::string& key) {
  if (!doc.contains("experiments") || !doc["experiments"].contains(key)) return std::nullopt;
  const auto& jg = doc["experiments"][key];
  const std::string path = "experiments." + key;
  if (!jg.is_array()) throw ParseError(path + ": expected an array");
  std::vector<Rational> grid;
  for (std::size_t i = 0; i < jg.size(); ++i) {
    grid.push_back(json_util::to_rational(jg[i], path + "[" + std::to_string(i) + "]"));
  }
  return grid;
}

// --- CSV -------------------------------------------------------------------------

inline constexpr std::string_view kSweepSchema = "qkdplan-sweep/1";

inline std::string sweep_csv(std::string_view kind, const std::vector<SweepRow>& rows) {
  std::ostringstream s;
  s << "#schema=" << kSweepSchema << "\n#kind=" << kind << "\n";
  s << "value,status,first_stage,second_stage_expected,on_demand_expected,total";
  for (Medium m : kAllMedia) {
    for (const char* phase : {"reserved", "utilized", "ondemand"}) {
      for (const char* k : {"qkd", "km"}) s << "," << medium_name(m) << "_" << phase << "_" << k;
    }
  }
  s << ",routes,note\n";
  auto clean = [](std::string text) {
    for (char& c : text) {
      if (c == ',' || c == '\n' || c == '"') c = ';';
    }
    return text;
  };
  for (const SweepRow& r : rows) {
    s << format_rational(r.value) << "," << r.status;
    if (r.solved()) {
      const CostBreakdown& c = r.cost();
      for (const Rational* v : {&c.first_stage, &c.second_stage_expected, &c.on_demand_expected,
                                &c.total}) {
        s << "," << format_rational(*v);
      }
      for (const MediumUsage& u : r.usage) {
        for (const Rational* v : {&u.reserved_qkd, &u.reserved_km, &u.utilized_qkd,
                                  &u.utilized_km, &u.ondemand_qkd, &u.ondemand_km}) {
          s << "," << format_rational(*v);
        }
      }
    } else {
      s << std::string(4 + 18, ',');
    }
    s << "," << clean(r.routes) << "," << clean(r.note) << "\n";
  }
  return s.str();
}

}  // namespace qkdplan
