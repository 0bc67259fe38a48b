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

// Deterministic equivalent of the two-stage program and its decoding.
//
// Column naming, with p in {x, y, z} for fiber, UAV and satellite, i->n the
// link endpoints, f the request id and s the scenario index:
//   w_i_n_f                      route indicator of arc i->n
//   prqk_i_n_f, prkm_i_n_f       reserved QKD / KM wavelengths (first stage)
//   peqk_i_n_f_s, pekm_i_n_f_s   utilized reserved wavelengths
//   poqk_i_n_f_s, pokm_i_n_f_s   on-demand wavelengths
// Columns are ordered by family, then request, link and scenario.
//
// Products of the route indicator with wavelength counts are linearized as
// v <= C * w, which is exact because w is binary and 0 <= v <= C.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "qkdplan/branch_and_bound.hpp"
#include "qkdplan/cost_model.hpp"
#include "qkdplan/instance.hpp"
#include "qkdplan/milp_model.hpp"
#include "qkdplan/rational.hpp"
#include "qkdplan/scenario.hpp"
#include "qkdplan/topology.hpp"

namespace qkdplan {

struct SpColumns {
  std::vector<std::vector<std::size_t>> w;    // [request][arc]
  std::vector<std::vector<std::size_t>> rqk;  // [request][link]
  std::vector<std::vector<std::size_t>> rkm;
  std::vector<std::vector<std::vector<std::size_t>>> eqk;  // [request][link][scenario]
  std::vector<std::vector<std::vector<std::size_t>>> ekm;
  std::vector<std::vector<std::vector<std::size_t>>> oqk;
  std::vector<std::vector<std::vector<std::size_t>>> okm;
};

struct SpModel {
  MilpModel model;
  SpColumns columns;
};

// Routing and reservations, i.e. everything decided before demand is seen.
struct FirstStage {
  std::vector<std::vector<bool>> route;        // [request][arc]
  std::vector<std::vector<std::int64_t>> rqk;  // [request][link]
  std::vector<std::vector<std::int64_t>> rkm;
};

// Per-link prices with the channel term folded in:
// reservation tau + e*b_ch^r, and so on for each family.
struct LinkPrices {
  Rational rqk, rkm, eqk, ekm, oqk, okm;
};

inline std::vector<LinkPrices> link_prices(const Instance& inst) {
  std::vector<LinkPrices> out;
  for (const Link& l : inst.topology.links()) {
    PhaseUnitCosts u = phase_unit_costs(inst.media[l.medium], inst.costs, l.medium, l.distance_km);
    const Rational& e = l.distance_km;
    out.push_back({u.tau + e * u.ch_r, u.lambda + e * u.ch_r, u.phi + e * u.ch_e,
                   u.delta + e * u.ch_e, u.psi + e * u.ch_o, u.xi + e * u.ch_o});
  }
  return out;
}

// Parallel QKD links needed on an arc: the smallest key-rate capacity among
// the arc's media decides, so any mix of its media is sufficient.
inline std::int64_t arc_parallel_links(const Instance& inst, const Arc& arc,
                                       const Rational& rate) {
  const Link& first = inst.topology.link(arc.links.front());
  MediumParams p = inst.media[first.medium];
  for (std::size_t l : arc.links) {
    const MediumParams& q = inst.media[inst.topology.link(l).medium];
    if (q.key_rate_capacity_kbps < p.key_rate_capacity_kbps) p = q;
  }
  return parallel_links(rate, p);
}

inline bool link_available(const Link& link, const Scenario& scenario) {
  return link.medium != Medium::kSatellite || satellite_available(scenario);
}

namespace detail {

inline std::string arc_tag(const Link& l, int request_id) {
  return std::to_string(l.from) + "_" + std::to_string(l.to) + "_" + std::to_string(request_id);
}

inline std::string family(const Link& l, const char* suffix) {
  return std::string(1, medium_prefix(l.medium)) + suffix;
}

}  // namespace detail

// Column families in model order. `fixed` pins the first stage through bounds.
inline SpColumns add_sp_columns(const Instance& inst, MilpModel& model,
                                const FirstStage* fixed = nullptr) {
  const Topology& topo = inst.topology;
  const auto prices = link_prices(inst);
  const std::size_t nf = inst.requests.size();
  const std::size_t nl = topo.links().size();
  const std::size_t ns = inst.scenarios.size();
  SpColumns cols;
  cols.w.resize(nf);
  cols.rqk.resize(nf);
  cols.rkm.resize(nf);
  cols.eqk.assign(nf, std::vector<std::vector<std::size_t>>(nl));
  cols.ekm = cols.oqk = cols.okm = cols.eqk;

  for (std::size_t f = 0; f < nf; ++f) {
    const Request& r = inst.requests[f];
    for (std::size_t a = 0; a < topo.arcs().size(); ++a) {
      const Arc& arc = topo.arc(a);
      Column c;
      c.name = "w_" + std::to_string(arc.from) + "_" + std::to_string(arc.to) + "_" +
               std::to_string(r.id);
      c.type = VarType::kBinary;
      c.cost = inst.routing_cost_of(arc.to, r.id);
      std::size_t j = model.add_column(std::move(c));
      if (fixed) {
        Rational v = fixed->route[f][a] ? 1 : 0;
        model.set_bounds(j, v, v);
      }
      cols.w[f].push_back(j);
    }
  }
  for (std::size_t f = 0; f < nf; ++f) {
    const Request& r = inst.requests[f];
    for (std::size_t l = 0; l < nl; ++l) {
      const Link& link = topo.link(l);
      const std::string tag = detail::arc_tag(link, r.id);
      Column q{detail::family(link, "rqk_") + tag, Rational(0), Rational(link.caps.qkd_reserved_max),
               VarType::kInteger, prices[l].rqk};
      Column k{detail::family(link, "rkm_") + tag, Rational(0), Rational(link.caps.km_reserved_max),
               VarType::kInteger, prices[l].rkm};
      if (fixed) {
        q.lower = q.upper = Rational(fixed->rqk[f][l]);
        k.lower = k.upper = Rational(fixed->rkm[f][l]);
      }
      cols.rqk[f].push_back(model.add_column(std::move(q)));
      cols.rkm[f].push_back(model.add_column(std::move(k)));
    }
  }
  for (std::size_t f = 0; f < nf; ++f) {
    const Request& r = inst.requests[f];
    for (std::size_t l = 0; l < nl; ++l) {
      const Link& link = topo.link(l);
      const std::string tag = detail::arc_tag(link, r.id);
      const bool on_route = !fixed || fixed->route[f][topo.arc_of_link(l)];
      for (std::size_t s = 0; s < ns; ++s) {
        const Scenario& sc = inst.scenarios[s];
        const Rational& p = sc.probability;
        const bool open = on_route && link_available(link, sc);
        const std::string suffix = tag + "_" + std::to_string(s);
        std::int64_t eqk_cap = link.caps.qkd_reserved_max;
        std::int64_t ekm_cap = link.caps.km_reserved_max;
        if (fixed) {
          eqk_cap = std::min(eqk_cap, fixed->rqk[f][l]);
          ekm_cap = std::min(ekm_cap, fixed->rkm[f][l]);
        }
        auto add = [&](const char* fam, std::int64_t cap, const Rational& price) {
          Column c{detail::family(link, fam) + suffix, Rational(0), Rational(open ? cap : 0),
                   VarType::kInteger, p * price};
          return model.add_column(std::move(c));
        };
        cols.eqk[f][l].push_back(add("eqk_", eqk_cap, prices[l].eqk));
        cols.ekm[f][l].push_back(add("ekm_", ekm_cap, prices[l].ekm));
        cols.oqk[f][l].push_back(add("oqk_", link.caps.qkd_ondemand_max, prices[l].oqk));
        cols.okm[f][l].push_back(add("okm_", link.caps.km_ondemand_max, prices[l].okm));
      }
    }
  }
  return cols;
}

// Per request: the source emits one unit of route, the destination absorbs
// it, transit nodes conserve it, and no node is left more than once.
inline std::vector<Row> flow_rows(const Instance& inst, const SpColumns& cols) {
  std::vector<Row> rows;
  const Topology& topo = inst.topology;
  for (std::size_t f = 0; f < inst.requests.size(); ++f) {
    const Request& r = inst.requests[f];
    for (const Node& n : topo.nodes()) {
      Row bal;
      bal.name = "flow_" + std::to_string(n.id) + "_" + std::to_string(r.id);
      bal.sense = Sense::kEqual;
      for (std::size_t a : topo.outgoing_arcs(n.id)) bal.terms.push_back({cols.w[f][a], 1});
      for (std::size_t a : topo.incoming_arcs(n.id)) bal.terms.push_back({cols.w[f][a], -1});
      bal.rhs = n.id == r.source ? 1 : n.id == r.destination ? -1 : 0;
      if (!bal.terms.empty() || bal.rhs != 0) rows.push_back(std::move(bal));
    }
    for (const Node& n : topo.nodes()) {
      if (topo.outgoing_arcs(n.id).empty()) continue;
      Row once;
      once.name = "loop_" + std::to_string(n.id) + "_" + std::to_string(r.id);
      once.sense = Sense::kLessEqual;
      once.rhs = 1;
      for (std::size_t a : topo.outgoing_arcs(n.id)) once.terms.push_back({cols.w[f][a], 1});
      rows.push_back(std::move(once));
    }
  }
  return rows;
}

// Off-route forcing (v <= C*w), utilization within reservation, and, with
// two or more requests, the shared per-link capacity of every pool.
inline std::vector<Row> capacity_and_linking_rows(const Instance& inst, const SpColumns& cols) {
  std::vector<Row> rows;
  const Topology& topo = inst.topology;
  const std::size_t nf = inst.requests.size();
  const std::size_t ns = inst.scenarios.size();
  auto link_row = [&](const std::string& name, std::size_t v, std::size_t w, std::int64_t cap) {
    rows.push_back(Row{name, {{v, 1}, {w, Rational(-cap)}}, Sense::kLessEqual, 0});
  };
  for (std::size_t f = 0; f < nf; ++f) {
    const int id = inst.requests[f].id;
    for (std::size_t l = 0; l < topo.links().size(); ++l) {
      const Link& link = topo.link(l);
      const std::size_t w = cols.w[f][topo.arc_of_link(l)];
      const std::string tag = detail::arc_tag(link, id);
      link_row(detail::family(link, "rqk_link_") + tag, cols.rqk[f][l], w,
               link.caps.qkd_reserved_max);
      link_row(detail::family(link, "rkm_link_") + tag, cols.rkm[f][l], w,
               link.caps.km_reserved_max);
      for (std::size_t s = 0; s < ns; ++s) {
        const std::string suffix = tag + "_" + std::to_string(s);
        rows.push_back(Row{detail::family(link, "eqk_use_") + suffix,
                           {{cols.eqk[f][l][s], 1}, {cols.rqk[f][l], -1}}, Sense::kLessEqual, 0});
        rows.push_back(Row{detail::family(link, "ekm_use_") + suffix,
                           {{cols.ekm[f][l][s], 1}, {cols.rkm[f][l], -1}}, Sense::kLessEqual, 0});
        link_row(detail::family(link, "oqk_link_") + suffix, cols.oqk[f][l][s], w,
                 link.caps.qkd_ondemand_max);
        link_row(detail::family(link, "okm_link_") + suffix, cols.okm[f][l][s], w,
                 link.caps.km_ondemand_max);
      }
    }
  }
  if (nf < 2) return rows;
  for (std::size_t l = 0; l < topo.links().size(); ++l) {
    const Link& link = topo.link(l);
    const std::string tag = std::to_string(link.from) + "_" + std::to_string(link.to);
    auto aggregate = [&](const std::string& name, auto pick, std::int64_t cap) {
      Row r{name, {}, Sense::kLessEqual, Rational(cap)};
      for (std::size_t f = 0; f < nf; ++f) r.terms.push_back({pick(f), 1});
      rows.push_back(std::move(r));
    };
    aggregate(detail::family(link, "rqk_cap_") + tag, [&](std::size_t f) { return cols.rqk[f][l]; },
              link.caps.qkd_reserved_max);
    aggregate(detail::family(link, "rkm_cap_") + tag, [&](std::size_t f) { return cols.rkm[f][l]; },
              link.caps.km_reserved_max);
    for (std::size_t s = 0; s < ns; ++s) {
      const std::string suffix = tag + "_" + std::to_string(s);
      aggregate(detail::family(link, "eqk_cap_") + suffix,
                [&](std::size_t f) { return cols.eqk[f][l][s]; }, link.caps.qkd_reserved_max);
      aggregate(detail::family(link, "ekm_cap_") + suffix,
                [&](std::size_t f) { return cols.ekm[f][l][s]; }, link.caps.km_reserved_max);
      aggregate(detail::family(link, "oqk_cap_") + suffix,
                [&](std::size_t f) { return cols.oqk[f][l][s]; }, link.caps.qkd_ondemand_max);
      aggregate(detail::family(link, "okm_cap_") + suffix,
                [&](std::size_t f) { return cols.okm[f][l][s]; }, link.caps.km_ondemand_max);
    }
  }
  return rows;
}

// Every arc of the route carries the demanded parallel links in every
// scenario: QKD wavelengths >= w_qkd*P*w and KM wavelengths >= w_kml*P*w,
// summed over the arc's media and over utilized plus on-demand pools.
inline std::vector<Row> demand_rows(const Instance& inst, const SpColumns& cols) {
  std::vector<Row> rows;
  const Topology& topo = inst.topology;
  for (std::size_t f = 0; f < inst.requests.size(); ++f) {
    const Request& r = inst.requests[f];
    for (std::size_t a = 0; a < topo.arcs().size(); ++a) {
      const Arc& arc = topo.arc(a);
      for (std::size_t s = 0; s < inst.scenarios.size(); ++s) {
        const std::int64_t P = arc_parallel_links(inst, arc, inst.scenarios[s].rates_kbps.at(r.id));
        const std::string tag = std::to_string(arc.from) + "_" + std::to_string(arc.to) + "_" +
                                std::to_string(r.id) + "_" + std::to_string(s);
        Row q{"dqk_" + tag, {}, Sense::kGreaterEqual, 0};
        Row k{"dkm_" + tag, {}, Sense::kGreaterEqual, 0};
        for (std::size_t l : arc.links) {
          q.terms.push_back({cols.eqk[f][l][s], 1});
          q.terms.push_back({cols.oqk[f][l][s], 1});
          k.terms.push_back({cols.ekm[f][l][s], 1});
          k.terms.push_back({cols.okm[f][l][s], 1});
        }
        q.terms.push_back({cols.w[f][a], Rational(-inst.w_qkd * P)});
        k.terms.push_back({cols.w[f][a], Rational(-inst.w_kml * P)});
        rows.push_back(std::move(q));
        rows.push_back(std::move(k));
      }
    }
  }
  return rows;
}

inline void check_first_stage(const Instance& inst, const FirstStage& fs);

inline SpModel build_deterministic_equivalent(const Instance& inst,
                                              const FirstStage* fixed = nullptr) {
  inst.validate();
  if (fixed) check_first_stage(inst, *fixed);
  SpModel out;
  out.columns = add_sp_columns(inst, out.model, fixed);
  for (auto* gen : {&flow_rows, &capacity_and_linking_rows, &demand_rows}) {
    for (Row& r : (*gen)(inst, out.columns)) out.model.add_row(std::move(r));
  }
  return out;
}

// --- decoding ------------------------------------------------------------------

struct LinkAllocation {
  std::int64_t rqk = 0;
  std::int64_t rkm = 0;
  std::vector<std::int64_t> eqk, ekm, oqk, okm;  // per scenario

  bool empty() const {
    auto zero = [](const std::vector<std::int64_t>& v) {
      return std::all_of(v.begin(), v.end(), [](std::int64_t x) { return x == 0; });
    };
    return rqk == 0 && rkm == 0 && zero(eqk) && zero(ekm) && zero(oqk) && zero(okm);
  }
};

struct RoutePlan {
  int request_id = 0;
  std::vector<int> nodes;          // s_f ... d_f
  std::vector<std::size_t> arcs;   // arc indices along the route
};

struct CostBreakdown {
  Rational routing;                 // part of the first stage
  Rational first_stage;
  std::vector<Rational> second_stage;  // per scenario, unweighted
  Rational second_stage_expected;
  Rational on_demand_expected;      // on-demand part of the expected second stage
  Rational total;
};

struct PlanSolution {
  std::vector<RoutePlan> routes;                        // per request
  std::vector<std::vector<LinkAllocation>> allocation;  // [request][link]
  CostBreakdown cost;
  std::size_t dropped_arcs = 0;  // zero-cost cycles removed from the raw w values

  FirstStage first_stage(const Instance& inst) const {
    FirstStage fs;
    const std::size_t na = inst.topology.arcs().size();
    for (std::size_t f = 0; f < routes.size(); ++f) {
      std::vector<bool> on(na, false);
      for (std::size_t a : routes[f].arcs) on[a] = true;
      fs.route.push_back(std::move(on));
      std::vector<std::int64_t> q, k;
      for (const LinkAllocation& la : allocation[f]) {
        q.push_back(la.rqk);
        k.push_back(la.rkm);
      }
      fs.rqk.push_back(std::move(q));
      fs.rkm.push_back(std::move(k));
    }
    return fs;
  }
};

// Cost of a plan evaluated from the price tables, independent of the model.
inline CostBreakdown plan_cost(const Instance& inst, const std::vector<RoutePlan>& routes,
                               const std::vector<std::vector<LinkAllocation>>& alloc) {
  const auto prices = link_prices(inst);
  CostBreakdown c;
  for (std::size_t f = 0; f < routes.size(); ++f) {
    for (std::size_t a : routes[f].arcs) {
      c.routing += inst.routing_cost_of(inst.topology.arc(a).to, inst.requests[f].id);
    }
  }
  c.first_stage = c.routing;
  const std::size_t ns = inst.scenarios.size();
  c.second_stage.assign(ns, Rational(0));
  for (std::size_t f = 0; f < alloc.size(); ++f) {
    for (std::size_t l = 0; l < alloc[f].size(); ++l) {
      const LinkAllocation& la = alloc[f][l];
      const LinkPrices& pr = prices[l];
      c.first_stage += pr.rqk * la.rqk + pr.rkm * la.rkm;
      for (std::size_t s = 0; s < ns; ++s) {
        Rational od = pr.oqk * la.oqk[s] + pr.okm * la.okm[s];
        c.second_stage[s] += pr.eqk * la.eqk[s] + pr.ekm * la.ekm[s] + od;
        c.on_demand_expected += inst.scenarios[s].probability * od;
      }
    }
  }
  for (std::size_t s = 0; s < ns; ++s) {
    c.second_stage_expected += inst.scenarios[s].probability * c.second_stage[s];
  }
  c.total = c.first_stage + c.second_stage_expected;
  return c;
}

inline bool is_simple_path(const Instance& inst, const Request& r, const RoutePlan& route) {
  if (route.nodes.size() < 2 || route.nodes.front() != r.source ||
      route.nodes.back() != r.destination || route.arcs.size() + 1 != route.nodes.size()) {
    return false;
  }
  std::set<int> seen(route.nodes.begin(), route.nodes.end());
  if (seen.size() != route.nodes.size()) return false;
  for (std::size_t h = 0; h < route.arcs.size(); ++h) {
    const Arc& arc = inst.topology.arc(route.arcs[h]);
    if (arc.from != route.nodes[h] || arc.to != route.nodes[h + 1]) return false;
  }
  return true;
}

// Decodes a feasible assignment. Raises Error when the route indicators do
// not describe a path or the recomputed cost differs from the model objective.
inline PlanSolution extract_solution(const Instance& inst, const SpModel& sp,
                                     const std::vector<Rational>& values) {
  if (auto bad = sp.model.first_violation(values)) {
    throw Error("assignment is not feasible: " + *bad);
  }
  const Topology& topo = inst.topology;
  const SpColumns& cols = sp.columns;
  const std::size_t ns = inst.scenarios.size();
  auto iv = [&](std::size_t j) { return to_int64(values[j].get_num()); };

  PlanSolution plan;
  for (std::size_t f = 0; f < inst.requests.size(); ++f) {
    const Request& r = inst.requests[f];
    RoutePlan route;
    route.request_id = r.id;
    route.nodes.push_back(r.source);
    std::set<int> visited{r.source};
    int at = r.source;
    while (at != r.destination) {
      std::optional<std::size_t> next;
      for (std::size_t a : topo.outgoing_arcs(at)) {
        if (iv(cols.w[f][a]) == 1) {
          if (next) throw Error("request " + std::to_string(r.id) + " leaves node " +
                                std::to_string(at) + " twice");
          next = a;
        }
      }
      if (!next) {
        throw Error("route of request " + std::to_string(r.id) + " stops at node " +
                    std::to_string(at));
      }
      at = topo.arc(*next).to;
      if (!visited.insert(at).second) {
        throw Error("route of request " + std::to_string(r.id) + " revisits node " +
                    std::to_string(at));
      }
      route.arcs.push_back(*next);
      route.nodes.push_back(at);
    }
    std::vector<bool> on_route(topo.arcs().size(), false);
    for (std::size_t a : route.arcs) on_route[a] = true;

    std::vector<LinkAllocation> alloc(topo.links().size());
    for (std::size_t l = 0; l < topo.links().size(); ++l) {
      LinkAllocation& la = alloc[l];
      la.rqk = iv(cols.rqk[f][l]);
      la.rkm = iv(cols.rkm[f][l]);
      for (std::size_t s = 0; s < ns; ++s) {
        la.eqk.push_back(iv(cols.eqk[f][l][s]));
        la.ekm.push_back(iv(cols.ekm[f][l][s]));
        la.oqk.push_back(iv(cols.oqk[f][l][s]));
        la.okm.push_back(iv(cols.okm[f][l][s]));
      }
    }
    // Arcs selected off the path can only form cycles disjoint from it; they
    // are harmless (and dropped) only when they cost nothing.
    for (std::size_t a = 0; a < topo.arcs().size(); ++a) {
      if (on_route[a] || iv(cols.w[f][a]) == 0) continue;
      bool free = inst.routing_cost_of(topo.arc(a).to, r.id) == 0;
      for (std::size_t l : topo.arc(a).links) free = free && alloc[l].empty();
      if (!free) {
        throw Error("request " + std::to_string(r.id) + " selects arc " +
                    std::to_string(topo.arc(a).from) + "->" + std::to_string(topo.arc(a).to) +
                    " off its path");
      }
      ++plan.dropped_arcs;
    }
    plan.routes.push_back(std::move(route));
    plan.allocation.push_back(std::move(alloc));
  }
  plan.cost = plan_cost(inst, plan.routes, plan.allocation);
  const Rational solver_objective = sp.model.objective_value(values);
  if (plan.cost.total != solver_objective) {
    throw Error("recomputed cost " + format_rational(plan.cost.total) +
                " differs from the model objective " + format_rational(solver_objective));
  }
  return plan;
}

struct SolveOutcome {
  MilpResult milp;
  std::optional<PlanSolution> plan;
};

inline SolveOutcome solve_instance(const Instance& inst, const SolverParams& params = {}) {
  SpModel sp = build_deterministic_equivalent(inst);
  SolveOutcome out;
  out.milp = solve_milp(sp.model, params);
  if (out.milp.has_solution()) out.plan = extract_solution(inst, sp, out.milp.values);
  return out;
}

// --- fixed first stage ------------------------------------------------------------

inline void check_first_stage(const Instance& inst, const FirstStage& fs) {
  const Topology& topo = inst.topology;
  const std::size_t nf = inst.requests.size();
  if (fs.route.size() != nf || fs.rqk.size() != nf || fs.rkm.size() != nf) {
    throw ValidationError("first stage does not cover every request");
  }
  for (std::size_t f = 0; f < nf; ++f) {
    const Request& r = inst.requests[f];
    if (fs.route[f].size() != topo.arcs().size() || fs.rqk[f].size() != topo.links().size() ||
        fs.rkm[f].size() != topo.links().size()) {
      throw ValidationError("first stage has the wrong shape");
    }
    for (const Node& n : topo.nodes()) {
      int out = 0;
      int in = 0;
      for (std::size_t a : topo.outgoing_arcs(n.id)) out += fs.route[f][a] ? 1 : 0;
      for (std::size_t a : topo.incoming_arcs(n.id)) in += fs.route[f][a] ? 1 : 0;
      int want = n.id == r.source ? 1 : n.id == r.destination ? -1 : 0;
      if (out - in != want || out > 1) {
        throw ValidationError("fixed route of request " + std::to_string(r.id) +
                              " breaks flow balance at node " + std::to_string(n.id));
      }
    }
    for (std::size_t l = 0; l < topo.links().size(); ++l) {
      const Link& link = topo.link(l);
      const bool on = fs.route[f][topo.arc_of_link(l)];
      if (fs.rqk[f][l] < 0 || fs.rkm[f][l] < 0) {
        throw ValidationError("negative fixed reservation");
      }
      if (fs.rqk[f][l] > (on ? link.caps.qkd_reserved_max : 0) ||
          fs.rkm[f][l] > (on ? link.caps.km_reserved_max : 0)) {
        throw ValidationError("fixed reservation on link " + std::to_string(link.from) + "->" +
                              std::to_string(link.to) + " exceeds its capacity");
      }
    }
  }
  if (nf >= 2) {
    for (std::size_t l = 0; l < topo.links().size(); ++l) {
      std::int64_t q = 0;
      std::int64_t k = 0;
      for (std::size_t f = 0; f < nf; ++f) {
        q += fs.rqk[f][l];
        k += fs.rkm[f][l];
      }
      if (q > topo.link(l).caps.qkd_reserved_max || k > topo.link(l).caps.km_reserved_max) {
        throw ValidationError("fixed reservations exceed the shared capacity of link " +
                              std::to_string(topo.link(l).from) + "->" +
                              std::to_string(topo.link(l).to));
      }
    }
  }
}

// Raised when a scenario cannot be served even with every on-demand wavelength.
class InfeasibleRecourse : public Error {
 public:
  InfeasibleRecourse(std::size_t scenario, Rational shortfall, const std::string& what)
      : Error(what), scenario_(scenario), shortfall_(std::move(shortfall)) {}
  std::size_t scenario() const { return scenario_; }
  const Rational& shortfall() const { return shortfall_; }

 private:
  std::size_t scenario_;
  Rational shortfall_;
};

namespace detail {

inline Instance single_scenario(const Instance& inst, std::size_t s) {
  Instance one = inst;
  Scenario sc = inst.scenarios[s];
  sc.probability = 1;
  one.scenarios.scenarios = {sc};
  return one;
}

// Explains a recourse failure: the first hop whose demand exceeds what the
// reservation plus the on-demand pool can supply.
inline InfeasibleRecourse recourse_failure(const Instance& inst, const FirstStage& fs,
                                           std::size_t s) {
  const Topology& topo = inst.topology;
  const Scenario& sc = inst.scenarios[s];
  std::string where = "scenario " + std::to_string(s) + " (" +
                      std::string(weather_name(sc.weather)) + ")";
  for (std::size_t f = 0; f < inst.requests.size(); ++f) {
    const Request& r = inst.requests[f];
    for (std::size_t a = 0; a < topo.arcs().size(); ++a) {
      if (!fs.route[f][a]) continue;
      const Arc& arc = topo.arc(a);
      const std::int64_t P = arc_parallel_links(inst, arc, sc.rates_kbps.at(r.id));
      std::int64_t q = 0;
      std::int64_t k = 0;
      for (std::size_t l : arc.links) {
        const Link& link = topo.link(l);
        if (!link_available(link, sc)) continue;
        q += std::min(fs.rqk[f][l], link.caps.qkd_reserved_max) + link.caps.qkd_ondemand_max;
        k += std::min(fs.rkm[f][l], link.caps.km_reserved_max) + link.caps.km_ondemand_max;
      }
      const std::int64_t need_q = inst.w_qkd * P;
      const std::int64_t need_k = inst.w_kml * P;
      std::string hop = std::to_string(arc.from) + "->" + std::to_string(arc.to);
      if (need_q > q) {
        return InfeasibleRecourse(s, Rational(need_q - q),
                                  where + ": request " + std::to_string(r.id) + " needs " +
                                      std::to_string(need_q) + " QKD wavelengths on " + hop +
                                      ", at most " + std::to_string(q) + " available (short " +
                                      std::to_string(need_q - q) + ")");
      }
      if (need_k > k) {
        return InfeasibleRecourse(s, Rational(need_k - k),
                                  where + ": request " + std::to_string(r.id) + " needs " +
                                      std::to_string(need_k) + " KM wavelengths on " + hop +
                                      ", at most " + std::to_string(k) + " available (short " +
                                      std::to_string(need_k - k) + ")");
      }
    }
  }
  return InfeasibleRecourse(s, Rational(0), where + ": shared link capacity exhausted");
}

}  // namespace detail

struct RecourseEvaluation {
  Rational first_stage;
  Rational second_stage_expected;
  Rational total;
  PlanSolution plan;  // first stage as given, second stage from each scenario's recourse
};

// Solves each scenario's recourse problem with the first stage held fixed and
// weights the results by scenario probability.
inline RecourseEvaluation evaluate_fixed_first_stage(const Instance& inst, const FirstStage& fs,
                                                     const SolverParams& params = {}) {
  inst.validate();
  check_first_stage(inst, fs);
  const Topology& topo = inst.topology;
  RecourseEvaluation ev;
  PlanSolution& plan = ev.plan;
  for (std::size_t f = 0; f < inst.requests.size(); ++f) {
    const Request& r = inst.requests[f];
    RoutePlan route{r.id, {r.source}, {}};
    int at = r.source;
    while (at != r.destination) {
      std::size_t next = topo.arcs().size();
      for (std::size_t a : topo.outgoing_arcs(at)) {
        if (fs.route[f][a]) next = a;
      }
      if (next == topo.arcs().size() || route.nodes.size() > topo.nodes().size()) {
        throw ValidationError("fixed route of request " + std::to_string(r.id) +
                              " is not a path");
      }
      at = topo.arc(next).to;
      route.arcs.push_back(next);
      route.nodes.push_back(at);
    }
    if (!is_simple_path(inst, r, route)) {
      throw ValidationError("fixed route of request " + std::to_string(r.id) +
                            " is not a simple path");
    }
    plan.routes.push_back(std::move(route));
    std::vector<LinkAllocation> alloc(topo.links().size());
    for (std::size_t l = 0; l < alloc.size(); ++l) {
      alloc[l].rqk = fs.rqk[f][l];
      alloc[l].rkm = fs.rkm[f][l];
    }
    plan.allocation.push_back(std::move(alloc));
  }
  for (std::size_t s = 0; s < inst.scenarios.size(); ++s) {
    Instance one = detail::single_scenario(inst, s);
    SpModel sp = build_deterministic_equivalent(one, &fs);
    MilpResult res = solve_milp(sp.model, params);
    if (res.status == MilpStatus::kInfeasible) throw detail::recourse_failure(inst, fs, s);
    if (!res.has_solution()) throw Error("recourse solve for scenario " + std::to_string(s) +
                                         " stopped at a limit");
    if (res.status != MilpStatus::kOptimal) {
      throw Error("recourse solve for scenario " + std::to_string(s) + " stopped at a limit");
    }
    PlanSolution part = extract_solution(one, sp, res.values);
    for (std::size_t f = 0; f < inst.requests.size(); ++f) {
      for (std::size_t l = 0; l < topo.links().size(); ++l) {
        const LinkAllocation& src = part.allocation[f][l];
        LinkAllocation& dst = plan.allocation[f][l];
        dst.eqk.push_back(src.eqk[0]);
        dst.ekm.push_back(src.ekm[0]);
        dst.oqk.push_back(src.oqk[0]);
        dst.okm.push_back(src.okm[0]);
      }
    }
  }
  plan.cost = plan_cost(inst, plan.routes, plan.allocation);
  ev.first_stage = plan.cost.first_stage;
  ev.second_stage_expected = plan.cost.second_stage_expected;
  ev.total = plan.cost.total;
  return ev;
}

// --- expected-value companion ----------------------------------------------------

// Each request's rate becomes the mean of its support, rounded up to the
// support grid (multiples of the rational gcd of the support values); the sky
// is clear. {1, 3} gives 2, {2, 4} gives 4, {5} gives 5.
inline Rational expected_value_rate(const std::vector<Rational>& support) {
  if (support.empty()) throw ValidationError("empty rate support");
  Integer num = 0;
  Integer den = 1;
  Rational mean = 0;
  for (const Rational& v : support) {
    mean += v;
    mpz_gcd(num.get_mpz_t(), num.get_mpz_t(), v.get_num_mpz_t());
    mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), v.get_den_mpz_t());
  }
  mean /= static_cast<unsigned long>(support.size());
  if (num == 0) return 0;
  Rational step(num, den);
  step.canonicalize();
  return step * Rational(ceil_of(mean / step));
}

inline Instance expected_value_instance(const Instance& inst) {
  Instance ev = inst;
  Scenario sc;
  sc.weather = Weather::kClear;
  sc.probability = 1;
  for (const Request& r : inst.requests) {
    auto it = inst.scenarios.rate_support.find(r.id);
    const std::vector<Rational>& support =
        it != inst.scenarios.rate_support.end() ? it->second : r.demand_kbps;
    Rational pick = expected_value_rate(support);
    sc.rates_kbps[r.id] = pick;
  }
  ev.scenarios.scenarios = {sc};
  ev.scenarios.weather_support = {{Weather::kClear, Rational(1)}};
  return ev;
}

inline SpModel expected_value_problem(const Instance& inst) {
  return build_deterministic_equivalent(expected_value_instance(inst));
}

}  // namespace qkdplan
