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

// Equipment counts and prices of MDI-QKD links.
//
// A link of length e split into spans of length theta needs s = ceil(e/theta)
// spans. Each of the P parallel QKD links needs two transmitters and one
// receiver per span; the key-management chain needs s+1 local key managers,
// s-1 security infrastructures at the intermediate trusted relays and
// s + (s-1) MUX/DEMUX pairs. A QKD link occupies three wavelengths and a KM
// link one, so the channel length of a link is 3*P*e + e.
//
// The stochastic program prices wavelengths, not whole links: every unit cost
// here is evaluated with P = 1 and multiplied by wavelength counts later.

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>

#include "qkdplan/json_util.hpp"
#include "qkdplan/rational.hpp"
#include "qkdplan/topology.hpp"

namespace qkdplan {

struct MediumParams {
  Rational theta_km;                // transmitter-to-transmitter span length
  Rational key_rate_capacity_kbps;  // secret-key rate of one parallel QKD link
};

// Per-medium span lengths: 160 km fiber, 1 km UAV, 1000 km satellite.
class MediaParams {
 public:
  MediaParams() {
    params_[medium_index(Medium::kFiber)] = {Rational(160), Rational(1)};
    params_[medium_index(Medium::kUav)] = {Rational(1), Rational(1)};
    params_[medium_index(Medium::kSatellite)] = {Rational(1000), Rational(1)};
  }

  const MediumParams& operator[](Medium m) const { return params_[medium_index(m)]; }

  void set(Medium m, MediumParams p) {
    if (p.theta_km <= 0) throw ValidationError("theta_km must be positive");
    if (p.key_rate_capacity_kbps <= 0) {
      throw ValidationError("key_rate_capacity_kbps must be positive");
    }
    params_[medium_index(m)] = std::move(p);
  }

 private:
  std::array<MediumParams, 3> params_;
};

enum class Phase { kReservation, kUtilization, kOnDemand };

inline constexpr std::array<Phase, 3> kAllPhases = {Phase::kReservation, Phase::kUtilization,
                                                    Phase::kOnDemand};

inline std::string_view phase_name(Phase phase) {
  switch (phase) {
    case Phase::kReservation: return "reservation";
    case Phase::kUtilization: return "utilization";
    case Phase::kOnDemand: return "on_demand";
  }
  return "?";
}

// Unit prices of one phase: devices (tx, rx, km, si, md) and channel per km
// per wavelength (ch).
struct ComponentPrices {
  Rational tx, rx, km, si, md, ch;

  ComponentPrices scaled(const Rational& factor) const {
    return {tx * factor, rx * factor, km * factor, si * factor, md * factor, ch * factor};
  }

  friend bool operator==(const ComponentPrices&, const ComponentPrices&) = default;
};

class CostTable {
 public:
  // Reservation prices of the five components plus channel, from the
  // published cost table. Utilization shares the reservation values and
  // on-demand prices are twice the reservation prices.
  static CostTable table_one() {
    CostTable t;
    const ComponentPrices fiber{1500, 2250, 1200, 150, 300, 1};
    const ComponentPrices uav{3000, 4500, 2400, 300, 600, 2};
    const ComponentPrices satellite{12000, 22000, 10000, 2000, 1000, 20};
    for (auto [medium, prices] : {std::pair{Medium::kFiber, fiber}, std::pair{Medium::kUav, uav},
                                  std::pair{Medium::kSatellite, satellite}}) {
      t.set(medium, Phase::kReservation, prices);
      t.set(medium, Phase::kUtilization, prices);
      t.set(medium, Phase::kOnDemand, prices.scaled(2));
    }
    return t;
  }

  bool has(Medium m, Phase p) const { return entries_.count({m, p}) > 0; }

  const ComponentPrices& at(Medium m, Phase p) const {
    auto it = entries_.find({m, p});
    if (it == entries_.end()) {
      throw ValidationError("cost table has no " + std::string(phase_name(p)) + " entry for " +
                            std::string(medium_name(m)));
    }
    return it->second;
  }

  void set(Medium m, Phase p, ComponentPrices prices) {
    for (const Rational* v : {&prices.tx, &prices.rx, &prices.km, &prices.si, &prices.md,
                              &prices.ch}) {
      if (*v < 0) throw ValidationError("cost table entries must be nonnegative");
    }
    entries_[{m, p}] = std::move(prices);
  }

  friend bool operator==(const CostTable&, const CostTable&) = default;

 private:
  std::map<std::pair<Medium, Phase>, ComponentPrices> entries_;
};

struct ComponentCounts {
  std::int64_t tx = 0;
  std::int64_t rx = 0;
  std::int64_t lkm = 0;
  std::int64_t si = 0;
  std::int64_t md = 0;

  ComponentCounts& operator+=(const ComponentCounts& o) {
    tx += o.tx;
    rx += o.rx;
    lkm += o.lkm;
    si += o.si;
    md += o.md;
    return *this;
  }

  friend bool operator==(const ComponentCounts&, const ComponentCounts&) = default;
};

// Number of parallel QKD links needed for `rate_kbps`: ceil(rate / K).
inline std::int64_t parallel_links(const Rational& rate_kbps, const MediumParams& medium) {
  if (medium.key_rate_capacity_kbps <= 0) {
    throw ValidationError("key_rate_capacity_kbps must be positive");
  }
  if (rate_kbps <= 0) return 0;
  return to_int64(ceil_of(rate_kbps / medium.key_rate_capacity_kbps));
}

// ceil(e / theta).
inline std::int64_t span_count(const Rational& distance_km, const Rational& theta_km) {
  if (theta_km <= 0) throw ValidationError("theta_km must be positive");
  if (distance_km <= 0) return 0;
  return to_int64(ceil_of(distance_km / theta_km));
}

inline ComponentCounts component_counts_link(std::int64_t parallel, const Rational& distance_km,
                                             const MediumParams& medium) {
  if (parallel < 0) throw ValidationError("parallel link count must be nonnegative");
  const std::int64_t s = span_count(distance_km, medium.theta_km);
  const std::int64_t relays = std::max<std::int64_t>(s - 1, 0);
  return ComponentCounts{2 * parallel * s, parallel * s, s + 1, relays, s + relays};
}

// Sums the per-link counts over a route. Each link is priced with the span
// length of its own medium.
inline ComponentCounts component_counts_route(std::int64_t parallel, std::span<const Link> route,
                                              const MediaParams& media) {
  ComponentCounts total;
  for (std::size_t i = 0; i < route.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (route[i].from == route[j].from && route[i].to == route[j].to &&
          route[i].medium == route[j].medium) {
        throw ValidationError("route lists the same link twice");
      }
    }
    total += component_counts_link(parallel, route[i].distance_km, media[route[i].medium]);
  }
  return total;
}

// Wavelength-kilometres of one link: 3*P*e for the QKD links plus e for the KM link.
inline Rational channel_cost_link(std::int64_t parallel, const Rational& distance_km) {
  if (parallel < 0) throw ValidationError("parallel link count must be nonnegative");
  return Rational(3 * parallel) * distance_km + distance_km;
}

inline Rational channel_cost_route(std::int64_t parallel, std::span<const Link> route) {
  Rational total = 0;
  for (const Link& l : route) total += channel_cost_link(parallel, l.distance_km);
  return total;
}

// (1/3)(A_tx b_tx + A_rx b_rx): transmitter/receiver cost per QKD wavelength.
inline Rational qkd_device_cost(const ComponentCounts& counts, const ComponentPrices& prices) {
  return (Rational(counts.tx) * prices.tx + Rational(counts.rx) * prices.rx) / 3;
}

// A_km b_km + A_si b_si + A_md b_md: key-management chain cost.
inline Rational km_device_cost(const ComponentCounts& counts, const ComponentPrices& prices) {
  return Rational(counts.lkm) * prices.km + Rational(counts.si) * prices.si +
         Rational(counts.md) * prices.md;
}

// Per-wavelength prices of one link for all three phases. tau/phi/psi price a
// QKD wavelength (reservation/utilization/on-demand), lambda/delta/xi a KM
// wavelength, ch_* the channel per km per wavelength.
struct PhaseUnitCosts {
  Rational tau, lambda, phi, delta, psi, xi;
  Rational ch_r, ch_e, ch_o;
};

inline PhaseUnitCosts phase_unit_costs(const MediumParams& params, const CostTable& table,
                                       Medium medium, const Rational& distance_km) {
  const ComponentCounts unit = component_counts_link(1, distance_km, params);
  const ComponentPrices& r = table.at(medium, Phase::kReservation);
  const ComponentPrices& e = table.at(medium, Phase::kUtilization);
  const ComponentPrices& o = table.at(medium, Phase::kOnDemand);
  return PhaseUnitCosts{qkd_device_cost(unit, r), km_device_cost(unit, r),
                        qkd_device_cost(unit, e), km_device_cost(unit, e),
                        qkd_device_cost(unit, o), km_device_cost(unit, o),
                        r.ch, e.ch, o.ch};
}

// --- cost-table documents ----------------------------------------------------
//
// {"fiber": {"reservation": {"tx": 1500, ...}, "utilization": {...},
//            "on_demand": {...}}, "uav": {...}, "satellite": {...}}
// Entries override `base`; absent components keep their base value.

inline CostTable cost_table_from_json(const json_util::Json& doc, CostTable base) {
  if (!doc.is_object()) throw ParseError("costs: expected an object");
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    Medium medium;
    try {
      medium = parse_medium(it.key());
    } catch (const ParseError& e) {
      throw ParseError("costs." + it.key() + ": " + e.what());
    }
    const auto& jm = it.value();
    if (!jm.is_object()) throw ParseError("costs." + it.key() + ": expected an object");
    for (auto pit = jm.begin(); pit != jm.end(); ++pit) {
      std::string path = "costs." + it.key() + "." + pit.key();
      Phase phase;
      if (pit.key() == "reservation") {
        phase = Phase::kReservation;
      } else if (pit.key() == "utilization") {
        phase = Phase::kUtilization;
      } else if (pit.key() == "on_demand") {
        phase = Phase::kOnDemand;
      } else {
        throw ParseError(path + ": unknown phase");
      }
      ComponentPrices prices = base.has(medium, phase) ? base.at(medium, phase) : ComponentPrices{};
      const auto& jp = pit.value();
      if (!jp.is_object()) throw ParseError(path + ": expected an object");
      for (auto cit = jp.begin(); cit != jp.end(); ++cit) {
        const std::string& k = cit.key();
        Rational v = json_util::to_rational(cit.value(), path + "." + k);
        if (k == "tx") {
          prices.tx = v;
        } else if (k == "rx") {
          prices.rx = v;
        } else if (k == "km") {
          prices.km = v;
        } else if (k == "si") {
          prices.si = v;
        } else if (k == "md") {
          prices.md = v;
        } else if (k == "ch") {
          prices.ch = v;
        } else {
          throw ParseError(path + "." + k + ": unknown component");
        }
      }
      base.set(medium, phase, prices);
    }
  }
  return base;
}

inline CostTable load_cost_table(std::string_view document,
                                 CostTable base = CostTable::table_one()) {
  return cost_table_from_json(json_util::parse_document(document), std::move(base));
}

inline json_util::Json cost_table_to_json(const CostTable& table) {
  using json_util::Json;
  Json doc = Json::object();
  for (Medium m : kAllMedia) {
    Json jm = Json::object();
    for (Phase p : kAllPhases) {
      if (!table.has(m, p)) continue;
      const ComponentPrices& c = table.at(m, p);
      jm[std::string(phase_name(p))] = {{"tx", json_util::from_rational(c.tx)},
                                        {"rx", json_util::from_rational(c.rx)},
                                        {"km", json_util::from_rational(c.km)},
                                        {"si", json_util::from_rational(c.si)},
                                        {"md", json_util::from_rational(c.md)},
                                        {"ch", json_util::from_rational(c.ch)}};
    }
    if (!jm.empty()) doc[std::string(medium_name(m))] = std::move(jm);
  }
  return doc;
}

}  // namespace qkdplan
