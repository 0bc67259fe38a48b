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

// A planning instance: topology, requests, scenarios, prices and options.
//
// Instance document (JSON), extending the topology document:
//   nodes, links, requests           as in topology.hpp
//   media:     {"fiber": {"theta_km": 160, "key_rate_capacity_kbps": 1}, ...}
//   costs:     cost-table overrides on top of the default table
//   scenarios: {"weather": ["clear", "cloudy"] or [{"state", "probability"}],
//               "limit": 100000, "sample": {"n": 200, "seed": 7}}
//   options:   {"w_qkd": 3, "w_kml": 1,
//               "routing_cost": [{"node": 3, "request": 0, "cost": 10}]}

#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qkdplan/cost_model.hpp"
#include "qkdplan/json_util.hpp"
#include "qkdplan/rational.hpp"
#include "qkdplan/scenario.hpp"
#include "qkdplan/topology.hpp"

namespace qkdplan {

struct Instance {
  Topology topology;
  std::vector<Request> requests;
  ScenarioSet scenarios;
  CostTable costs = CostTable::table_one();
  MediaParams media;
  // A^w per (entered node, request id); absent pairs cost 0.
  std::map<std::pair<int, int>, Rational> routing_cost;
  std::int64_t w_qkd = 3;  // wavelengths per parallel QKD link
  std::int64_t w_kml = 1;  // wavelengths per parallel KM need

  Rational routing_cost_of(int node, int request_id) const {
    auto it = routing_cost.find({node, request_id});
    return it == routing_cost.end() ? Rational(0) : it->second;
  }

  std::size_t request_index(int request_id) const {
    for (std::size_t f = 0; f < requests.size(); ++f) {
      if (requests[f].id == request_id) return f;
    }
    throw ValidationError("unknown request id " + std::to_string(request_id));
  }

  void validate() const {
    std::set<int> ids;
    for (const Request& r : requests) {
      validate_request(topology, r);
      if (!ids.insert(r.id).second) {
        throw ValidationError("duplicate request id " + std::to_string(r.id));
      }
    }
    if (w_qkd < 0 || w_kml < 0) throw ValidationError("demand multipliers must be nonnegative");
    for (Medium m : kAllMedia) {
      if (media[m].theta_km <= 0 || media[m].key_rate_capacity_kbps <= 0) {
        throw ValidationError("medium parameters must be positive");
      }
      for (Phase p : kAllPhases) costs.at(m, p);
    }
    for (const auto& [key, cost] : routing_cost) {
      if (!topology.has_node(key.first)) {
        throw ValidationError("routing cost names undefined node " + std::to_string(key.first));
      }
      if (!ids.count(key.second)) {
        throw ValidationError("routing cost names undefined request " +
                              std::to_string(key.second));
      }
      if (cost < 0) throw ValidationError("routing costs must be nonnegative");
    }
    Rational total = 0;
    for (std::size_t s = 0; s < scenarios.size(); ++s) {
      const Scenario& sc = scenarios[s];
      if (sc.probability <= 0) {
        throw ValidationError("scenario " + std::to_string(s) + " has nonpositive probability");
      }
      total += sc.probability;
      for (const Request& r : requests) {
        auto it = sc.rates_kbps.find(r.id);
        if (it == sc.rates_kbps.end()) {
          throw ValidationError("scenario " + std::to_string(s) + " has no rate for request " +
                                std::to_string(r.id));
        }
        if (it->second < 0) throw ValidationError("negative rate in scenario " + std::to_string(s));
      }
      for (std::size_t t = 0; t < s; ++t) {
        if (scenarios[t].rates_kbps == sc.rates_kbps && scenarios[t].weather == sc.weather) {
          throw ValidationError("scenarios " + std::to_string(t) + " and " + std::to_string(s) +
                                " coincide");
        }
      }
    }
    if (!scenarios.scenarios.empty() && total != 1) {
      throw ValidationError("scenario probabilities sum to " + format_rational(total));
    }
    for (const Request& r : requests) {
      auto it = scenarios.rate_support.find(r.id);
      if (it == scenarios.rate_support.end()) {
        if (scenarios.scenarios.empty()) continue;
        throw ValidationError("no rate support recorded for request " + std::to_string(r.id));
      }
      for (const Rational& v : r.demand_kbps) {
        if (std::find(it->second.begin(), it->second.end(), v) == it->second.end()) {
          throw ValidationError("demand of request " + std::to_string(r.id) +
                                " is outside the scenario rate support");
        }
      }
    }
  }
};

inline RateSupport rate_support_of(const std::vector<Request>& requests) {
  RateSupport support;
  for (const Request& r : requests) support[r.id] = r.demand_kbps;
  return support;
}

struct LoadOptions {
  std::optional<std::uint64_t> seed;  // replaces the document's sampling seed
};

namespace detail {

inline std::vector<WeatherOutcome> weather_from_json(const json_util::Json& jw) {
  if (!jw.is_array() || jw.empty()) throw ParseError("scenarios.weather: expected a non-empty array");
  std::vector<Weather> plain;
  std::vector<WeatherOutcome> explicit_p;
  for (std::size_t i = 0; i < jw.size(); ++i) {
    std::string path = "scenarios.weather[" + std::to_string(i) + "]";
    try {
      if (jw[i].is_string()) {
        plain.push_back(parse_weather(jw[i].get<std::string>()));
      } else {
        const auto& state = json_util::require(jw[i], "state", path);
        Weather w = parse_weather(json_util::to_string(state, path + ".state"));
        if (jw[i].contains("probability")) {
          explicit_p.push_back(
              {w, json_util::to_rational(jw[i]["probability"], path + ".probability")});
        } else {
          plain.push_back(w);
        }
      }
    } catch (const ParseError& e) {
      std::string msg = e.what();
      if (msg.rfind("scenarios", 0) == 0) throw;
      throw ParseError(path + ": " + msg);
    }
  }
  if (!plain.empty() && !explicit_p.empty()) {
    throw ParseError("scenarios.weather: give probabilities for all states or for none");
  }
  return explicit_p.empty() ? uniform_weather(plain) : explicit_p;
}

}  // namespace detail

inline Instance instance_from_json(const json_util::Json& doc, const LoadOptions& options = {}) {
  Instance inst;
  inst.topology = detail::topology_from_json(doc);
  inst.requests = detail::requests_from_json(doc, inst.topology);
  if (inst.requests.empty()) throw ValidationError("instance has no requests");

  if (doc.contains("media")) {
    const auto& jm = doc["media"];
    if (!jm.is_object()) throw ParseError("media: expected an object");
    for (auto it = jm.begin(); it != jm.end(); ++it) {
      Medium m;
      try {
        m = parse_medium(it.key());
      } catch (const ParseError& e) {
        throw ParseError("media." + it.key() + ": " + e.what());
      }
      std::string path = "media." + it.key();
      MediumParams p = inst.media[m];
      if (it.value().contains("theta_km")) {
        p.theta_km = json_util::to_rational(it.value()["theta_km"], path + ".theta_km");
      }
      if (it.value().contains("key_rate_capacity_kbps")) {
        p.key_rate_capacity_kbps = json_util::to_rational(it.value()["key_rate_capacity_kbps"],
                                                          path + ".key_rate_capacity_kbps");
      }
      inst.media.set(m, p);
    }
  }
  if (doc.contains("costs")) inst.costs = cost_table_from_json(doc["costs"], CostTable::table_one());

  std::vector<WeatherOutcome> weather = uniform_weather({Weather::kClear, Weather::kCloudy});
  std::size_t limit = kDefaultScenarioLimit;
  std::optional<std::pair<std::size_t, std::uint64_t>> sample;
  if (doc.contains("scenarios")) {
    const auto& js = doc["scenarios"];
    if (!js.is_object()) throw ParseError("scenarios: expected an object");
    if (js.contains("weather")) weather = detail::weather_from_json(js["weather"]);
    if (js.contains("limit")) {
      auto v = json_util::to_int(js["limit"], "scenarios.limit");
      if (v <= 0) throw ValidationError("scenarios.limit must be positive");
      limit = static_cast<std::size_t>(v);
    }
    if (js.contains("sample")) {
      const auto& jsm = js["sample"];
      auto n = json_util::to_int(json_util::require(jsm, "n", "scenarios.sample"), "scenarios.sample.n");
      auto seed = jsm.contains("seed") ? json_util::to_int(jsm["seed"], "scenarios.sample.seed") : 0;
      if (n <= 0) throw ValidationError("scenarios.sample.n must be positive");
      sample = {static_cast<std::size_t>(n), static_cast<std::uint64_t>(seed)};
    }
  }
  if (sample && options.seed) sample->second = *options.seed;
  RateSupport support = rate_support_of(inst.requests);
  inst.scenarios = sample ? sample_scenarios(support, weather, sample->second, sample->first)
                          : enumerate_scenarios(support, weather, limit);

  if (doc.contains("options")) {
    const auto& jo = doc["options"];
    if (!jo.is_object()) throw ParseError("options: expected an object");
    if (jo.contains("w_qkd")) inst.w_qkd = json_util::to_int(jo["w_qkd"], "options.w_qkd");
    if (jo.contains("w_kml")) inst.w_kml = json_util::to_int(jo["w_kml"], "options.w_kml");
    if (jo.contains("routing_cost")) {
      const auto& jr = jo["routing_cost"];
      if (!jr.is_array()) throw ParseError("options.routing_cost: expected an array");
      for (std::size_t i = 0; i < jr.size(); ++i) {
        std::string path = "options.routing_cost[" + std::to_string(i) + "]";
        int node = static_cast<int>(json_util::to_int(json_util::require(jr[i], "node", path), path + ".node"));
        int req = static_cast<int>(
            json_util::to_int(json_util::require(jr[i], "request", path), path + ".request"));
        inst.routing_cost[{node, req}] =
            json_util::to_rational(json_util::require(jr[i], "cost", path), path + ".cost");
      }
    }
  }
  inst.validate();
  return inst;
}

inline Instance load_instance(std::string_view document, const LoadOptions& options = {}) {
  return instance_from_json(json_util::parse_document(document), options);
}

// Document form of an instance. The scenario set is written as its weather
// support only, so sampled sets come back as the full enumeration.
inline json_util::Json instance_to_json(const Instance& inst) {
  using json_util::Json;
  Json doc = topology_to_json(inst.topology, inst.requests);
  Json media = Json::object();
  for (Medium m : kAllMedia) {
    media[std::string(medium_name(m))] = {
        {"theta_km", json_util::from_rational(inst.media[m].theta_km)},
        {"key_rate_capacity_kbps", json_util::from_rational(inst.media[m].key_rate_capacity_kbps)}};
  }
  doc["media"] = std::move(media);
  doc["costs"] = cost_table_to_json(inst.costs);
  Json weather = Json::array();
  for (const WeatherOutcome& w : inst.scenarios.weather_support) {
    weather.push_back({{"state", std::string(weather_name(w.state))},
                       {"probability", json_util::from_rational(w.probability)}});
  }
  doc["scenarios"] = {{"weather", std::move(weather)}};
  Json routing = Json::array();
  for (const auto& [key, cost] : inst.routing_cost) {
    routing.push_back({{"node", key.first}, {"request", key.second},
                       {"cost", json_util::from_rational(cost)}});
  }
  doc["options"] = {{"w_qkd", inst.w_qkd}, {"w_kml", inst.w_kml}, {"routing_cost", std::move(routing)}};
  return doc;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Instance load_instance_file(const std::string& path, const LoadOptions& options = {}) {
  try {
    return load_instance(read_file(path), options);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

}  // namespace qkdplan
