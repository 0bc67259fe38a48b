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

// Space-air-ground network graph: layered nodes, directed per-medium links
// with wavelength capacities, and the QKD requests routed over them.

#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "qkdplan/json_util.hpp"
#include "qkdplan/rational.hpp"

namespace qkdplan {

enum class Layer { kGround, kAerial, kSpace };
enum class Medium { kFiber, kUav, kSatellite };

inline constexpr std::array<Medium, 3> kAllMedia = {Medium::kFiber, Medium::kUav,
                                                    Medium::kSatellite};

inline std::string_view layer_name(Layer layer) {
  switch (layer) {
    case Layer::kGround: return "ground";
    case Layer::kAerial: return "aerial";
    case Layer::kSpace: return "space";
  }
  return "?";
}

inline std::string_view medium_name(Medium medium) {
  switch (medium) {
    case Medium::kFiber: return "fiber";
    case Medium::kUav: return "uav";
    case Medium::kSatellite: return "satellite";
  }
  return "?";
}

// Single-letter variable family used in column names: x fiber, y UAV, z satellite.
inline char medium_prefix(Medium medium) {
  switch (medium) {
    case Medium::kFiber: return 'x';
    case Medium::kUav: return 'y';
    case Medium::kSatellite: return 'z';
  }
  return '?';
}

inline Layer parse_layer(std::string_view text) {
  if (text == "ground") return Layer::kGround;
  if (text == "aerial") return Layer::kAerial;
  if (text == "space") return Layer::kSpace;
  throw ParseError("unknown layer '" + std::string(text) + "'");
}

inline Medium parse_medium(std::string_view text) {
  if (text == "fiber") return Medium::kFiber;
  if (text == "uav") return Medium::kUav;
  if (text == "satellite") return Medium::kSatellite;
  throw ParseError("unknown medium '" + std::string(text) + "'");
}

inline constexpr std::size_t medium_index(Medium medium) {
  return static_cast<std::size_t>(medium);
}

struct Node {
  int id = 0;
  Layer layer = Layer::kGround;
  std::string label;

  friend bool operator==(const Node&, const Node&) = default;
};

// Wavelength ceilings of one link, split by pool (reserved / on-demand) and
// by channel kind (QKD / key management).
struct MediumCapacities {
  static constexpr std::int64_t kDefaultQkd = 150;
  static constexpr std::int64_t kDefaultKm = 30;

  std::int64_t qkd_reserved_max = kDefaultQkd;
  std::int64_t km_reserved_max = kDefaultKm;
  std::int64_t qkd_ondemand_max = kDefaultQkd;
  std::int64_t km_ondemand_max = kDefaultKm;

  friend bool operator==(const MediumCapacities&, const MediumCapacities&) = default;
};

struct Link {
  int from = 0;
  int to = 0;
  Medium medium = Medium::kFiber;
  Rational distance_km;
  MediumCapacities caps;

  friend bool operator==(const Link&, const Link&) = default;
};

struct Request {
  int id = 0;
  int source = 0;
  int destination = 0;
  // Support of the secret-key rate demand in kbps, uniformly distributed.
  std::vector<Rational> demand_kbps;

  friend bool operator==(const Request&, const Request&) = default;
};

// A routing arc groups every medium link sharing the same (from, to) pair.
// Routing decisions are taken per arc; parallel media share the demand.
struct Arc {
  int from = 0;
  int to = 0;
  std::vector<std::size_t> links;
};

class Topology {
 public:
  Topology() = default;

  // Validates the node and link lists and builds the adjacency indices.
  Topology(std::vector<Node> nodes, std::vector<Link> links)
      : nodes_(std::move(nodes)), links_(std::move(links)) {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const Node& n = nodes_[i];
      if (n.id < 0) throw ValidationError("node id " + std::to_string(n.id) + " is negative");
      if (!index_.emplace(n.id, i).second) {
        throw ValidationError("duplicate node id " + std::to_string(n.id));
      }
    }
    outgoing_.resize(nodes_.size());
    incoming_.resize(nodes_.size());
    outgoing_arcs_.resize(nodes_.size());
    incoming_arcs_.resize(nodes_.size());

    std::set<std::tuple<int, int, Medium>> seen;
    std::map<std::pair<int, int>, std::size_t> arc_of_pair;
    for (std::size_t i = 0; i < links_.size(); ++i) {
      const Link& l = links_[i];
      std::string where = "link " + std::to_string(i) + " (" + std::to_string(l.from) + "->" +
                          std::to_string(l.to) + ")";
      if (!has_node(l.from) || !has_node(l.to)) {
        throw ValidationError(where + " references an undefined node id " +
                              std::to_string(has_node(l.from) ? l.to : l.from));
      }
      if (l.from == l.to) throw ValidationError(where + " is a self loop");
      if (l.distance_km <= 0) throw ValidationError(where + " must have a positive distance");
      const MediumCapacities& c = l.caps;
      if (c.qkd_reserved_max < 0 || c.km_reserved_max < 0 || c.qkd_ondemand_max < 0 ||
          c.km_ondemand_max < 0) {
        throw ValidationError(where + " has a negative capacity");
      }
      Layer a = node(l.from).layer;
      Layer b = node(l.to).layer;
      bool compatible = false;
      switch (l.medium) {
        case Medium::kFiber:
          compatible = a == Layer::kGround && b == Layer::kGround;
          break;
        case Medium::kUav:
          compatible = a == Layer::kAerial || b == Layer::kAerial;
          break;
        case Medium::kSatellite:
          compatible = a == Layer::kSpace || b == Layer::kSpace;
          break;
      }
      if (!compatible) {
        throw ValidationError(where + ": medium " + std::string(medium_name(l.medium)) +
                              " cannot join " + std::string(layer_name(a)) + " and " +
                              std::string(layer_name(b)) + " nodes");
      }
      if (!seen.emplace(l.from, l.to, l.medium).second) {
        throw ValidationError(where + " duplicates an existing " +
                              std::string(medium_name(l.medium)) + " link");
      }
      outgoing_[index_.at(l.from)].push_back(i);
      incoming_[index_.at(l.to)].push_back(i);

      auto [it, inserted] = arc_of_pair.emplace(std::make_pair(l.from, l.to), arcs_.size());
      if (inserted) {
        arcs_.push_back(Arc{l.from, l.to, {}});
        outgoing_arcs_[index_.at(l.from)].push_back(it->second);
        incoming_arcs_[index_.at(l.to)].push_back(it->second);
      }
      arcs_[it->second].links.push_back(i);
      arc_of_link_.push_back(it->second);
    }
  }

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Link>& links() const { return links_; }
  const std::vector<Arc>& arcs() const { return arcs_; }
  const Link& link(std::size_t index) const { return links_.at(index); }
  const Arc& arc(std::size_t index) const { return arcs_.at(index); }
  std::size_t arc_of_link(std::size_t link_index) const { return arc_of_link_.at(link_index); }

  bool has_node(int id) const { return index_.count(id) > 0; }
  const Node& node(int id) const { return nodes_[node_position(id)]; }

  std::size_t node_position(int id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw ValidationError("unknown node id " + std::to_string(id));
    return it->second;
  }

  // Indices of links leaving / entering node `id`, in link-list order.
  const std::vector<std::size_t>& outgoing(int id) const { return outgoing_[node_position(id)]; }
  const std::vector<std::size_t>& incoming(int id) const { return incoming_[node_position(id)]; }

  const std::vector<std::size_t>& outgoing_arcs(int id) const {
    return outgoing_arcs_[node_position(id)];
  }
  const std::vector<std::size_t>& incoming_arcs(int id) const {
    return incoming_arcs_[node_position(id)];
  }

  std::optional<std::size_t> find_arc(int from, int to) const {
    for (std::size_t a : outgoing_arcs(from)) {
      if (arcs_[a].to == to) return a;
    }
    return std::nullopt;
  }

  friend bool operator==(const Topology& a, const Topology& b) {
    return a.nodes_ == b.nodes_ && a.links_ == b.links_;
  }

 private:
  std::vector<Node> nodes_;
  std::vector<Link> links_;
  std::vector<Arc> arcs_;
  std::vector<std::size_t> arc_of_link_;
  std::map<int, std::size_t> index_;
  std::vector<std::vector<std::size_t>> outgoing_;
  std::vector<std::vector<std::size_t>> incoming_;
  std::vector<std::vector<std::size_t>> outgoing_arcs_;
  std::vector<std::vector<std::size_t>> incoming_arcs_;
};

inline void validate_request(const Topology& topology, const Request& request) {
  std::string where = "request " + std::to_string(request.id);
  if (!topology.has_node(request.source)) {
    throw ValidationError(where + " references an undefined node id " +
                          std::to_string(request.source));
  }
  if (!topology.has_node(request.destination)) {
    throw ValidationError(where + " references an undefined node id " +
                          std::to_string(request.destination));
  }
  if (request.source == request.destination) {
    throw ValidationError(where + " has identical source and destination");
  }
  if (request.demand_kbps.empty()) throw ValidationError(where + " has an empty demand support");
  std::set<Rational> distinct;
  for (const Rational& r : request.demand_kbps) {
    if (r < 0) throw ValidationError(where + " has a negative demand value");
    if (!distinct.insert(r).second) {
      throw ValidationError(where + " lists demand " + format_rational(r) + " twice");
    }
  }
}

// --- document I/O -----------------------------------------------------------

namespace detail {

inline Topology topology_from_json(const json_util::Json& doc) {
  using json_util::require;
  using json_util::require_array;
  if (!doc.is_object()) throw ParseError("document: expected an object");

  std::vector<Node> nodes;
  const auto& jnodes = require_array(doc, "nodes", "document");
  for (std::size_t i = 0; i < jnodes.size(); ++i) {
    std::string path = "nodes[" + std::to_string(i) + "]";
    const auto& jn = jnodes[i];
    Node n;
    n.id = static_cast<int>(json_util::to_int(require(jn, "id", path), path + ".id"));
    try {
      n.layer = parse_layer(json_util::to_string(require(jn, "layer", path), path + ".layer"));
    } catch (const ParseError& e) {
      throw ParseError(path + ".layer: " + e.what());
    }
    if (jn.contains("label")) n.label = json_util::to_string(jn["label"], path + ".label");
    nodes.push_back(std::move(n));
  }

  std::vector<Link> links;
  const auto& jlinks = require_array(doc, "links", "document");
  for (std::size_t i = 0; i < jlinks.size(); ++i) {
    std::string path = "links[" + std::to_string(i) + "]";
    const auto& jl = jlinks[i];
    Link l;
    l.from = static_cast<int>(json_util::to_int(require(jl, "from", path), path + ".from"));
    l.to = static_cast<int>(json_util::to_int(require(jl, "to", path), path + ".to"));
    try {
      l.medium = parse_medium(json_util::to_string(require(jl, "medium", path), path + ".medium"));
    } catch (const ParseError& e) {
      throw ParseError(path + ".medium: " + e.what());
    }
    l.distance_km = json_util::to_rational(require(jl, "distance_km", path), path + ".distance_km");
    if (l.distance_km < 0) throw ValidationError(path + ".distance_km: negative distance");
    if (jl.contains("caps")) {
      const auto& jc = jl["caps"];
      std::string cpath = path + ".caps";
      if (!jc.is_object()) throw ParseError(cpath + ": expected an object");
      auto read = [&](const char* key, std::int64_t& out) {
        if (jc.contains(key)) out = json_util::to_int(jc[key], cpath + "." + key);
      };
      read("qkd_reserved_max", l.caps.qkd_reserved_max);
      read("km_reserved_max", l.caps.km_reserved_max);
      read("qkd_ondemand_max", l.caps.qkd_ondemand_max);
      read("km_ondemand_max", l.caps.km_ondemand_max);
    }
    links.push_back(std::move(l));
  }
  return Topology(std::move(nodes), std::move(links));
}

inline std::vector<Request> requests_from_json(const json_util::Json& doc,
                                               const Topology& topology) {
  std::vector<Request> requests;
  if (!doc.contains("requests")) return requests;
  const auto& jreqs = json_util::require_array(doc, "requests", "document");
  std::set<int> ids;
  for (std::size_t i = 0; i < jreqs.size(); ++i) {
    std::string path = "requests[" + std::to_string(i) + "]";
    const auto& jr = jreqs[i];
    Request r;
    r.id = static_cast<int>(json_util::to_int(json_util::require(jr, "id", path), path + ".id"));
    r.source = static_cast<int>(
        json_util::to_int(json_util::require(jr, "source", path), path + ".source"));
    r.destination = static_cast<int>(
        json_util::to_int(json_util::require(jr, "destination", path), path + ".destination"));
    const auto& jd = json_util::require_array(jr, "demand_kbps", path);
    for (std::size_t k = 0; k < jd.size(); ++k) {
      r.demand_kbps.push_back(
          json_util::to_rational(jd[k], path + ".demand_kbps[" + std::to_string(k) + "]"));
    }
    if (!ids.insert(r.id).second) {
      throw ValidationError(path + ": duplicate request id " + std::to_string(r.id));
    }
    validate_request(topology, r);
    requests.push_back(std::move(r));
  }
  return requests;
}

}  // namespace detail

// Loads the node/link part of a topology document; the "requests" array, if
// present, is ignored here (see load_requests).
inline Topology load_topology(std::string_view document) {
  return detail::topology_from_json(json_util::parse_document(document));
}

inline std::vector<Request> load_requests(std::string_view document, const Topology& topology) {
  return detail::requests_from_json(json_util::parse_document(document), topology);
}

inline json_util::Json topology_to_json(const Topology& topology,
                                        std::span<const Request> requests = {}) {
  using json_util::Json;
  Json doc = Json::object();
  Json nodes = Json::array();
  for (const Node& n : topology.nodes()) {
    nodes.push_back({{"id", n.id}, {"layer", std::string(layer_name(n.layer))}, {"label", n.label}});
  }
  Json links = Json::array();
  for (const Link& l : topology.links()) {
    links.push_back({{"from", l.from},
                     {"to", l.to},
                     {"medium", std::string(medium_name(l.medium))},
                     {"distance_km", json_util::from_rational(l.distance_km)},
                     {"caps",
                      {{"qkd_reserved_max", l.caps.qkd_reserved_max},
                       {"km_reserved_max", l.caps.km_reserved_max},
                       {"qkd_ondemand_max", l.caps.qkd_ondemand_max},
                       {"km_ondemand_max", l.caps.km_ondemand_max}}}});
  }
  doc["nodes"] = std::move(nodes);
  doc["links"] = std::move(links);
  if (!requests.empty()) {
    Json reqs = Json::array();
    for (const Request& r : requests) {
      Json demand = Json::array();
      for (const Rational& v : r.demand_kbps) demand.push_back(json_util::from_rational(v));
      reqs.push_back({{"id", r.id},
                      {"source", r.source},
                      {"destination", r.destination},
                      {"demand_kbps", std::move(demand)}});
    }
    doc["requests"] = std::move(reqs);
  }
  return doc;
}

inline std::string serialize_topology(const Topology& topology,
                                      std::span<const Request> requests = {}) {
  return topology_to_json(topology, requests).dump(2) + "\n";
}

}  // namespace qkdplan
