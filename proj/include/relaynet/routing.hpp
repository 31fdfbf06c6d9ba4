#pragma once

#include <optional>
#include <string>
#include <vector>

#include "relaynet/topology.hpp"

namespace relaynet {

/// Relationship through which an AS learned its selected route.
/// Origin marks an AS announcing its own prefix. Preference order
/// for learned routes: Customer > Peer > Provider.
enum class RouteClass : uint8_t { Origin = 0, Customer = 1, Peer = 2, Provider = 3 };

const char* route_class_name(RouteClass c);

enum class TieSide : uint8_t { FavorAttacker, FavorLegitimate };

/// Deterministic tie-breaking: the configured side wins ties between
/// competing origins; remaining ties break toward the lowest next-hop ASN.
struct TieBreak {
  TieSide side = TieSide::FavorAttacker;
};

struct RouteEntry {
  bool reachable = false;
  uint8_t origin = 0;       // index into the origins passed to routing_tree
  RouteClass cls = RouteClass::Origin;
  uint32_t length = 0;      // AS hops to the origin
  NodeId next_hop = -1;     // -1 for origins and unreachable nodes
};

/// Per-destination best-route structure under customer>peer>provider
/// preference, shortest length, then tie-break.
struct RoutingOutcome {
  std::vector<Asn> origin_asns;
  std::vector<RouteEntry> entries;  // indexed by NodeId

  const RouteEntry& at(NodeId id) const { return entries[id]; }
  /// Node-id path from `from` to its origin ([] if unreachable).
  std::vector<NodeId> path_ids(NodeId from) const;
  /// ASN path from `from` to its origin.
  std::vector<Asn> path(const ASGraph& g, Asn from) const;
  /// Per-hop classes aligned with path(): element i is the class through
  /// which path[i] learned the route (its relationship to path[i+1]).
  std::vector<RouteClass> path_classes(NodeId from) const;
};

/// Computes the joint routing tree toward one or more origins of the same
/// prefix. `tie_priority[i]` ranks origin i on exact (class,length) ties;
/// lower wins. Must have tie_priority.size() == origins.size().
///
/// Propagation runs in three phases: customer routes breadth-first up
/// provider links, a peer-hop extension, then provider routes breadth-first
/// down customer links. Each AS adopts the first (best) offer under
/// (class, length, origin priority, lowest next-hop ASN); origins always
/// select themselves. Disconnected ASes stay unreachable.
RoutingOutcome routing_tree(const ASGraph& g, const std::vector<Asn>& origins,
                            const std::vector<int>& tie_priority);

/// Single-origin convenience form.
RoutingOutcome routing_tree(const ASGraph& g, Asn origin);

enum class HijackWinner : uint8_t { Legit, Attacker, Unreachable };

struct HijackOutcome {
  RoutingOutcome tree;  // origins: [legit, attacker]
  HijackWinner winner(NodeId id) const {
    if (!tree.entries[id].reachable) return HijackWinner::Unreachable;
    return tree.entries[id].origin == 0 ? HijackWinner::Legit : HijackWinner::Attacker;
  }
  /// ASes whose selected route leads to the attacker, excluding the
  /// attacker itself.
  std::vector<Asn> diverted(const ASGraph& g) const;
};

/// Competes a rogue advertisement of an existing prefix against the
/// legitimate one. The legitimate origin always keeps its own route
/// (internal routing wins at home).
HijackOutcome simulate_same_prefix_hijack(const ASGraph& g, Asn legit_origin,
                                          Asn attacker, const TieBreak& tb);

/// More-specific prefix hijack: longest-prefix match sends every AS with
/// any policy route to the attacker there, unless /24 filtering discards
/// the advertisement. Returns diverted ASes (excludes attacker and origin).
std::vector<Asn> simulate_more_specific_hijack(const ASGraph& g, Asn legit_origin,
                                               Asn attacker, int prefix_len,
                                               bool filter_over_24);

/// True if the class sequence along `from`'s selected path is policy
/// compliant: provider-learned hops, at most one peer-learned hop, then
/// customer-learned hops down to the origin.
bool path_is_valley_free(const RoutingOutcome& o, NodeId from);

}  // namespace relaynet
