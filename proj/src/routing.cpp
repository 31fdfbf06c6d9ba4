#include "relaynet/routing.hpp"

#include <algorithm>
#include <cassert>

namespace relaynet {

const char* route_class_name(RouteClass c) {
  switch (c) {
    case RouteClass::Origin: return "origin";
    case RouteClass::Customer: return "customer";
    case RouteClass::Peer: return "peer";
    case RouteClass::Provider: return "provider";
  }
  return "?";
}

std::vector<NodeId> RoutingOutcome::path_ids(NodeId from) const {
  std::vector<NodeId> out;
  if (!entries[from].reachable) return out;
  NodeId cur = from;
  out.push_back(cur);
  while (entries[cur].next_hop >= 0) {
    cur = entries[cur].next_hop;
    out.push_back(cur);
  }
  return out;
}

std::vector<Asn> RoutingOutcome::path(const ASGraph& g, Asn from) const {
  std::vector<Asn> out;
  for (NodeId id : path_ids(g.id_of(from))) out.push_back(g.asn_of(id));
  return out;
}

std::vector<RouteClass> RoutingOutcome::path_classes(NodeId from) const {
  std::vector<RouteClass> out;
  if (!entries[from].reachable) return out;
  NodeId cur = from;
  while (entries[cur].next_hop >= 0) {
    out.push_back(entries[cur].cls);
    cur = entries[cur].next_hop;
  }
  return out;
}

namespace {

// One candidate adoption for a node within a (class, length) bucket.
struct Offer {
  int origin_priority;
  Asn neighbor_asn;
  NodeId neighbor;
  uint8_t origin;
};

bool better(const Offer& a, const Offer& b) {
  if (a.origin_priority != b.origin_priority) return a.origin_priority < b.origin_priority;
  return a.neighbor_asn < b.neighbor_asn;
}

// Collects the best offer per node for the bucket currently being filled,
// then commits all at once so selection is independent of exporter order.
class BucketOffers {
 public:
  explicit BucketOffers(size_t n) : best_(n), has_(n, 0) {}

  void add(NodeId node, Offer o) {
    if (!has_[node] || better(o, best_[node])) {
      best_[node] = o;
      has_[node] = 1;
      touched_.push_back(node);
    }
  }

  // Applies offers as (cls, length) routes; returns newly assigned nodes.
  std::vector<NodeId> commit(std::vector<RouteEntry>& entries, RouteClass cls,
                             uint32_t length) {
    std::vector<NodeId> assigned;
    for (NodeId node : touched_) {
      if (!has_[node]) continue;
      has_[node] = 0;
      if (entries[node].reachable) continue;
      entries[node] = RouteEntry{true, best_[node].origin, cls, length, best_[node].neighbor};
      assigned.push_back(node);
    }
    touched_.clear();
    return assigned;
  }

 private:
  std::vector<Offer> best_;
  std::vector<uint8_t> has_;
  std::vector<NodeId> touched_;
};

}  // namespace

RoutingOutcome routing_tree(const ASGraph& g, const std::vector<Asn>& origins,
                            const std::vector<int>& tie_priority) {
  if (origins.empty()) throw ValidationError("routing_tree: no origins");
  if (origins.size() != tie_priority.size())
    throw ValidationError("routing_tree: tie_priority size mismatch");

  const size_t n = g.size();
  RoutingOutcome out;
  out.entries.assign(n, RouteEntry{});
  for (Asn a : origins) out.origin_asns.push_back(a);

  std::vector<int> priority(origins.size());
  for (size_t i = 0; i < origins.size(); ++i) priority[i] = tie_priority[i];

  // Origins select themselves. If the same AS appears twice the better
  // priority wins (degenerate but defined).
  for (size_t i = 0; i < origins.size(); ++i) {
    NodeId id = g.id_of(origins[i]);
    if (out.entries[id].reachable && priority[out.entries[id].origin] <= priority[i]) continue;
    out.entries[id] = RouteEntry{true, uint8_t(i), RouteClass::Origin, 0, -1};
  }

  BucketOffers offers(n);
  auto prio_of = [&](NodeId id) { return priority[out.entries[id].origin]; };

  // Phase 1: customer routes climb provider links level by level. A node
  // holding an origin/customer route of length L exports it to its
  // providers, which adopt at L+1 unless already routed.
  std::vector<NodeId> frontier;
  for (size_t i = 0; i < n; ++i)
    if (out.entries[i].reachable) frontier.push_back(NodeId(i));
  uint32_t length = 0;
  std::vector<std::vector<NodeId>> customer_holders_by_len;  // reused in phase 2
  customer_holders_by_len.push_back(frontier);
  while (!frontier.empty()) {
    for (NodeId u : frontier) {
      for (NodeId p : g.providers(u)) {
        if (out.entries[p].reachable) continue;
        offers.add(p, Offer{prio_of(u), g.asn_of(u), u, out.entries[u].origin});
      }
    }
    frontier = offers.commit(out.entries, RouteClass::Customer, length + 1);
    ++length;
    customer_holders_by_len.push_back(frontier);
  }

  // Phase 2: one peer-hop extension. Nodes with origin/customer routes
  // export to peers; an unrouted peer adopts the shortest such offer.
  // Offers of length L+1 come from holders of length L, so walking holder
  // levels in order fills buckets shortest-first.
  for (uint32_t l = 0; l < customer_holders_by_len.size(); ++l) {
    for (NodeId u : customer_holders_by_len[l]) {
      for (NodeId w : g.peers(u)) {
        if (out.entries[w].reachable) continue;
        offers.add(w, Offer{prio_of(u), g.asn_of(u), u, out.entries[u].origin});
      }
    }
    offers.commit(out.entries, RouteClass::Peer, l + 1);
  }

  // Phase 3: provider routes descend customer links. Every routed node
  // exports downward; lengths mix across phases so buckets are keyed by
  // total path length.
  std::vector<std::vector<NodeId>> by_len(n + 2);
  uint32_t max_len = 0;
  for (size_t i = 0; i < n; ++i) {
    if (out.entries[i].reachable) {
      uint32_t l = out.entries[i].length;
      by_len[l].push_back(NodeId(i));
      max_len = std::max(max_len, l);
    }
  }
  for (uint32_t l = 0; l <= max_len && l < by_len.size(); ++l) {
    for (NodeId u : by_len[l]) {
      for (NodeId c : g.customers(u)) {
        if (out.entries[c].reachable) continue;
        offers.add(c, Offer{prio_of(u), g.asn_of(u), u, out.entries[u].origin});
      }
    }
    auto assigned = offers.commit(out.entries, RouteClass::Provider, l + 1);
    if (!assigned.empty()) {
      by_len[l + 1].insert(by_len[l + 1].end(), assigned.begin(), assigned.end());
      max_len = std::max(max_len, l + 1);
    }
  }

  return out;
}

RoutingOutcome routing_tree(const ASGraph& g, Asn origin) {
  return routing_tree(g, std::vector<Asn>{origin}, std::vector<int>{0});
}

std::vector<Asn> HijackOutcome::diverted(const ASGraph& g) const {
  std::vector<Asn> out;
  Asn attacker = tree.origin_asns[1];
  for (NodeId i = 0; i < NodeId(g.size()); ++i) {
    if (!tree.entries[i].reachable) continue;
    if (tree.entries[i].origin == 1 && g.asn_of(i) != attacker) out.push_back(g.asn_of(i));
  }
  return out;
}

HijackOutcome simulate_same_prefix_hijack(const ASGraph& g, Asn legit_origin,
                                          Asn attacker, const TieBreak& tb) {
  if (legit_origin == attacker)
    throw ValidationError("hijack: attacker equals legitimate origin");
  std::vector<int> prio =
      (tb.side == TieSide::FavorAttacker) ? std::vector<int>{1, 0} : std::vector<int>{0, 1};
  HijackOutcome h;
  h.tree = routing_tree(g, {legit_origin, attacker}, prio);
  return h;
}

std::vector<Asn> simulate_more_specific_hijack(const ASGraph& g, Asn legit_origin,
                                               Asn attacker, int prefix_len,
                                               bool filter_over_24) {
  if (prefix_len < 8 || prefix_len > 32)
    throw ValidationError("hijack: prefix length out of range");
  if (filter_over_24 && prefix_len > 24) return {};
  RoutingOutcome tree = routing_tree(g, attacker);
  std::vector<Asn> out;
  for (NodeId i = 0; i < NodeId(g.size()); ++i) {
    Asn a = g.asn_of(i);
    if (a == legit_origin || a == attacker) continue;
    if (tree.entries[i].reachable) out.push_back(a);
  }
  return out;
}

bool path_is_valley_free(const RoutingOutcome& o, NodeId from) {
  if (!o.entries[from].reachable) return true;
  // Reading from the route holder toward the origin the class sequence
  // must match Provider* Peer? Customer* Origin.
  int stage = 0;  // 0 = providers allowed, 1 = customers only
  NodeId cur = from;
  while (o.entries[cur].next_hop >= 0) {
    RouteClass c = o.entries[cur].cls;
    switch (c) {
      case RouteClass::Provider:
        if (stage != 0) return false;
        break;
      case RouteClass::Peer:
        if (stage != 0) return false;
        stage = 1;
        break;
      case RouteClass::Customer:
        stage = 1;
        break;
      case RouteClass::Origin:
        return false;  // origin class only at the terminal node
    }
    cur = o.entries[cur].next_hop;
  }
  return o.entries[cur].cls == RouteClass::Origin;
}

}  // namespace relaynet
