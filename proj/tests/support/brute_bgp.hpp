#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "relaynet/topology.hpp"

// Independent ground-truth BGP model: explicit per-AS route selection and
// export, iterated to a fixed point. Deliberately naive; shares nothing
// with the production three-phase computation beyond the graph type.
namespace brute {

using relaynet::ASGraph;
using relaynet::Asn;
using relaynet::NodeId;

struct Route {
  bool valid = false;
  int origin = -1;
  int cls = 0;  // 0 origin, 1 customer, 2 peer, 3 provider
  std::vector<NodeId> path;  // from holder to origin, inclusive
  NodeId next_hop = -1;
};

struct Outcome {
  std::vector<Route> selected;
};

// rel(u, y): 1 if y is u's customer, 2 peer, 3 provider, 0 unrelated.
inline int rel_of(const ASGraph& g, NodeId u, NodeId y) {
  for (NodeId c : g.customers(u))
    if (c == y) return 1;
  for (NodeId p : g.peers(u))
    if (p == y) return 2;
  for (NodeId p : g.providers(u))
    if (p == y) return 3;
  return 0;
}

inline Outcome fixpoint_bgp(const ASGraph& g, const std::vector<Asn>& origins,
                            const std::vector<int>& priority) {
  size_t n = g.size();
  Outcome out;
  out.selected.assign(n, Route{});
  std::vector<int> origin_of(n, -1);
  for (size_t i = 0; i < origins.size(); ++i) {
    NodeId id = g.id_of(origins[i]);
    if (origin_of[id] >= 0 && priority[origin_of[id]] <= priority[int(i)]) continue;
    origin_of[id] = int(i);
    out.selected[id] = Route{true, int(i), 0, {id}, -1};
  }

  auto better = [&](const Route& a, const Route& b) {
    // true if a preferred over b at the deciding AS
    if (a.cls != b.cls) return a.cls < b.cls;
    if (a.path.size() != b.path.size()) return a.path.size() < b.path.size();
    if (priority[a.origin] != priority[b.origin])
      return priority[a.origin] < priority[b.origin];
    return g.asn_of(a.next_hop) < g.asn_of(b.next_hop);
  };

  for (size_t round = 0; round < 4 * n + 8; ++round) {
    bool changed = false;
    std::vector<Route> next = out.selected;
    for (NodeId u = 0; u < NodeId(n); ++u) {
      if (origin_of[u] >= 0) continue;  // origins never adopt
      Route best{};
      auto offer_from = [&](NodeId y) {
        const Route& yr = out.selected[y];
        if (!yr.valid) return;
        int r = rel_of(g, u, y);
        // y exports to peers/providers only customer or self routes.
        bool u_pays = (r == 1);  // y is u's customer -> u is y's provider
        bool u_peer = (r == 2);
        if ((u_pays || u_peer) && yr.cls > 1) return;
        for (NodeId hop : yr.path)
          if (hop == u) return;  // loop
        Route cand;
        cand.valid = true;
        cand.origin = yr.origin;
        cand.cls = r;
        cand.path.reserve(yr.path.size() + 1);
        cand.path.push_back(u);
        cand.path.insert(cand.path.end(), yr.path.begin(), yr.path.end());
        cand.next_hop = y;
        if (!best.valid || better(cand, best)) best = cand;
      };
      for (NodeId y : g.customers(u)) offer_from(y);
      for (NodeId y : g.peers(u)) offer_from(y);
      for (NodeId y : g.providers(u)) offer_from(y);

      const Route& cur = out.selected[u];
      bool differs = best.valid != cur.valid ||
                     (best.valid && (best.origin != cur.origin || best.cls != cur.cls ||
                                     best.path != cur.path));
      if (differs) {
        next[u] = best;
        changed = true;
      }
    }
    out.selected = std::move(next);
    if (!changed) return out;
  }
  throw std::runtime_error("brute bgp did not converge");
}

}  // namespace brute
