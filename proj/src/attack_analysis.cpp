#include "relaynet/attack_analysis.hpp"

#include <algorithm>
#include <queue>
#include <random>
#include <unordered_set>

#include "relaynet/parallel.hpp"

namespace relaynet {

PathChoice more_preferred(std::span<const Asn> path_a, std::span<const Asn> path_b,
                          std::span<const RouteClass> classes_a,
                          std::span<const RouteClass> classes_b, const TieBreak& tb) {
  if (path_a.empty() || path_b.empty())
    throw ValidationError("more_preferred: empty path");
  if (path_a.front() != path_b.front())
    throw ValidationError("more_preferred: paths start at different ASes");
  if (classes_a.size() + 1 != path_a.size() || classes_b.size() + 1 != path_b.size())
    throw ValidationError("more_preferred: class list does not align with hops");

  size_t i = 0;
  while (i < path_a.size() && i < path_b.size() && path_a[i] == path_b[i]) ++i;
  if (i == path_a.size() && i == path_b.size())
    throw ValidationError("more_preferred: identical paths");
  // One path ending at the divergence point means its endpoint is the last
  // common AS; it originates that prefix and keeps its own route.
  if (i == path_a.size()) return PathChoice::A;
  if (i == path_b.size()) return PathChoice::B;

  RouteClass ca = classes_a[i - 1];
  RouteClass cb = classes_b[i - 1];
  if (ca != cb) return uint8_t(ca) < uint8_t(cb) ? PathChoice::A : PathChoice::B;

  size_t rem_a = path_a.size() - i;
  size_t rem_b = path_b.size() - i;
  if (rem_a != rem_b) return rem_a < rem_b ? PathChoice::A : PathChoice::B;

  return tb.side == TieSide::FavorAttacker ? PathChoice::B : PathChoice::A;
}

const RoutingOutcome& TreeCache::tree(Asn destination) {
  auto it = trees_.find(destination);
  if (it != trees_.end()) return it->second;
  auto [ins, ok] = trees_.emplace(destination, routing_tree(g_, destination));
  return ins->second;
}

namespace {

// True if victim v keeps its route to `relay_tree`'s origin when `attacker`
// competes, judged by path preference over the two single-origin trees.
bool relay_route_wins(const ASGraph& g, const RoutingOutcome& relay_tree,
                      const RoutingOutcome& attacker_tree, NodeId v, const TieBreak& tb) {
  if (!attacker_tree.entries[v].reachable) return true;  // ad never reaches v
  std::vector<NodeId> ida = relay_tree.path_ids(v);
  std::vector<NodeId> idb = attacker_tree.path_ids(v);
  std::vector<Asn> pa(ida.size()), pb(idb.size());
  for (size_t i = 0; i < ida.size(); ++i) pa[i] = g.asn_of(ida[i]);
  for (size_t i = 0; i < idb.size(); ++i) pb[i] = g.asn_of(idb[i]);
  std::vector<RouteClass> ca = relay_tree.path_classes(v);
  std::vector<RouteClass> cb = attacker_tree.path_classes(v);
  return more_preferred(pa, pb, ca, cb, tb) == PathChoice::A;
}

}  // namespace

ScenarioSet covered_scenarios(const ASGraph& g, Asn relay, const TieBreak& tb,
                              TreeCache& cache) {
  ScenarioSet out;
  out.relay = relay;
  const RoutingOutcome& rt = cache.tree(relay);
  for (NodeId v : g.weighted_nodes()) {
    Asn va = g.asn_of(v);
    if (!rt.entries[v].reachable) continue;
    for (NodeId m = 0; m < NodeId(g.size()); ++m) {
      Asn ma = g.asn_of(m);
      if (ma == va || ma == relay) continue;
      if (relay_route_wins(g, rt, cache.tree(ma), v, tb))
        out.covered.push_back(AttackScenario{ma, va});
    }
  }
  std::sort(out.covered.begin(), out.covered.end());
  return out;
}

uint64_t coverage_weight(std::span<const ScenarioSet> sets, const ASGraph& g) {
  std::unordered_set<uint64_t> seen;
  uint64_t total = 0;
  for (const ScenarioSet& s : sets) {
    for (const AttackScenario& sc : s.covered) {
      uint64_t key = (uint64_t(sc.attacker) << 32) | sc.victim;
      if (seen.insert(key).second) total += g.weight_of_asn(sc.victim);
    }
  }
  return total;
}

namespace {

// Per-attacker-row coverage of the relay set, shared by both CDFs.
// row[v_pos] is true if some relay protects victim v against attacker m.
struct CoverageRows {
  std::vector<NodeId> victims;
  std::vector<std::vector<uint8_t>> row;  // [attacker node][victim pos]
};

CoverageRows coverage_rows(const ASGraph& g, const std::vector<Asn>& relays,
                           const TieBreak& tb, int jobs) {
  if (relays.empty()) throw ValidationError("coverage: relay set is empty");
  CoverageRows out;
  out.victims = g.weighted_nodes();
  const size_t n = g.size();

  std::vector<RoutingOutcome> relay_trees(relays.size());
  std::vector<uint8_t> relay_reaches(relays.size() * out.victims.size(), 0);
  for (size_t r = 0; r < relays.size(); ++r) {
    relay_trees[r] = routing_tree(g, relays[r]);
    for (size_t vi = 0; vi < out.victims.size(); ++vi)
      relay_reaches[r * out.victims.size() + vi] =
          relay_trees[r].entries[out.victims[vi]].reachable;
  }

  out.row.assign(n, {});
  parallel_for(jobs, n, [&](size_t mi) {
    NodeId m = NodeId(mi);
    Asn ma = g.asn_of(m);
    std::vector<uint8_t>& row = out.row[mi];
    row.assign(out.victims.size(), 0);
    RoutingOutcome mt = routing_tree(g, ma);
    for (size_t vi = 0; vi < out.victims.size(); ++vi) {
      NodeId v = out.victims[vi];
      Asn va = g.asn_of(v);
      if (va == ma) continue;  // self-pairs are not attack scenarios
      for (size_t r = 0; r < relays.size(); ++r) {
        if (relays[r] == ma) continue;
        if (!relay_reaches[r * out.victims.size() + vi]) continue;
        if (relay_route_wins(g, relay_trees[r], mt, v, tb)) {
          row[vi] = 1;
          break;
        }
      }
    }
  });
  return out;
}

std::vector<CdfPoint> step_cdf_at_least(std::vector<double> values) {
  // (x, fraction of values >= x) at each distinct value.
  std::sort(values.begin(), values.end());
  std::vector<CdfPoint> out;
  size_t n = values.size();
  for (size_t i = 0; i < n;) {
    size_t j = i;
    while (j < n && values[j] == values[i]) ++j;
    out.push_back(CdfPoint{values[i], double(n - i) / double(n)});
    i = j;
  }
  return out;
}

std::vector<CdfPoint> step_cdf_at_most(const std::vector<std::pair<double, uint64_t>>& wv,
                                       uint64_t total_weight) {
  // (x, weight fraction of entries <= x) at each distinct value.
  std::vector<std::pair<double, uint64_t>> s = wv;
  std::sort(s.begin(), s.end());
  std::vector<CdfPoint> out;
  uint64_t acc = 0;
  for (size_t i = 0; i < s.size();) {
    size_t j = i;
    double x = s[i].first;
    while (j < s.size() && s[j].first == x) {
      acc += s[j].second;
      ++j;
    }
    out.push_back(CdfPoint{x, double(acc) / double(total_weight)});
    i = j;
  }
  return out;
}

}  // namespace

std::vector<CdfPoint> partition_cdf(const ASGraph& g, const std::vector<Asn>& relays,
                                    const TieBreak& tb, int jobs) {
  CoverageRows cov = coverage_rows(g, relays, tb, jobs);
  uint64_t total = g.total_weight();
  if (total == 0) throw ValidationError("partition_cdf: no client weight loaded");

  // Relay-hosting ASes are the infrastructure under attack, not attackers:
  // no relay can cover a scenario against itself, so counting them would
  // never reach zero even under full coverage.
  std::vector<uint8_t> is_relay(g.size(), 0);
  for (Asn r : relays) is_relay[g.id_of(r)] = 1;

  std::vector<double> disconnectable;
  for (size_t mi = 0; mi < g.size(); ++mi) {
    if (is_relay[mi]) continue;
    uint64_t w = 0;
    for (size_t vi = 0; vi < cov.victims.size(); ++vi) {
      NodeId v = cov.victims[vi];
      if (v == NodeId(mi)) continue;
      if (!cov.row[mi][vi]) w += g.weight(v);
    }
    disconnectable.push_back(double(w) / double(total));
  }
  if (disconnectable.empty())
    throw ValidationError("partition_cdf: no attacker candidates outside the relay set");
  return step_cdf_at_least(std::move(disconnectable));
}

std::vector<CdfPoint> client_vulnerability_cdf(const ASGraph& g,
                                               const std::vector<Asn>& relays,
                                               const TieBreak& tb, int jobs) {
  CoverageRows cov = coverage_rows(g, relays, tb, jobs);
  uint64_t total = g.total_weight();
  if (total == 0) throw ValidationError("client_vulnerability_cdf: no client weight loaded");

  std::vector<uint8_t> is_relay(g.size(), 0);
  size_t relay_count = 0;
  for (Asn r : relays)
    if (!is_relay[g.id_of(r)]) {
      is_relay[g.id_of(r)] = 1;
      ++relay_count;
    }

  std::vector<std::pair<double, uint64_t>> per_victim;
  for (size_t vi = 0; vi < cov.victims.size(); ++vi) {
    NodeId v = cov.victims[vi];
    size_t attackers = 0;
    size_t population = g.size() - relay_count - (is_relay[v] ? 0 : 1);
    for (size_t mi = 0; mi < g.size(); ++mi) {
      if (NodeId(mi) == v || is_relay[mi]) continue;
      if (!cov.row[mi][vi]) ++attackers;
    }
    if (population == 0) throw ValidationError("client_vulnerability_cdf: graph too small");
    per_victim.emplace_back(double(attackers) / double(population), g.weight(v));
  }
  return step_cdf_at_most(per_victim, total);
}

namespace {

// Search state for the preference-ordered traversal: either still climbing
// provider links or committed to descending a cone.
enum class Shape : uint8_t { Climb, Cone };

struct PqEntry {
  uint8_t class_rank;  // 0 origin, 1 customer, 2 peer, 3 provider
  uint32_t length;
  uint8_t tie_rank;
  Asn asn;
  NodeId node;
  Shape shape;
};

struct PqCmp {
  bool operator()(const PqEntry& a, const PqEntry& b) const {
    return std::tie(a.class_rank, a.length, a.tie_rank, a.asn, a.shape) >
           std::tie(b.class_rank, b.length, b.tie_rank, b.asn, b.shape);
  }
};

}  // namespace

std::vector<Asn> p24_baseline_attackers(const ASGraph& g, Asn victim,
                                        const std::vector<Asn>& bitcoin_ases,
                                        const TieBreak& tb) {
  std::vector<uint8_t> is_bitcoin(g.size(), 0);
  for (Asn a : bitcoin_ases) is_bitcoin[g.id_of(a)] = 1;
  NodeId start = g.id_of(victim);
  if (!is_bitcoin[start])
    throw ValidationError("p24 baseline: victim does not host clients");

  auto tie_rank = [&](NodeId n) -> uint8_t {
    bool hosts = is_bitcoin[n];
    if (tb.side == TieSide::FavorAttacker) return hosts ? 1 : 0;
    return hosts ? 0 : 1;
  };

  std::priority_queue<PqEntry, std::vector<PqEntry>, PqCmp> pq;
  std::vector<uint8_t> done(g.size() * 2, 0);  // per (node, shape)
  std::vector<uint8_t> popped(g.size(), 0);
  auto done_at = [&](NodeId n, Shape s) -> uint8_t& {
    return done[size_t(n) * 2 + (s == Shape::Climb ? 0 : 1)];
  };
  auto push = [&](NodeId n, uint8_t cls, uint32_t len, Shape s) {
    if (done_at(n, s)) return;
    pq.push(PqEntry{cls, len, tie_rank(n), g.asn_of(n), n, s});
  };

  // The victim is its own best destination; expand it directly.
  popped[start] = 1;
  done_at(start, Shape::Cone) = done_at(start, Shape::Climb) = 1;
  for (NodeId c : g.customers(start)) push(c, 1, 1, Shape::Cone);
  for (NodeId p : g.peers(start)) push(p, 2, 1, Shape::Cone);
  for (NodeId pr : g.providers(start)) push(pr, 3, 1, Shape::Climb);

  std::vector<Asn> attackers;
  while (!pq.empty()) {
    PqEntry e = pq.top();
    pq.pop();
    if (done_at(e.node, e.shape)) continue;
    done_at(e.node, e.shape) = 1;

    if (!popped[e.node]) {
      popped[e.node] = 1;
      if (is_bitcoin[e.node]) break;  // next client-hosting AS ends the scan
      attackers.push_back(e.asn);
    }

    // A node may be traversed once per shape: descending continuations and
    // provider-chain continuations serve different destinations beyond it.
    if (e.shape == Shape::Cone) {
      for (NodeId c : g.customers(e.node)) push(c, e.class_rank, e.length + 1, Shape::Cone);
    } else {
      for (NodeId pr : g.providers(e.node)) push(pr, 3, e.length + 1, Shape::Climb);
      for (NodeId p : g.peers(e.node)) push(p, 3, e.length + 1, Shape::Cone);
      for (NodeId c : g.customers(e.node)) push(c, 3, e.length + 1, Shape::Cone);
    }
  }
  std::sort(attackers.begin(), attackers.end());
  return attackers;
}

double tie_break_disconnect_probability(const PeerGraph& relay_graph, Asn target,
                                        int trials, uint64_t seed) {
  int t = relay_graph.local(target);
  size_t n = relay_graph.nodes.size();
  if (n < 2) throw ValidationError("tie-break probability: need at least two relays");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution win(0.5);

  int disconnects = 0;
  std::vector<int> stack;
  std::vector<uint8_t> seen(n);
  std::vector<uint8_t> cut(n);  // cut[w]: link target-w diverted this trial
  for (int trial = 0; trial < trials; ++trial) {
    std::fill(cut.begin(), cut.end(), 0);
    for (int w : relay_graph.adj[t])
      if (win(rng)) cut[w] = 1;

    // Connectivity of the surviving graph from some non-target node.
    std::fill(seen.begin(), seen.end(), 0);
    stack.clear();
    int first = (t == 0) ? 1 : 0;
    stack.push_back(first);
    seen[first] = 1;
    size_t visited = 1;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int w : relay_graph.adj[u]) {
        if ((u == t && cut[w]) || (w == t && cut[u])) continue;
        if (!seen[w]) {
          seen[w] = 1;
          ++visited;
          stack.push_back(w);
        }
      }
    }
    if (visited != n) ++disconnects;
  }
  return double(disconnects) / double(trials);
}

}  // namespace relaynet
