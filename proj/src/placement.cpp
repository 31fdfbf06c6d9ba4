#include "relaynet/placement.hpp"

#include <algorithm>
#include <deque>
#include <unordered_set>

namespace relaynet {

std::vector<Asn> k_core_candidates(const PeerGraph& pg, int k, int n) {
  if (k < 0 || n < 1) throw ValidationError("k_core_candidates: k >= 0 and n >= 1 required");
  size_t count = pg.nodes.size();
  std::vector<int> degree(count);
  std::vector<uint8_t> removed(count, 0);
  for (size_t i = 0; i < count; ++i) degree[i] = int(pg.adj[i].size());

  if (k > 1) {
    std::deque<int> queue;
    for (size_t i = 0; i < count; ++i)
      if (degree[i] < k) queue.push_back(int(i));
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      if (removed[u]) continue;
      removed[u] = 1;
      for (int w : pg.adj[u]) {
        if (!removed[w] && --degree[w] < k) queue.push_back(w);
      }
    }
  }

  // Connected components of the surviving subgraph, keep those of size >= n.
  std::vector<int> comp(count, -1);
  std::vector<Asn> out;
  std::vector<int> stack;
  int comp_id = 0;
  for (size_t s = 0; s < count; ++s) {
    if (removed[s] || comp[s] >= 0) continue;
    std::vector<int> members;
    stack.push_back(int(s));
    comp[s] = comp_id;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      members.push_back(u);
      for (int w : pg.adj[u]) {
        if (!removed[w] && comp[w] < 0) {
          comp[w] = comp_id;
          stack.push_back(w);
        }
      }
    }
    if (int(members.size()) >= n)
      for (int u : members) out.push_back(pg.nodes[u]);
    ++comp_id;
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

// Edmonds-Karp max-flow on a small residual graph.
struct FlowNet {
  struct Arc {
    int to;
    int cap;
    size_t rev;
  };
  std::vector<std::vector<Arc>> arcs;

  explicit FlowNet(int n) : arcs(n) {}
  void add(int u, int v, int cap) {
    arcs[u].push_back({v, cap, arcs[v].size()});
    arcs[v].push_back({u, 0, arcs[u].size() - 1});
  }

  int max_flow(int s, int t) {
    int flow = 0;
    const int kInf = 1 << 29;
    while (true) {
      std::vector<int> prev_node(arcs.size(), -1);
      std::vector<size_t> prev_arc(arcs.size());
      std::deque<int> q{s};
      prev_node[s] = s;
      while (!q.empty() && prev_node[t] < 0) {
        int u = q.front();
        q.pop_front();
        for (size_t i = 0; i < arcs[u].size(); ++i) {
          const Arc& a = arcs[u][i];
          if (a.cap > 0 && prev_node[a.to] < 0) {
            prev_node[a.to] = u;
            prev_arc[a.to] = i;
            q.push_back(a.to);
          }
        }
      }
      if (prev_node[t] < 0) return flow;
      int push = kInf;
      for (int v = t; v != s; v = prev_node[v])
        push = std::min(push, arcs[prev_node[v]][prev_arc[v]].cap);
      for (int v = t; v != s; v = prev_node[v]) {
        Arc& a = arcs[prev_node[v]][prev_arc[v]];
        a.cap -= push;
        arcs[a.to][a.rev].cap += push;
      }
      flow += push;
    }
  }
};

// Vertex-capacity max-flow between non-adjacent s,t: split each node into
// in/out with unit capacity (s,t unbounded).
int vertex_flow(const std::vector<std::vector<int>>& adj, int s, int t) {
  int n = int(adj.size());
  const int kInf = 1 << 20;
  FlowNet net(2 * n);
  auto in = [](int v) { return 2 * v; };
  auto out = [](int v) { return 2 * v + 1; };
  for (int v = 0; v < n; ++v) net.add(in(v), out(v), (v == s || v == t) ? kInf : 1);
  for (int u = 0; u < n; ++u)
    for (int v : adj[u]) net.add(out(u), in(v), kInf);
  return net.max_flow(out(s), in(t));
}

}  // namespace

int vertex_connectivity(const std::vector<std::vector<int>>& adj) {
  int n = int(adj.size());
  if (n <= 1) return 0;
  std::vector<std::vector<uint8_t>> is_adj(n, std::vector<uint8_t>(n, 0));
  for (int u = 0; u < n; ++u)
    for (int v : adj[u]) is_adj[u][v] = 1;

  int best = n - 1;  // complete-graph convention
  for (int s = 0; s < n; ++s)
    for (int t = s + 1; t < n; ++t)
      if (!is_adj[s][t]) best = std::min(best, vertex_flow(adj, s, t));
  return best;
}

RelayPlan locate_relays(const ASGraph& g, const PeerGraph& pg,
                        const std::vector<Asn>& candidates, const ScenarioFn& scenarios,
                        int n, int k) {
  if (n < 1) throw ValidationError("locate_relays: n >= 1 required");
  if (k < 0) throw ValidationError("locate_relays: k >= 0 required");
  for (Asn c : candidates)
    if (!pg.has(c)) throw ValidationError("locate_relays: candidate not relay-eligible");

  RelayPlan plan;
  plan.n = n;
  plan.k = k;
  plan.total_weight = g.total_weight();

  std::vector<Asn> remaining = candidates;
  std::sort(remaining.begin(), remaining.end());
  std::unordered_set<Asn> chosen;
  std::unordered_set<uint64_t> covered_union;
  uint64_t covered_weight = 0;

  auto pair_key = [](const AttackScenario& s) {
    return (uint64_t(s.attacker) << 32) | s.victim;
  };

  for (int round = 0; round < n; ++round) {
    int need = std::min<int>(k, int(chosen.size()));
    Asn best_asn = 0;
    uint64_t best_gain = 0;
    bool found = false;
    for (Asn c : remaining) {
      if (chosen.count(c)) continue;
      int links = 0;
      for (int w : pg.adj[pg.local(c)])
        if (chosen.count(pg.nodes[w])) ++links;
      if (links < need) continue;
      uint64_t gain = 0;
      for (const AttackScenario& s : scenarios(c).covered)
        if (!covered_union.count(pair_key(s))) gain += g.weight_of_asn(s.victim);
      // Strict > keeps the lowest eligible ASN on ties (remaining is sorted).
      if (!found || gain > best_gain) {
        found = true;
        best_gain = gain;
        best_asn = c;
      }
    }
    if (!found)
      throw InfeasibleError(round, "locate_relays: no candidate meets the connectivity rule in round " +
                                       std::to_string(round));
    chosen.insert(best_asn);
    plan.relays.push_back(best_asn);
    for (const AttackScenario& s : scenarios(best_asn).covered)
      if (covered_union.insert(pair_key(s)).second) covered_weight += g.weight_of_asn(s.victim);
    plan.marginal.push_back(best_gain);
    plan.cumulative.push_back(covered_weight);
  }
  plan.achieved_coverage = covered_weight;

  // Independent verification of the induced peer subgraph.
  std::vector<std::vector<int>> induced(plan.relays.size());
  std::unordered_map<Asn, int> pos;
  for (size_t i = 0; i < plan.relays.size(); ++i) pos[plan.relays[i]] = int(i);
  for (size_t i = 0; i < plan.relays.size(); ++i) {
    for (int w : pg.adj[pg.local(plan.relays[i])]) {
      auto it = pos.find(pg.nodes[w]);
      if (it != pos.end()) induced[i].push_back(it->second);
    }
  }
  plan.connectivity_certificate = vertex_connectivity(induced);
  plan.required_connectivity = std::min(k, n - 1);
  if (plan.connectivity_certificate < plan.required_connectivity)
    throw ConnectivityError(
        "locate_relays: plan verification failed, connectivity " +
        std::to_string(plan.connectivity_certificate) + " < required " +
        std::to_string(plan.required_connectivity));
  return plan;
}

}  // namespace relaynet
