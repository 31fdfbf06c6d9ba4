#pragma once

#include <algorithm>
#include <set>
#include <vector>

#include "relaynet/topology.hpp"

// Exhaustive oracles for small placement instances.
namespace brute {

using relaynet::Asn;
using relaynet::PeerGraph;

// Vertex connectivity by removing every subset of fewer than k vertices;
// only usable for tiny graphs.
inline bool is_k_connected(const PeerGraph& pg, const std::vector<Asn>& subset, int k) {
  std::vector<int> ids;
  for (Asn a : subset) ids.push_back(pg.local(a));
  std::sort(ids.begin(), ids.end());
  size_t n = ids.size();
  if (n == 0) return false;
  if (n == 1) return k <= 0;
  if (int(n) <= k) return false;  // complete graph caps at n-1

  auto connected_without = [&](const std::set<int>& removed) {
    std::vector<int> stack;
    std::set<int> seen;
    for (int id : ids)
      if (!removed.count(id)) {
        stack.push_back(id);
        seen.insert(id);
        break;
      }
    if (stack.empty()) return true;
    std::set<int> members(ids.begin(), ids.end());
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int w : pg.adj[u]) {
        if (!members.count(w) || removed.count(w) || seen.count(w)) continue;
        seen.insert(w);
        stack.push_back(w);
      }
    }
    return seen.size() == members.size() - removed.size();
  };

  // All removal subsets of size < k.
  for (int r = 0; r < k; ++r) {
    std::vector<int> pick(r);
    std::vector<int> idx(r);
    std::function<bool(int, int)> rec = [&](int pos, int start) -> bool {
      if (pos == r) {
        std::set<int> removed(pick.begin(), pick.begin() + r);
        return connected_without(removed);
      }
      for (int i = start; i < int(n); ++i) {
        pick[pos] = ids[i];
        if (!rec(pos + 1, i + 1)) return false;
      }
      return true;
    };
    if (!rec(0, 0)) return false;
  }
  return true;
}

// Best coverage over every size-n k-connected subset (weighted union).
struct BestSubset {
  uint64_t coverage = 0;
  bool feasible = false;
};

inline BestSubset best_coverage(
    const PeerGraph& pg, const std::vector<Asn>& candidates, int n, int k,
    const std::function<uint64_t(const std::vector<Asn>&)>& union_weight) {
  BestSubset best;
  std::vector<Asn> pick;
  std::function<void(size_t)> rec = [&](size_t start) {
    if (int(pick.size()) == n) {
      if (!is_k_connected(pg, pick, std::min(k, n - 1))) return;
      uint64_t w = union_weight(pick);
      best.feasible = true;
      best.coverage = std::max(best.coverage, w);
      return;
    }
    for (size_t i = start; i < candidates.size(); ++i) {
      pick.push_back(candidates[i]);
      rec(i + 1);
      pick.pop_back();
    }
  };
  rec(0);
  return best;
}

}  // namespace brute
