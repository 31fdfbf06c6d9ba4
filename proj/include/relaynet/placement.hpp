#pragma once

#include <functional>

#include "relaynet/attack_analysis.hpp"
#include "relaynet/topology.hpp"

namespace relaynet {

/// A finished relay placement. `connectivity_certificate` is recomputed
/// from the induced peer subgraph by max-flow, never trusted from the
/// construction.
struct RelayPlan {
  std::vector<Asn> relays;  // in selection order
  int n = 0;
  int k = 0;
  uint64_t achieved_coverage = 0;             // weighted covered scenarios
  uint64_t total_weight = 0;                  // for reporting fractions
  std::vector<uint64_t> marginal;             // coverage gain per round
  std::vector<uint64_t> cumulative;           // running coverage per round
  int connectivity_certificate = 0;           // verified min vertex connectivity
  int required_connectivity = 0;              // min(k, n-1)
};

/// Heuristic filter for ASes that could belong to some k-connected relay
/// network of >= n nodes: peel to the k-core, then keep connected
/// components of size >= n (for k <= 1 the components alone). May return
/// an empty set.
std::vector<Asn> k_core_candidates(const PeerGraph& pg, int k, int n);

/// Exact minimum vertex connectivity of an undirected graph given as an
/// adjacency list (max-flow over the split-node network; complete graphs
/// are (|V|-1)-connected by convention).
int vertex_connectivity(const std::vector<std::vector<int>>& adj);

using ScenarioFn = std::function<const ScenarioSet&(Asn)>;

/// Greedy maximum-coverage placement under the connectivity growth rule:
/// each round only candidates adjacent to at least min(k, |chosen|)
/// already-chosen relays are eligible; the best weighted marginal gain
/// wins, ties to the lowest ASN. Throws InfeasibleError naming the round
/// when no candidate is eligible, and ConnectivityError if the finished
/// plan fails independent verification.
RelayPlan locate_relays(const ASGraph& g, const PeerGraph& pg,
                        const std::vector<Asn>& candidates, const ScenarioFn& scenarios,
                        int n, int k);

}  // namespace relaynet
