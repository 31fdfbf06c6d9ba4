#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "relaynet/errors.hpp"

namespace relaynet {

using Asn = uint32_t;
using NodeId = int32_t;

enum class Rel : uint8_t {
  ProviderCustomer,  // first AS provides transit to the second
  PeerPeer,
};

struct Edge {
  Asn a = 0;  // provider side for ProviderCustomer; lower ASN for PeerPeer
  Asn b = 0;
  Rel rel = Rel::PeerPeer;
};

/// AS-level topology with typed business relationships and per-AS client
/// weights. Immutable once built; safe to share across threads read-only.
class ASGraph {
 public:
  size_t size() const { return asns_.size(); }
  const std::vector<Asn>& asns() const { return asns_; }
  bool has_as(Asn a) const { return index_.count(a) != 0; }
  NodeId id_of(Asn a) const;
  Asn asn_of(NodeId id) const { return asns_[id]; }

  // Adjacency, as sorted node-id lists.
  const std::vector<NodeId>& providers(NodeId id) const { return providers_[id]; }
  const std::vector<NodeId>& customers(NodeId id) const { return customers_[id]; }
  const std::vector<NodeId>& peers(NodeId id) const { return peers_[id]; }

  uint64_t weight(NodeId id) const { return weights_[id]; }
  uint64_t weight_of_asn(Asn a) const { return weights_[id_of(a)]; }
  uint64_t total_weight() const { return total_weight_; }
  /// Node ids of all ASes with weight > 0, ascending.
  std::vector<NodeId> weighted_nodes() const;

  const std::vector<Edge>& edges() const { return edges_; }
  size_t edge_count() const { return edges_.size(); }

  /// Builds a graph from pre-validated edges (used by parser and tests).
  /// `isolated` lists ASes that appear in no edge.
  static ASGraph from_edges(const std::vector<Edge>& edges,
                            const std::vector<Asn>& isolated = {});

  void set_weight(Asn a, uint64_t w);

 private:
  std::vector<Asn> asns_;  // sorted
  std::unordered_map<Asn, NodeId> index_;
  std::vector<std::vector<NodeId>> providers_;
  std::vector<std::vector<NodeId>> customers_;
  std::vector<std::vector<NodeId>> peers_;
  std::vector<uint64_t> weights_;
  uint64_t total_weight_ = 0;
  std::vector<Edge> edges_;  // normalized, sorted
};

/// Parses a CAIDA-style relationship file: `<asn>|<asn>|<rel>` with
/// rel -1 (first provides second) or 0 (peers). A fourth |-field is
/// tolerated and ignored; `#` starts a comment line. Any other rel code,
/// malformed line, self-loop or duplicate pair fails loudly.
ASGraph parse_relationships(std::string_view text);

/// Canonical text form; parse(serialize(g)) reproduces g exactly.
std::string serialize_relationships(const ASGraph& g);

/// Merges a "asn,count" CSV into the graph weights. Unknown ASNs are
/// collected and reported together; negative or garbled counts are parse
/// errors; re-specifying an ASN is an error.
void load_client_weights(ASGraph& g, std::string_view csv);

/// Subgraph of relay-eligible ASes: zero customers, connected by the
/// peer-peer edges they share.
struct PeerGraph {
  std::vector<Asn> nodes;              // sorted
  std::vector<std::vector<int>> adj;   // local indices, sorted
  std::unordered_map<Asn, int> index;

  bool has(Asn a) const { return index.count(a) != 0; }
  int local(Asn a) const { return index.at(a); }
  size_t edge_count() const;
};

PeerGraph candidate_relays(const ASGraph& g);

}  // namespace relaynet
