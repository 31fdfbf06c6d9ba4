#pragma once

#include <random>

#include "relaynet/topology.hpp"

// Seeded Internet-like topology: a small clique of peered roots, every
// later AS multi-homed to 1-3 providers above it, sprinkled peer edges,
// and client weight on a random subset of ASes.
inline relaynet::ASGraph random_topology(int n, uint64_t seed, double weighted_frac = 0.35) {
  using namespace relaynet;
  std::mt19937_64 rng(seed);
  int roots = std::max(2, n / 15);
  std::vector<Edge> edges;
  auto asn = [](int i) { return Asn(100 + i); };

  std::vector<std::vector<uint8_t>> related(n, std::vector<uint8_t>(n, 0));
  auto relate = [&](int a, int b) {
    related[a][b] = related[b][a] = 1;
  };

  for (int i = 0; i < roots; ++i)
    for (int j = i + 1; j < roots; ++j) {
      edges.push_back(Edge{asn(i), asn(j), Rel::PeerPeer});
      relate(i, j);
    }
  for (int i = roots; i < n; ++i) {
    int providers = 1 + int(rng() % 3);
    for (int p = 0; p < providers; ++p) {
      int j = int(rng() % i);
      if (related[i][j]) continue;
      edges.push_back(Edge{asn(j), asn(i), Rel::ProviderCustomer});
      relate(i, j);
    }
  }
  double peer_prob = 2.5 / n;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = roots; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (related[i][j]) continue;
      if (unit(rng) < peer_prob) {
        edges.push_back(Edge{asn(i), asn(j), Rel::PeerPeer});
        relate(i, j);
      }
    }

  ASGraph g = ASGraph::from_edges(edges);
  for (int i = 0; i < n; ++i)
    if (g.has_as(asn(i)) && unit(rng) < weighted_frac)
      g.set_weight(asn(i), 1 + rng() % 10);
  return g;
}
