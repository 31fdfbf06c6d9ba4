#pragma once

#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "relaynet/routing.hpp"

namespace relaynet {

/// AS `attacker` tries to divert AS `victim`'s relay traffic.
struct AttackScenario {
  Asn attacker = 0;
  Asn victim = 0;
  friend auto operator<=>(const AttackScenario&, const AttackScenario&) = default;
};

/// Scenarios a single relay AS protects against.
struct ScenarioSet {
  Asn relay = 0;
  std::vector<AttackScenario> covered;  // sorted (attacker, victim)
};

enum class PathChoice : uint8_t { A, B };

/// Decides which of two routes the network would carry from the shared
/// source. Pops the common prefix up to the last AS the paths share; that
/// AS picks by relationship class toward its next hop (customer > peer >
/// provider), then by remaining length, then by the tie side (path B is
/// the attacker-side path). A path that ends at the divergence point wins
/// outright: its endpoint originates the prefix.
PathChoice more_preferred(std::span<const Asn> path_a, std::span<const Asn> path_b,
                          std::span<const RouteClass> classes_a,
                          std::span<const RouteClass> classes_b, const TieBreak& tb);

/// Lazily computed single-origin routing trees, keyed by destination.
/// Not thread-safe; give each worker thread its own cache.
class TreeCache {
 public:
  explicit TreeCache(const ASGraph& g) : g_(g) {}
  const RoutingOutcome& tree(Asn destination);
  const ASGraph& graph() const { return g_; }

 private:
  const ASGraph& g_;
  std::unordered_map<Asn, RoutingOutcome> trees_;
};

/// Attack scenarios relay `relay` covers: every (attacker m, victim v) pair
/// with w_v > 0, m not in {v, relay}, where the victim's route to the relay
/// beats its route to the attacker. Victims with no route to the relay
/// contribute nothing; attackers the victim cannot reach at all cannot pull
/// its traffic and count as covered.
ScenarioSet covered_scenarios(const ASGraph& g, Asn relay, const TieBreak& tb,
                              TreeCache& cache);

/// Weighted significance of the union of scenario sets: sum of the victim
/// weight over each distinct (attacker, victim) pair.
uint64_t coverage_weight(std::span<const ScenarioSet> sets, const ASGraph& g);

struct CdfPoint {
  double x = 0;
  double y = 0;
};

/// For each potential attacker, the fraction of client weight it can cut
/// off from every relay; emitted as an exact step function: for each
/// distinct fraction f, the fraction of ASes able to disconnect >= f.
/// Relay-hosting ASes are infrastructure, not attackers, and are excluded
/// from the attacker population (no relay can cover a scenario against
/// itself). Victims unreachable from every relay count as disconnectable
/// by anyone.
std::vector<CdfPoint> partition_cdf(const ASGraph& g, const std::vector<Asn>& relays,
                                    const TieBreak& tb, int jobs = 1);

/// Per-victim view: fraction of non-relay ASes that can cut the victim off
/// from all relays; emitted as (attacker fraction a, client weight fraction
/// whose vulnerability is <= a) at every distinct a.
std::vector<CdfPoint> client_vulnerability_cdf(const ASGraph& g,
                                               const std::vector<Asn>& relays,
                                               const TieBreak& tb, int jobs = 1);

/// Preference-ordered search for the /24-hosting baseline: walks outward
/// from the victim in descending route preference and returns the ASes
/// reached strictly before any other AS hosting clients. Equal-preference
/// ties dequeue per the tie side (FavorAttacker pops non-hosting ASes
/// first).
std::vector<Asn> p24_baseline_attackers(const ASGraph& g, Asn victim,
                                        const std::vector<Asn>& bitcoin_ases,
                                        const TieBreak& tb);

/// Monte-Carlo estimate of an attacker disconnecting `target` from the
/// relay peer graph when every peering link of the target is contested at
/// the tie-breaking stage and won with probability 1/2. Success means the
/// surviving graph no longer connects target to the rest.
double tie_break_disconnect_probability(const PeerGraph& relay_graph, Asn target,
                                        int trials, uint64_t seed);

}  // namespace relaynet
