#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "relaynet/client_node.hpp"
#include "relaynet/controller.hpp"
#include "relaynet/switch_dataplane.hpp"

namespace relaynet {

enum class NodeKind : uint8_t { Client, Legacy, Switch, Controller };

struct NodeDef {
  std::string name;
  NodeKind kind = NodeKind::Client;
  Endpoint addr;
  std::string controller;            // switch: its controller node
  std::string switch_name;           // controller: its switch node
  std::vector<std::string> relays;   // client: switch nodes it connects to
};

struct LinkDef {
  std::string a, b;
  uint64_t delay_ms = 1;
  double loss = 0.0;
};

/// What the on-path adversary does to transiting packets.
struct AdversaryPolicy {
  enum class Type : uint8_t { None, DropCrossing, DropByRelayIp };
  Type type = Type::None;
  // DropCrossing: drop traffic whose endpoints straddle the two sides,
  // forward the rest untouched.
  std::set<std::string> side_s, side_n;
  // DropByRelayIp: drop packets whose source and/or destination address
  // matches a known relay address.
  std::vector<uint32_t> relay_ips;
  bool match_source = true;
  bool match_dest = false;
};

struct BlockSpec {
  std::string origin;
  uint64_t at_ms = 0;
  uint32_t size_bytes = 4096;  // serialized size, header included
};

struct ScenarioConfig {
  uint64_t seed = 1;
  uint64_t stop_ms = 60000;
  uint64_t timer_tick_ms = 50;
  uint64_t default_delay_ms = 1;
  int target_exp = 248;
  bool source_rotation = false;
  bool verify_blk_checksums = true;
  bool resend_inv_on_nconn = false;
  SwitchConfig switch_cfg;
  ClientConfig client_cfg;
  std::vector<NodeDef> nodes;
  std::vector<LinkDef> links;
  std::vector<std::pair<std::string, std::string>> bitcoin_links;
  AdversaryPolicy adversary;
  std::optional<BlockSpec> block;
};

/// Reads a scenario JSON file (schema documented in docs/scenario_format.md).
ScenarioConfig load_scenario(const std::string& path);
/// Role/link consistency checks; throws ValidationError.
void validate_scenario(const ScenarioConfig& cfg);

struct LinkStats {
  uint64_t sent = 0;
  uint64_t delivered = 0;
  uint64_t lost = 0;
  uint64_t adversary_dropped = 0;
  uint64_t inflight_at_stop = 0;
};

struct Milestone {
  uint64_t t = 0;
  std::string tag;
  std::string node;
};

struct Metrics {
  std::map<std::string, uint64_t> block_arrival_ms;  // node -> first learn time
  std::map<std::string, LinkStats> links;            // "a|b" unordered key
  std::vector<Milestone> milestones;
  // (t, whitelist live size, blacklist inserts) at each admission change.
  std::vector<std::array<uint64_t, 3>> occupancy;
  bool all_learned = false;
  bool partitioned = false;
  uint64_t end_ms = 0;
  uint64_t blk_checksum_checks = 0;
  uint64_t blk_checksum_mismatches = 0;
  uint64_t reassembly_mismatches = 0;
  uint64_t peerlist_connections = 0;
  uint64_t blacklist_inserts = 0;
  int benign_total = 0;
  int benign_completed = 0;

  std::string summary() const;
  std::string arrivals_csv() const;
  std::string links_csv() const;
  bool milestone_order(const std::vector<std::string>& tags) const;
};

Metrics run_scenario(const ScenarioConfig& cfg);

/// Same event loop with an injected abuser population: spoofed-source SYN
/// flooders plus real clients that connect and over-request at
/// `attacker_rate` packets per second each. The relay's block is preloaded
/// and advertised to every new connection so benign clients (the Client
/// nodes in cfg) try to download through the noise.
Metrics ddos_scenario(const ScenarioConfig& cfg, int attacker_rate, int attacker_count,
                      double spoofed_fraction = 0.9);

}  // namespace relaynet
