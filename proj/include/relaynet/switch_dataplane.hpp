#pragma once

#include <optional>
#include <vector>

#include "relaynet/bloom.hpp"
#include "relaynet/endpoint.hpp"
#include "relaynet/relay_wire.hpp"

namespace relaynet {

/// Structure sizing mirroring the switch memory table: capacities and
/// false-positive rates per component, plus protocol timers.
struct SwitchConfig {
  uint64_t peerlist_capacity = 100000;
  double peerlist_fp = 1e-4;
  uint64_t whitelist_capacity = 100;
  double whitelist_fp = 1e-4;
  uint64_t blacklist_capacity = 1000000;
  double blacklist_fp = 1e-3;
  uint64_t hashmem_capacity = 518823;
  double hashmem_fp = 1e-4;
  int whitelist_threshold = 100;

  int sentlimit_rows = 4;
  int sentlimit_cols = 2048;
  uint64_t sentlimit_epoch_ms = 10 * 60 * 1000;
  uint32_t sentlimit_block_factor = 3;  // ban past this many full-block equivalents

  uint32_t segment_bytes = 1024;
  uint64_t block_capacity_bytes = 1 << 20;

  uint64_t whitelist_ttl_ms = 4ULL * 24 * 3600 * 1000;
  uint64_t peerlist_rotate_ms = 4ULL * 3600 * 1000;
  uint64_t key_grace_ms = 60 * 1000;
};

/// Loads a JSON config with the same fields (all optional).
SwitchConfig switch_config_from_json(const std::string& path);

/// Memory the configured switch state occupies, accounted the way the
/// component table does: both peer filters, one block of segment storage,
/// the sketch, and the exact whitelist entries.
double switch_memory_budget_bytes(const SwitchConfig& cfg);

struct Segment {
  uint16_t index = 0;
  std::vector<uint8_t> bytes;
  uint16_t cached_sum = 0;
};

struct StoredBlock {
  BlockHash hash{};
  uint16_t seg_count = 0;
  std::vector<Segment> segments;  // indexed 0..seg_count-1, all present
};

struct StagingBlock {
  BlockHash hash{};
  uint16_t seg_count = 0;
  std::vector<std::optional<Segment>> segments;
  size_t received = 0;
};

struct WhitelistEntry {
  Endpoint ep;
  uint64_t expires_at = 0;
};

struct SwitchStats {
  uint64_t packets = 0;
  uint64_t dropped = 0;
  uint64_t synacks_sent = 0;
  uint64_t connections = 0;       // successful first-time ACKs
  uint64_t bad_secret = 0;
  uint64_t blk_served = 0;
  uint64_t blacklist_inserts = 0;
  uint64_t whitelist_inserts = 0;
  uint64_t updates_committed = 0;
  uint64_t probe_budget_violations = 0;
};

struct SwitchState {
  SwitchConfig cfg;
  Endpoint self;
  Endpoint controller;

  // Connected clients: two alternating filters so stale entries age out.
  // Inserts go to the active filter; lookups consult both.
  BloomFilter peer_active;
  BloomFilter peer_previous;
  uint64_t peer_epoch_started = 0;

  // Controller-eligible clients. The capped exact list is authoritative
  // (it can expire entries); the filter is the fast-path gate.
  BloomFilter whitelist_bf;
  std::vector<WhitelistEntry> whitelist;

  BloomFilter blacklist;
  BloomFilter hashmem;

  std::optional<StoredBlock> active_block;
  std::optional<StoredBlock> previous_block;
  std::optional<StagingBlock> staging;

  CountMinSketch sentlimit;
  uint64_t sentlimit_epoch_end = 0;

  uint64_t key_current = 0;
  uint64_t key_previous = 0;
  uint64_t key_grace_until = 0;

  SwitchStats stats;
};

SwitchState make_switch(const SwitchConfig& cfg, Endpoint self, Endpoint controller,
                        uint64_t key, uint64_t now);

/// Keyed pseudorandom 32-bit handshake secret for an endpoint.
uint32_t secret_for(Endpoint ep, uint64_t key);

/// Installs a new key; secrets under the old key stay valid for the grace
/// window only.
void rotate_key(SwitchState& s, uint64_t new_key, uint64_t now);

struct OutPacket {
  Endpoint dst;
  Message msg;
  uint16_t udp_checksum = 0;  // as the switch stamped it
};

enum class NoteKind : uint8_t {
  NewConnection,
  WhitelistAdd,
  BlacklistAdd,
  UpdateCommitted,
  UpdateRejected,
};

struct SwitchNote {
  NoteKind kind;
  Endpoint ep{};
  BlockHash hash{};
};

struct SwitchOutput {
  std::vector<OutPacket> out;
  std::vector<SwitchNote> notes;
};

/// Per-packet state machine. Every packet resolves to bounded work: a
/// constant number of filter probes, sketch updates, and one segment
/// lookup; misuse resolves to a drop or a blacklist insert, never an error.
SwitchOutput handle_packet(SwitchState& s, Endpoint from, const Message& m, uint64_t now);

/// Batch form of the controller update path: one UPD followed by cached-sum
/// BLKs covering each segment exactly once. Returns false (and keeps the
/// previously served block) when the batch is incomplete, duplicated, or
/// fails checksum validation.
bool apply_update(SwitchState& s, const Message& upd, std::span<const Message> blks,
                  uint64_t now);

/// Whitelist membership with lazy expiry.
bool is_whitelisted(SwitchState& s, Endpoint ep, uint64_t now);

/// Live whitelist size after expiring stale entries.
size_t whitelist_size(SwitchState& s, uint64_t now);

}  // namespace relaynet
