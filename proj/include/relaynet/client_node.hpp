#pragma once

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "relaynet/block.hpp"
#include "relaynet/endpoint.hpp"
#include "relaynet/relay_wire.hpp"

namespace relaynet {

enum class ClientPhase : uint8_t { Idle, SynSent, Connected, CtrConnected };

struct ClientConfig {
  int window = 32;               // outstanding segment requests per download
  uint64_t timeout_ms = 250;     // first retransmit deadline
  uint64_t timeout_cap_ms = 4000;
  int max_retries = 8;           // per segment; beyond this the download fails
};

/// One relay connection of a client.
struct RelayConn {
  Endpoint relay;
  ClientPhase phase = ClientPhase::Idle;
  uint32_t secret = 0;
  uint64_t syn_deadline = 0;
  int syn_retries = 0;
  // While connected but idle the ACK is re-asserted with backoff, so a
  // lost handshake leg or a lost block advertisement self-heals.
  uint64_t reack_deadline = 0;
  uint64_t reack_interval_ms = 0;
};

struct Download {
  Endpoint relay;  // where GET_SEGs go
  uint16_t seg_count = 0;
  std::vector<std::optional<std::vector<uint8_t>>> segments;
  size_t received = 0;
  bool failed = false;
  bool complete = false;

  struct SegState {
    bool outstanding = false;
    int retries = 0;
    uint64_t deadline = 0;
  };
  std::vector<SegState> state;
  uint16_t next_unrequested = 0;
  size_t outstanding_count = 0;
};

/// Relay-protocol state machine for one client. Driven by the simulation
/// event loop; one instance per simulated client, no shared state.
struct ClientState {
  ClientConfig cfg;
  Endpoint self;
  std::vector<RelayConn> conns;
  std::map<BlockHash, Download> downloads;
  std::set<BlockHash> known_hashes;
  std::optional<Block> pending_upload;  // produced locally, awaiting CTR
  std::map<BlockHash, std::vector<uint8_t>> completed_blocks;
};

struct UploadIntent {
  Endpoint relay;
  Block block;
};

struct ClientOutput {
  std::vector<std::pair<Endpoint, Message>> sends;
  std::vector<UploadIntent> uploads;
  std::vector<BlockHash> completed;  // downloads finished this step
  std::vector<BlockHash> failed;     // retry budget exhausted this step
};

ClientState make_client(const ClientConfig& cfg, Endpoint self,
                        const std::vector<Endpoint>& relays);

/// Timer event: (re)send SYNs, re-request timed-out segments. Each timed-out
/// round also re-asserts the handshake ACK so a lost ACK cannot wedge a
/// download forever.
ClientOutput client_step_timer(ClientState& cs, uint64_t now);

/// Inbound message from a relay. With source rotation the packet source may
/// be unknown; matching falls back to message content.
ClientOutput client_step_inbound(ClientState& cs, Endpoint from, const Message& m,
                                 uint64_t now);

/// A block became known locally (mined here or learned over gossip):
/// advertise its hash to every connected relay.
ClientOutput client_step_local_block(ClientState& cs, const Block& b, uint64_t now);

/// Earliest deadline the event loop must wake this client for, if any.
std::optional<uint64_t> client_next_deadline(const ClientState& cs);

}  // namespace relaynet
