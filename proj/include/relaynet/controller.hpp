#pragma once

#include <optional>
#include <set>

#include "relaynet/block.hpp"
#include "relaynet/endpoint.hpp"
#include "relaynet/relay_wire.hpp"

namespace relaynet {

enum class BlockInvalid : uint8_t { BadPoW, BadParent, Oversize };
const char* block_invalid_name(BlockInvalid r);

/// Software half of a relay node. Learns connections from NCONN, validates
/// uploaded blocks, updates its switch, and fans INV out to known peers.
/// It never admits anyone itself; the switch owns admission.
struct ControllerState {
  Endpoint self;
  Endpoint switch_ep;
  std::set<Endpoint> peers;
  std::set<BlockHash> known_hashes;
  BlockHash chain_tip{};  // all-zero genesis
  Target target{};
  uint16_t segment_bytes = 1024;
  // Late joiners can be told about the active block at connect time;
  // off by default.
  bool resend_inv_on_nconn = false;
  std::optional<Message> active_inv;
};

struct ControllerOutput {
  std::vector<std::pair<Endpoint, Message>> sends;
  bool accepted = false;
};

/// Header-only validity: parent linkage, size cap, hash under target.
std::optional<BlockInvalid> validate_block(const Block& b, const ControllerState& st);

ControllerOutput on_nconn(ControllerState& st, Endpoint peer);

/// Splits an accepted block into segments with cached checksum sums,
/// emits UPD + BLK* toward the switch and INV to every known peer, and
/// advances the chain tip. Invalid blocks change nothing.
ControllerOutput on_new_block(ControllerState& st, const Block& b);

/// A whitelisted client delivered a block (the modeled TCP leg).
ControllerOutput on_block_upload(ControllerState& st, Endpoint from, const Block& b);

}  // namespace relaynet
