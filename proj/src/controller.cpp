#include "relaynet/controller.hpp"

#include <algorithm>

namespace relaynet {

const char* block_invalid_name(BlockInvalid r) {
  switch (r) {
    case BlockInvalid::BadPoW: return "BadPoW";
    case BlockInvalid::BadParent: return "BadParent";
    case BlockInvalid::Oversize: return "Oversize";
  }
  return "?";
}

std::optional<BlockInvalid> validate_block(const Block& b, const ControllerState& st) {
  if (block_size(b) > kMaxBlockBytes) return BlockInvalid::Oversize;
  if (b.header.prev_hash != st.chain_tip) return BlockInvalid::BadParent;
  if (!hash_meets_target(block_hash(b), st.target)) return BlockInvalid::BadPoW;
  return std::nullopt;
}

ControllerOutput on_nconn(ControllerState& st, Endpoint peer) {
  ControllerOutput out;
  st.peers.insert(peer);
  if (st.resend_inv_on_nconn && st.active_inv) {
    Message inv = *st.active_inv;
    out.sends.emplace_back(peer, inv);
  }
  return out;
}

ControllerOutput on_new_block(ControllerState& st, const Block& b) {
  ControllerOutput out;
  if (validate_block(b, st)) return out;  // invalid: no messages, no state change

  BlockHash h = block_hash(b);
  std::vector<uint8_t> bytes = serialize_block(b);
  uint16_t seg_count = uint16_t((bytes.size() + st.segment_bytes - 1) / st.segment_bytes);

  Message upd;
  upd.kind = MsgKind::Upd;
  upd.hash = h;
  upd.seg_count = seg_count;
  out.sends.emplace_back(st.switch_ep, upd);

  for (uint16_t i = 0; i < seg_count; ++i) {
    size_t off = size_t(i) * st.segment_bytes;
    size_t len = std::min<size_t>(st.segment_bytes, bytes.size() - off);
    Message blk;
    blk.kind = MsgKind::Blk;
    blk.flags = kFlagCachedSum;
    blk.hash = h;
    blk.seg_id = i;
    blk.seg_count = seg_count;
    blk.payload.assign(bytes.begin() + off, bytes.begin() + off + len);
    blk.cached_sum = ones_sum(blk.payload);
    out.sends.emplace_back(st.switch_ep, std::move(blk));
  }

  Message inv;
  inv.kind = MsgKind::Inv;
  inv.hash = h;
  inv.seg_count = seg_count;
  for (const Endpoint& peer : st.peers) out.sends.emplace_back(peer, inv);

  st.chain_tip = h;
  st.known_hashes.insert(h);
  st.active_inv = inv;
  out.accepted = true;
  return out;
}

ControllerOutput on_block_upload(ControllerState& st, Endpoint from, const Block& b) {
  ControllerOutput out;
  (void)from;  // admission is the switch's job; the controller just validates
  if (st.known_hashes.count(block_hash(b))) return out;
  return on_new_block(st, b);
}

}  // namespace relaynet
