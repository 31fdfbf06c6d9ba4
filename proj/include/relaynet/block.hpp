#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "relaynet/relay_wire.hpp"

namespace relaynet {

inline constexpr size_t kMaxBlockBytes = 1 << 20;
inline constexpr size_t kBlockHeaderBytes = 76;

/// Simplified block: fixed header plus opaque body. The double-SHA-256 of
/// the serialized header is the block's identity and its proof-of-work
/// value.
struct BlockHeader {
  BlockHash prev_hash{};
  BlockHash merkle_root{};
  uint32_t nonce = 0;
  uint32_t timestamp = 0;
  uint32_t target_enc = 0;
};

struct Block {
  BlockHeader header;
  std::vector<uint8_t> body;
};

/// 256-bit big-endian difficulty threshold; a block is valid PoW when
/// hash(header) <= target.
using Target = std::array<uint8_t, 32>;

std::array<uint8_t, kBlockHeaderBytes> serialize_header(const BlockHeader& h);
std::vector<uint8_t> serialize_block(const Block& b);
/// Inverse of serialize_block; throws ValidationError on short input.
Block deserialize_block(std::span<const uint8_t> bytes);

size_t block_size(const Block& b);
BlockHash block_hash(const Block& b);
BlockHash sha256d(std::span<const uint8_t> bytes);

/// Threshold 2^bits (bits in [0, 255]).
Target target_from_exponent(int bits);
bool hash_meets_target(const BlockHash& h, const Target& t);

/// Searches nonces until the header hashes under the target. Meant for
/// toy targets where a few hundred attempts suffice.
Block mine_block(const BlockHash& prev, std::vector<uint8_t> body, const Target& target,
                 uint32_t timestamp);

}  // namespace relaynet
