#include "relaynet/block.hpp"

#include <openssl/sha.h>

#include <cstring>

#include "relaynet/errors.hpp"

namespace relaynet {

namespace {

void put32(uint8_t* p, uint32_t v) {
  p[0] = uint8_t(v >> 24);
  p[1] = uint8_t(v >> 16);
  p[2] = uint8_t(v >> 8);
  p[3] = uint8_t(v);
}

uint32_t get32(const uint8_t* p) {
  return uint32_t(p[0]) << 24 | uint32_t(p[1]) << 16 | uint32_t(p[2]) << 8 | p[3];
}

}  // namespace

std::array<uint8_t, kBlockHeaderBytes> serialize_header(const BlockHeader& h) {
  std::array<uint8_t, kBlockHeaderBytes> out;
  std::memcpy(out.data(), h.prev_hash.data(), 32);
  std::memcpy(out.data() + 32, h.merkle_root.data(), 32);
  put32(out.data() + 64, h.nonce);
  put32(out.data() + 68, h.timestamp);
  put32(out.data() + 72, h.target_enc);
  return out;
}

std::vector<uint8_t> serialize_block(const Block& b) {
  auto head = serialize_header(b.header);
  std::vector<uint8_t> out;
  out.reserve(head.size() + b.body.size());
  out.assign(head.begin(), head.end());
  if (!b.body.empty()) out.insert(out.end(), b.body.begin(), b.body.end());
  return out;
}

Block deserialize_block(std::span<const uint8_t> bytes) {
  if (bytes.size() < kBlockHeaderBytes)
    throw ValidationError("block: shorter than its header");
  Block b;
  std::memcpy(b.header.prev_hash.data(), bytes.data(), 32);
  std::memcpy(b.header.merkle_root.data(), bytes.data() + 32, 32);
  b.header.nonce = get32(bytes.data() + 64);
  b.header.timestamp = get32(bytes.data() + 68);
  b.header.target_enc = get32(bytes.data() + 72);
  b.body.assign(bytes.begin() + kBlockHeaderBytes, bytes.end());
  return b;
}

size_t block_size(const Block& b) { return kBlockHeaderBytes + b.body.size(); }

BlockHash sha256d(std::span<const uint8_t> bytes) {
  BlockHash first, second;
  SHA256(bytes.data(), bytes.size(), first.data());
  SHA256(first.data(), first.size(), second.data());
  return second;
}

BlockHash block_hash(const Block& b) {
  auto head = serialize_header(b.header);
  return sha256d(head);
}

Target target_from_exponent(int bits) {
  if (bits < 0 || bits > 255) throw ValidationError("target exponent out of range");
  Target t{};
  int byte = 31 - bits / 8;
  t[byte] = uint8_t(1) << (bits % 8);
  return t;
}

bool hash_meets_target(const BlockHash& h, const Target& t) {
  return std::memcmp(h.data(), t.data(), 32) <= 0;
}

Block mine_block(const BlockHash& prev, std::vector<uint8_t> body, const Target& target,
                 uint32_t timestamp) {
  Block b;
  b.header.prev_hash = prev;
  b.header.timestamp = timestamp;
  // Merkle root stands in for a commitment to the body.
  b.header.merkle_root = sha256d(body);
  b.body = std::move(body);
  for (uint64_t nonce = 0;; ++nonce) {
    if (nonce > UINT32_MAX) throw ValidationError("mine_block: nonce space exhausted");
    b.header.nonce = uint32_t(nonce);
    if (hash_meets_target(block_hash(b), target)) return b;
  }
}

}  // namespace relaynet
