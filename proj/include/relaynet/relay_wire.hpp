#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace relaynet {

inline constexpr uint8_t kWireVersion = 0x01;
inline constexpr size_t kMaxSegmentBytes = 1024;
// Flag bit on controller-to-switch BLK: a cached one's-complement sum of
// the payload trails the message.
inline constexpr uint8_t kFlagCachedSum = 0x01;

using BlockHash = std::array<uint8_t, 32>;

enum class MsgKind : uint8_t {
  Syn = 0x01,
  SynAck = 0x02,
  Ack = 0x03,
  Nconn = 0x04,
  Ctr = 0x05,
  Adv = 0x06,
  Inv = 0x07,
  GetSeg = 0x08,
  Blk = 0x09,
  Upd = 0x0A,
};

const char* msg_kind_name(MsgKind k);

/// One protocol message. Fields are meaningful per kind:
///   SynAck/Ack: secret. Nconn: ipv4, port. Adv: hash.
///   Inv/Upd: hash, seg_count. GetSeg: hash, seg_id.
///   Blk: hash, seg_id, seg_count, payload, and cached_sum iff
///   flags & kFlagCachedSum. Syn/Ctr carry nothing.
/// All integers big-endian on the wire.
struct Message {
  MsgKind kind = MsgKind::Syn;
  uint8_t flags = 0;
  uint32_t secret = 0;
  uint32_t ipv4 = 0;
  uint16_t port = 0;
  BlockHash hash{};
  uint16_t seg_id = 0;
  uint16_t seg_count = 0;
  std::vector<uint8_t> payload;
  uint16_t cached_sum = 0;

  bool operator==(const Message&) const = default;
};

enum class DecodeError : uint8_t {
  UnknownKind,  // bad version byte or unassigned kind
  Truncated,    // byte count does not match the declared layout
  BadFlags,     // flag bits or field values violate the layout rules
};

using DecodeResult = std::variant<Message, DecodeError>;

std::vector<uint8_t> encode(const Message& m);
DecodeResult decode(std::span<const uint8_t> bytes);

inline bool decode_ok(const DecodeResult& r) { return std::holds_alternative<Message>(r); }

/// RFC 1071 one's-complement sum of the bytes as big-endian 16-bit words
/// with end-around carry; an odd tail is padded with a zero byte.
uint16_t ones_sum(std::span<const uint8_t> bytes);

/// Folds a 32-bit accumulator into 16 bits with end-around carry.
uint16_t ones_fold(uint32_t sum);

/// Assembles a UDP checksum from a precomputed payload-tail sum instead of
/// walking the tail: pseudo-header + UDP header + message header bytes +
/// cached tail sum, complemented, 0x0000 sent as 0xFFFF. `length` is the
/// UDP length field (8 + payload bytes). An odd-sized header puts the tail
/// at odd offset, which byte-swaps its contribution.
uint16_t udp_checksum_cached(uint32_t src_ip, uint32_t dst_ip, uint16_t src_port,
                             uint16_t dst_port, uint16_t length,
                             std::span<const uint8_t> header_bytes, uint16_t cached_sum);

/// From-scratch RFC 768 checksum over a whole UDP payload.
uint16_t udp_checksum(uint32_t src_ip, uint32_t dst_ip, uint16_t src_port,
                      uint16_t dst_port, std::span<const uint8_t> payload);

/// Incremental checksum fix-up when the source address is rewritten
/// (one's-complement delta per RFC 1624); preserves the zero encoding.
uint16_t udp_checksum_update_src_ip(uint16_t checksum, uint32_t old_ip, uint32_t new_ip);

}  // namespace relaynet
