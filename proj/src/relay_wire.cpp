#include "relaynet/relay_wire.hpp"

#include <stdexcept>

namespace relaynet {

const char* msg_kind_name(MsgKind k) {
  switch (k) {
    case MsgKind::Syn: return "SYN";
    case MsgKind::SynAck: return "SYNACK";
    case MsgKind::Ack: return "ACK";
    case MsgKind::Nconn: return "NCONN";
    case MsgKind::Ctr: return "CTR";
    case MsgKind::Adv: return "ADV";
    case MsgKind::Inv: return "INV";
    case MsgKind::GetSeg: return "GET_SEG";
    case MsgKind::Blk: return "BLK";
    case MsgKind::Upd: return "UPD";
  }
  return "?";
}

namespace {

void put16(std::vector<uint8_t>& b, uint16_t v) {
  b.push_back(uint8_t(v >> 8));
  b.push_back(uint8_t(v));
}

void put32(std::vector<uint8_t>& b, uint32_t v) {
  b.push_back(uint8_t(v >> 24));
  b.push_back(uint8_t(v >> 16));
  b.push_back(uint8_t(v >> 8));
  b.push_back(uint8_t(v));
}

uint16_t get16(std::span<const uint8_t> b, size_t at) {
  return uint16_t(b[at]) << 8 | b[at + 1];
}

uint32_t get32(std::span<const uint8_t> b, size_t at) {
  return uint32_t(b[at]) << 24 | uint32_t(b[at + 1]) << 16 | uint32_t(b[at + 2]) << 8 |
         b[at + 3];
}

// Fixed payload size per kind; -1 for BLK (variable).
int fixed_payload_size(MsgKind k) {
  switch (k) {
    case MsgKind::Syn: return 0;
    case MsgKind::SynAck: return 4;
    case MsgKind::Ack: return 4;
    case MsgKind::Nconn: return 6;
    case MsgKind::Ctr: return 0;
    case MsgKind::Adv: return 32;
    case MsgKind::Inv: return 34;
    case MsgKind::GetSeg: return 34;
    case MsgKind::Blk: return -1;
    case MsgKind::Upd: return 34;
  }
  return -2;
}

}  // namespace

std::vector<uint8_t> encode(const Message& m) {
  if (m.kind == MsgKind::Blk) {
    if (m.payload.size() > kMaxSegmentBytes)
      throw std::invalid_argument("encode: BLK payload exceeds segment size");
    if (m.seg_id >= m.seg_count)
      throw std::invalid_argument("encode: BLK seg_id out of range");
    if (m.flags & ~kFlagCachedSum) throw std::invalid_argument("encode: bad BLK flags");
  } else if (m.flags != 0) {
    throw std::invalid_argument("encode: flags only defined for BLK");
  }

  std::vector<uint8_t> b;
  b.reserve(3 + 40 + m.payload.size());
  b.push_back(kWireVersion);
  b.push_back(uint8_t(m.kind));
  b.push_back(m.flags);
  switch (m.kind) {
    case MsgKind::Syn:
    case MsgKind::Ctr:
      break;
    case MsgKind::SynAck:
    case MsgKind::Ack:
      put32(b, m.secret);
      break;
    case MsgKind::Nconn:
      put32(b, m.ipv4);
      put16(b, m.port);
      break;
    case MsgKind::Adv:
      b.insert(b.end(), m.hash.begin(), m.hash.end());
      break;
    case MsgKind::Inv:
    case MsgKind::Upd:
      b.insert(b.end(), m.hash.begin(), m.hash.end());
      put16(b, m.seg_count);
      break;
    case MsgKind::GetSeg:
      b.insert(b.end(), m.hash.begin(), m.hash.end());
      put16(b, m.seg_id);
      break;
    case MsgKind::Blk:
      b.insert(b.end(), m.hash.begin(), m.hash.end());
      put16(b, m.seg_id);
      put16(b, m.seg_count);
      put16(b, uint16_t(m.payload.size()));
      b.insert(b.end(), m.payload.begin(), m.payload.end());
      if (m.flags & kFlagCachedSum) put16(b, m.cached_sum);
      break;
  }
  return b;
}

DecodeResult decode(std::span<const uint8_t> b) {
  if (b.size() < 3) return DecodeError::Truncated;
  if (b[0] != kWireVersion) return DecodeError::UnknownKind;
  uint8_t kind_byte = b[1];
  if (kind_byte < uint8_t(MsgKind::Syn) || kind_byte > uint8_t(MsgKind::Upd))
    return DecodeError::UnknownKind;

  Message m;
  m.kind = MsgKind(kind_byte);
  m.flags = b[2];
  if (m.kind != MsgKind::Blk && m.flags != 0) return DecodeError::BadFlags;
  if (m.kind == MsgKind::Blk && (m.flags & ~kFlagCachedSum)) return DecodeError::BadFlags;

  std::span<const uint8_t> p = b.subspan(3);
  int fixed = fixed_payload_size(m.kind);
  if (fixed >= 0 && int(p.size()) != fixed) return DecodeError::Truncated;

  switch (m.kind) {
    case MsgKind::Syn:
    case MsgKind::Ctr:
      break;
    case MsgKind::SynAck:
    case MsgKind::Ack:
      m.secret = get32(p, 0);
      break;
    case MsgKind::Nconn:
      m.ipv4 = get32(p, 0);
      m.port = get16(p, 4);
      break;
    case MsgKind::Adv:
      std::copy(p.begin(), p.begin() + 32, m.hash.begin());
      break;
    case MsgKind::Inv:
    case MsgKind::Upd:
      std::copy(p.begin(), p.begin() + 32, m.hash.begin());
      m.seg_count = get16(p, 32);
      break;
    case MsgKind::GetSeg:
      std::copy(p.begin(), p.begin() + 32, m.hash.begin());
      m.seg_id = get16(p, 32);
      break;
    case MsgKind::Blk: {
      size_t trailer = (m.flags & kFlagCachedSum) ? 2 : 0;
      if (p.size() < 38 + trailer) return DecodeError::Truncated;
      std::copy(p.begin(), p.begin() + 32, m.hash.begin());
      m.seg_id = get16(p, 32);
      m.seg_count = get16(p, 34);
      uint16_t payload_len = get16(p, 36);
      if (payload_len > kMaxSegmentBytes) return DecodeError::BadFlags;
      if (m.seg_id >= m.seg_count) return DecodeError::BadFlags;
      if (p.size() != 38 + payload_len + trailer) return DecodeError::Truncated;
      m.payload.assign(p.begin() + 38, p.begin() + 38 + payload_len);
      if (trailer) m.cached_sum = get16(p, 38 + payload_len);
      break;
    }
  }
  return m;
}

uint16_t ones_fold(uint32_t sum) {
  while (sum >> 16) sum = (sum & 0xFFFF) + (sum >> 16);
  return uint16_t(sum);
}

uint16_t ones_sum(std::span<const uint8_t> bytes) {
  uint32_t sum = 0;
  size_t i = 0;
  for (; i + 1 < bytes.size(); i += 2) sum += uint32_t(bytes[i]) << 8 | bytes[i + 1];
  if (i < bytes.size()) sum += uint32_t(bytes[i]) << 8;  // zero pad
  return ones_fold(sum);
}

namespace {

uint32_t pseudo_header_sum(uint32_t src_ip, uint32_t dst_ip, uint16_t src_port,
                           uint16_t dst_port, uint16_t length) {
  uint32_t sum = 0;
  sum += src_ip >> 16;
  sum += src_ip & 0xFFFF;
  sum += dst_ip >> 16;
  sum += dst_ip & 0xFFFF;
  sum += 17;  // protocol
  sum += length;
  // UDP header: ports, length, zero checksum field.
  sum += src_port;
  sum += dst_port;
  sum += length;
  return sum;
}

uint16_t swap16(uint16_t v) { return uint16_t(v << 8 | v >> 8); }

}  // namespace

uint16_t udp_checksum_cached(uint32_t src_ip, uint32_t dst_ip, uint16_t src_port,
                             uint16_t dst_port, uint16_t length,
                             std::span<const uint8_t> header_bytes, uint16_t cached_sum) {
  uint32_t sum = pseudo_header_sum(src_ip, dst_ip, src_port, dst_port, length);
  sum += ones_sum(header_bytes);
  // A tail starting at an odd byte offset contributes byte-swapped.
  sum += (header_bytes.size() % 2 != 0) ? swap16(cached_sum) : cached_sum;
  uint16_t folded = uint16_t(~ones_fold(sum));
  return folded == 0 ? 0xFFFF : folded;
}

uint16_t udp_checksum(uint32_t src_ip, uint32_t dst_ip, uint16_t src_port,
                      uint16_t dst_port, std::span<const uint8_t> payload) {
  uint16_t length = uint16_t(8 + payload.size());
  uint32_t sum = pseudo_header_sum(src_ip, dst_ip, src_port, dst_port, length);
  sum += ones_sum(payload);
  uint16_t folded = uint16_t(~ones_fold(sum));
  return folded == 0 ? 0xFFFF : folded;
}

uint16_t udp_checksum_update_src_ip(uint16_t checksum, uint32_t old_ip, uint32_t new_ip) {
  // Recover the folded sum (+0 and -0 are interchangeable addends), swap
  // the address words, re-complement.
  uint32_t sum = uint16_t(~checksum);
  sum += uint16_t(~(old_ip >> 16));
  sum += uint16_t(~(old_ip & 0xFFFF));
  sum += new_ip >> 16;
  sum += new_ip & 0xFFFF;
  uint16_t folded = uint16_t(~ones_fold(sum));
  return folded == 0 ? 0xFFFF : folded;
}

}  // namespace relaynet
