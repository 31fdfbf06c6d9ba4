#include "relaynet/switch_dataplane.hpp"

#include <algorithm>
#include <fstream>

#include "json.hpp"
#include "relaynet/errors.hpp"

namespace relaynet {

SwitchConfig switch_config_from_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open switch config: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ParseError("switch config: " + std::string(e.what()));
  }
  SwitchConfig c;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("peerlist_capacity", c.peerlist_capacity);
  get("peerlist_fp", c.peerlist_fp);
  get("whitelist_capacity", c.whitelist_capacity);
  get("whitelist_fp", c.whitelist_fp);
  get("blacklist_capacity", c.blacklist_capacity);
  get("blacklist_fp", c.blacklist_fp);
  get("hashmem_capacity", c.hashmem_capacity);
  get("hashmem_fp", c.hashmem_fp);
  get("whitelist_threshold", c.whitelist_threshold);
  get("sentlimit_rows", c.sentlimit_rows);
  get("sentlimit_cols", c.sentlimit_cols);
  get("sentlimit_epoch_ms", c.sentlimit_epoch_ms);
  get("sentlimit_block_factor", c.sentlimit_block_factor);
  get("segment_bytes", c.segment_bytes);
  get("block_capacity_bytes", c.block_capacity_bytes);
  get("whitelist_ttl_ms", c.whitelist_ttl_ms);
  get("peerlist_rotate_ms", c.peerlist_rotate_ms);
  get("key_grace_ms", c.key_grace_ms);
  return c;
}

double switch_memory_budget_bytes(const SwitchConfig& cfg) {
  double total = 0;
  total += 2 * BloomParams::for_capacity(cfg.peerlist_capacity, cfg.peerlist_fp).bytes();
  total += BloomParams::for_capacity(cfg.whitelist_capacity, cfg.whitelist_fp).bytes();
  total += BloomParams::for_capacity(cfg.blacklist_capacity, cfg.blacklist_fp).bytes();
  total += BloomParams::for_capacity(cfg.hashmem_capacity, cfg.hashmem_fp).bytes();
  total += double(cfg.block_capacity_bytes);  // serving-block segment store
  total += double(cfg.block_capacity_bytes / cfg.segment_bytes) * 2;  // cached sums
  total += double(cfg.sentlimit_rows) * cfg.sentlimit_cols * sizeof(uint16_t);
  total += double(cfg.whitelist_threshold) * (sizeof(WhitelistEntry));
  return total;
}

SwitchState make_switch(const SwitchConfig& cfg, Endpoint self, Endpoint controller,
                        uint64_t key, uint64_t now) {
  SwitchState s;
  s.cfg = cfg;
  s.self = self;
  s.controller = controller;
  s.peer_active = BloomFilter::for_capacity(cfg.peerlist_capacity, cfg.peerlist_fp, 0x9001);
  s.peer_previous =
      BloomFilter::for_capacity(cfg.peerlist_capacity, cfg.peerlist_fp, 0x9002);
  s.whitelist_bf = BloomFilter::for_capacity(cfg.whitelist_capacity, cfg.whitelist_fp, 0x9003);
  s.blacklist = BloomFilter::for_capacity(cfg.blacklist_capacity, cfg.blacklist_fp, 0x9004);
  s.hashmem = BloomFilter::for_capacity(cfg.hashmem_capacity, cfg.hashmem_fp, 0x9005);
  s.sentlimit = CountMinSketch(cfg.sentlimit_rows, cfg.sentlimit_cols, 0x9006);
  s.sentlimit_epoch_end = now + cfg.sentlimit_epoch_ms;
  s.peer_epoch_started = now;
  s.key_current = key;
  s.key_previous = key;
  return s;
}

uint32_t secret_for(Endpoint ep, uint64_t key) {
  auto kb = ep.key_bytes();
  return uint32_t(hash64(kb, key));
}

void rotate_key(SwitchState& s, uint64_t new_key, uint64_t now) {
  s.key_previous = s.key_current;
  s.key_current = new_key;
  s.key_grace_until = now + s.cfg.key_grace_ms;
}

namespace {

void tick(SwitchState& s, uint64_t now) {
  if (now >= s.sentlimit_epoch_end) {
    s.sentlimit.reset();
    uint64_t e = s.cfg.sentlimit_epoch_ms;
    s.sentlimit_epoch_end += ((now - s.sentlimit_epoch_end) / e + 1) * e;
  }
  if (now - s.peer_epoch_started >= s.cfg.peerlist_rotate_ms) {
    std::swap(s.peer_active, s.peer_previous);
    s.peer_active.clear();
    s.peer_epoch_started = now;
  }
}

void purge_whitelist(SwitchState& s, uint64_t now) {
  size_t before = s.whitelist.size();
  std::erase_if(s.whitelist, [&](const WhitelistEntry& e) { return e.expires_at <= now; });
  if (s.whitelist.size() != before) {
    // The filter cannot delete; rebuild it from the surviving entries.
    s.whitelist_bf.clear();
    for (const WhitelistEntry& e : s.whitelist) {
      auto kb = e.ep.key_bytes();
      s.whitelist_bf.insert(kb);
    }
  }
}

bool in_peerlist(const SwitchState& s, Endpoint ep) {
  auto kb = ep.key_bytes();
  return s.peer_active.maybe_contains(kb) || s.peer_previous.maybe_contains(kb);
}

bool secret_valid(const SwitchState& s, Endpoint ep, uint32_t secret, uint64_t now) {
  if (secret == secret_for(ep, s.key_current)) return true;
  return now < s.key_grace_until && secret == secret_for(ep, s.key_previous);
}

const StoredBlock* find_block(const SwitchState& s, const BlockHash& h) {
  if (s.active_block && s.active_block->hash == h) return &*s.active_block;
  if (s.previous_block && s.previous_block->hash == h) return &*s.previous_block;
  return nullptr;
}

// Serves one segment as a client-bound BLK with the UDP checksum assembled
// from the cached payload sum.
OutPacket make_blk(const SwitchState& s, Endpoint dst, const StoredBlock& blk,
                   const Segment& seg) {
  Message m;
  m.kind = MsgKind::Blk;
  m.flags = 0;
  m.hash = blk.hash;
  m.seg_id = seg.index;
  m.seg_count = blk.seg_count;
  m.payload = seg.bytes;

  // Checksum from the cached payload sum: only the 41 header bytes before
  // the payload are walked.
  std::vector<uint8_t> wire = encode(m);
  std::span<const uint8_t> header_bytes(wire.data(), wire.size() - seg.bytes.size());
  uint16_t udp_len = uint16_t(8 + wire.size());
  uint16_t csum = udp_checksum_cached(s.self.ip, dst.ip, s.self.port, dst.port, udp_len,
                                      header_bytes, seg.cached_sum);
  return OutPacket{dst, std::move(m), csum};
}

void stage_segment(SwitchState& s, const Message& m, SwitchOutput& out) {
  if (!s.staging || s.staging->hash != m.hash) return;
  if (m.seg_count != s.staging->seg_count || m.seg_id >= s.staging->seg_count) return;
  if (ones_sum(m.payload) != m.cached_sum) return;  // corrupt segment
  auto& slot = s.staging->segments[m.seg_id];
  if (slot) {
    if (slot->bytes != m.payload) {
      // Conflicting duplicate: abandon the update, keep serving the old block.
      out.notes.push_back(SwitchNote{NoteKind::UpdateRejected, {}, s.staging->hash});
      s.staging.reset();
    }
    return;  // identical retransmit
  }
  slot = Segment{m.seg_id, m.payload, m.cached_sum};
  ++s.staging->received;
  if (s.staging->received == s.staging->seg_count) {
    StoredBlock nb;
    nb.hash = s.staging->hash;
    nb.seg_count = s.staging->seg_count;
    nb.segments.reserve(nb.seg_count);
    for (auto& seg : s.staging->segments) nb.segments.push_back(std::move(*seg));
    s.previous_block = std::move(s.active_block);
    s.active_block = std::move(nb);
    auto hb = std::span<const uint8_t>(s.active_block->hash);
    s.hashmem.insert(hb);
    s.staging.reset();
    ++s.stats.updates_committed;
    out.notes.push_back(SwitchNote{NoteKind::UpdateCommitted, {}, s.active_block->hash});
  }
}

}  // namespace

bool is_whitelisted(SwitchState& s, Endpoint ep, uint64_t now) {
  auto kb = ep.key_bytes();
  if (!s.whitelist_bf.maybe_contains(kb)) return false;
  purge_whitelist(s, now);
  for (const WhitelistEntry& e : s.whitelist)
    if (e.ep == ep) return true;
  return false;
}

size_t whitelist_size(SwitchState& s, uint64_t now) {
  purge_whitelist(s, now);
  return s.whitelist.size();
}

SwitchOutput handle_packet(SwitchState& s, Endpoint from, const Message& m, uint64_t now) {
  SwitchOutput out;
  ++s.stats.packets;
  tick(s, now);

  auto from_key = from.key_bytes();
  bool from_controller = (from == s.controller);
  if (!from_controller && s.blacklist.maybe_contains(from_key)) {
    ++s.stats.dropped;
    return out;
  }

  switch (m.kind) {
    case MsgKind::Syn: {
      Message reply;
      reply.kind = MsgKind::SynAck;
      reply.secret = secret_for(from, s.key_current);
      std::vector<uint8_t> bytes = encode(reply);
      uint16_t csum = udp_checksum(s.self.ip, from.ip, s.self.port, from.port, bytes);
      out.out.push_back(OutPacket{from, std::move(reply), csum});
      ++s.stats.synacks_sent;
      return out;
    }

    case MsgKind::Ack: {
      if (!secret_valid(s, from, m.secret, now)) {
        ++s.stats.bad_secret;
        ++s.stats.dropped;
        return out;
      }
      bool known = in_peerlist(s, from);
      if (!known || !s.peer_active.maybe_contains(from_key)) s.peer_active.insert(from_key);
      if (!known) {
        ++s.stats.connections;
        out.notes.push_back(SwitchNote{NoteKind::NewConnection, from, {}});
      }
      // Every completed handshake notifies the controller, re-asserted
      // ACKs included; the controller's peer set is idempotent and can
      // re-advertise the active block to the (re)joiner.
      Message nconn;
      nconn.kind = MsgKind::Nconn;
      nconn.ipv4 = from.ip;
      nconn.port = from.port;
      std::vector<uint8_t> bytes = encode(nconn);
      uint16_t csum =
          udp_checksum(s.self.ip, s.controller.ip, s.self.port, s.controller.port, bytes);
      out.out.push_back(OutPacket{s.controller, std::move(nconn), csum});
      return out;
    }

    case MsgKind::GetSeg: {
      if (!in_peerlist(s, from)) {
        ++s.stats.dropped;
        return out;
      }
      uint32_t est = s.sentlimit.add(from_key);
      if (s.active_block &&
          est > s.cfg.sentlimit_block_factor * uint32_t(s.active_block->seg_count)) {
        s.blacklist.insert(from_key);
        ++s.stats.blacklist_inserts;
        ++s.stats.dropped;
        out.notes.push_back(SwitchNote{NoteKind::BlacklistAdd, from, {}});
        return out;
      }
      const StoredBlock* blk = find_block(s, m.hash);
      if (!blk || m.seg_id >= blk->seg_count) {
        ++s.stats.dropped;
        return out;
      }
      out.out.push_back(make_blk(s, from, *blk, blk->segments[m.seg_id]));
      ++s.stats.blk_served;
      return out;
    }

    case MsgKind::Adv: {
      auto hb = std::span<const uint8_t>(m.hash);
      if (s.hashmem.maybe_contains(hb)) {
        ++s.stats.dropped;
        return out;
      }
      purge_whitelist(s, now);
      if (int(s.whitelist.size()) >= s.cfg.whitelist_threshold) {
        ++s.stats.dropped;  // at capacity: stop admitting new uploaders
        return out;
      }
      bool already = false;
      for (const WhitelistEntry& e : s.whitelist)
        if (e.ep == from) already = true;
      if (!already) {
        s.whitelist.push_back(WhitelistEntry{from, now + s.cfg.whitelist_ttl_ms});
        s.whitelist_bf.insert(from_key);
        ++s.stats.whitelist_inserts;
        out.notes.push_back(SwitchNote{NoteKind::WhitelistAdd, from, {}});
      }
      Message ctr;
      ctr.kind = MsgKind::Ctr;
      std::vector<uint8_t> bytes = encode(ctr);
      uint16_t csum = udp_checksum(s.self.ip, from.ip, s.self.port, from.port, bytes);
      out.out.push_back(OutPacket{from, std::move(ctr), csum});
      return out;
    }

    case MsgKind::Upd: {
      if (!from_controller) {
        ++s.stats.dropped;
        return out;
      }
      StagingBlock st;
      st.hash = m.hash;
      st.seg_count = m.seg_count;
      st.segments.assign(m.seg_count, std::nullopt);
      s.staging = std::move(st);
      return out;
    }

    case MsgKind::Blk: {
      if (!from_controller || !(m.flags & kFlagCachedSum)) {
        ++s.stats.dropped;
        return out;
      }
      stage_segment(s, m, out);
      return out;
    }

    case MsgKind::SynAck:
    case MsgKind::Ctr:
    case MsgKind::Inv:
    case MsgKind::Nconn:
      ++s.stats.dropped;  // never valid inbound at the switch
      return out;
  }
  ++s.stats.dropped;
  return out;
}

bool apply_update(SwitchState& s, const Message& upd, std::span<const Message> blks,
                  uint64_t now) {
  if (upd.kind != MsgKind::Upd) throw ValidationError("apply_update: first message not UPD");
  // The batch contract is strict: every segment exactly once.
  std::vector<int> count(upd.seg_count, 0);
  for (const Message& b : blks) {
    if (b.kind != MsgKind::Blk || !(b.flags & kFlagCachedSum) || b.hash != upd.hash) return false;
    if (b.seg_id >= upd.seg_count) return false;
    ++count[b.seg_id];
  }
  for (int c : count)
    if (c != 1) return false;

  handle_packet(s, s.controller, upd, now);
  for (const Message& b : blks) handle_packet(s, s.controller, b, now);
  bool committed = s.active_block && s.active_block->hash == upd.hash;
  if (!committed) s.staging.reset();
  return committed;
}

}  // namespace relaynet
