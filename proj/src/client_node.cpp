#include "relaynet/client_node.hpp"

#include <algorithm>

namespace relaynet {

namespace {

Message get_seg(const BlockHash& h, uint16_t seg) {
  Message m;
  m.kind = MsgKind::GetSeg;
  m.hash = h;
  m.seg_id = seg;
  return m;
}

void request_seg(ClientState& cs, Download& d, const BlockHash& h, uint16_t seg,
                 uint64_t now, ClientOutput& out) {
  auto& st = d.state[seg];
  st.outstanding = true;
  st.deadline = now + std::min<uint64_t>(cs.cfg.timeout_ms << st.retries, cs.cfg.timeout_cap_ms);
  ++d.outstanding_count;
  out.sends.emplace_back(d.relay, get_seg(h, seg));
}

// Keeps up to `window` segments in flight, requesting in index order.
void fill_window(ClientState& cs, Download& d, const BlockHash& h, uint64_t now,
                 ClientOutput& out) {
  while (d.outstanding_count < size_t(cs.cfg.window) && d.next_unrequested < d.seg_count) {
    uint16_t seg = d.next_unrequested++;
    if (d.segments[seg]) continue;
    request_seg(cs, d, h, seg, now, out);
  }
}

RelayConn* conn_for(ClientState& cs, Endpoint relay) {
  for (RelayConn& c : cs.conns)
    if (c.relay == relay) return &c;
  return nullptr;
}

void send_adv(ClientState& cs, const BlockHash& h, ClientOutput& out) {
  for (RelayConn& c : cs.conns) {
    if (c.phase == ClientPhase::Connected || c.phase == ClientPhase::CtrConnected) {
      Message adv;
      adv.kind = MsgKind::Adv;
      adv.hash = h;
      out.sends.emplace_back(c.relay, adv);
    }
  }
}

}  // namespace

ClientState make_client(const ClientConfig& cfg, Endpoint self,
                        const std::vector<Endpoint>& relays) {
  ClientState cs;
  cs.cfg = cfg;
  cs.self = self;
  for (Endpoint r : relays) cs.conns.push_back(RelayConn{r});
  return cs;
}

ClientOutput client_step_timer(ClientState& cs, uint64_t now) {
  ClientOutput out;
  bool downloading = false;
  for (auto& [hash, d] : cs.downloads)
    if (!d.complete && !d.failed) downloading = true;

  for (RelayConn& c : cs.conns) {
    if (c.phase == ClientPhase::Idle ||
        (c.phase == ClientPhase::SynSent && now >= c.syn_deadline)) {
      if (c.phase == ClientPhase::SynSent) ++c.syn_retries;
      c.phase = ClientPhase::SynSent;
      c.syn_deadline =
          now + std::min<uint64_t>(cs.cfg.timeout_ms << c.syn_retries, cs.cfg.timeout_cap_ms);
      Message syn;
      syn.kind = MsgKind::Syn;
      out.sends.emplace_back(c.relay, syn);
    } else if (!downloading &&
               (c.phase == ClientPhase::Connected || c.phase == ClientPhase::CtrConnected) &&
               now >= c.reack_deadline) {
      c.reack_interval_ms = std::min<uint64_t>(
          c.reack_interval_ms ? c.reack_interval_ms * 2 : 1000, 8000);
      c.reack_deadline = now + c.reack_interval_ms;
      Message ack;
      ack.kind = MsgKind::Ack;
      ack.secret = c.secret;
      out.sends.emplace_back(c.relay, ack);
    }
  }

  for (auto& [hash, d] : cs.downloads) {
    if (d.complete || d.failed) continue;
    bool reacked = false;
    for (uint16_t seg = 0; seg < d.seg_count; ++seg) {
      auto& st = d.state[seg];
      if (!st.outstanding || now < st.deadline) continue;
      if (st.retries >= cs.cfg.max_retries) {
        d.failed = true;
        out.failed.push_back(hash);
        break;
      }
      if (!reacked) {
        // The relay may never have seen our ACK; repeat it before retrying
        // so a lost handshake leg cannot starve the download.
        reacked = true;
        if (RelayConn* c = conn_for(cs, d.relay);
            c && (c->phase == ClientPhase::Connected || c->phase == ClientPhase::CtrConnected)) {
          Message ack;
          ack.kind = MsgKind::Ack;
          ack.secret = c->secret;
          out.sends.emplace_back(c->relay, ack);
        }
      }
      ++st.retries;
      st.deadline = now + std::min<uint64_t>(cs.cfg.timeout_ms << st.retries, cs.cfg.timeout_cap_ms);
      out.sends.emplace_back(d.relay, get_seg(hash, seg));
    }
  }
  return out;
}

ClientOutput client_step_inbound(ClientState& cs, Endpoint from, const Message& m,
                                 uint64_t now) {
  ClientOutput out;
  switch (m.kind) {
    case MsgKind::SynAck: {
      RelayConn* c = conn_for(cs, from);
      if (!c) {
        // Rotated source: attribute to the only half-open connection.
        RelayConn* open = nullptr;
        int count = 0;
        for (RelayConn& rc : cs.conns)
          if (rc.phase == ClientPhase::SynSent) {
            open = &rc;
            ++count;
          }
        if (count != 1) return out;
        c = open;
      }
      if (c->phase != ClientPhase::SynSent && c->phase != ClientPhase::Idle) return out;
      c->secret = m.secret;
      c->phase = ClientPhase::Connected;
      c->reack_interval_ms = 1000;
      c->reack_deadline = now + c->reack_interval_ms;
      Message ack;
      ack.kind = MsgKind::Ack;
      ack.secret = m.secret;
      out.sends.emplace_back(c->relay, ack);
      if (cs.pending_upload) {
        // A block learned before the handshake finished still gets offered.
        Message adv;
        adv.kind = MsgKind::Adv;
        adv.hash = block_hash(*cs.pending_upload);
        out.sends.emplace_back(c->relay, adv);
      }
      return out;
    }

    case MsgKind::Inv: {
      if (cs.known_hashes.count(m.hash) || cs.downloads.count(m.hash)) return out;
      // Requests may only flow over an established connection.
      RelayConn* c = conn_for(cs, from);
      if (c && c->phase != ClientPhase::Connected && c->phase != ClientPhase::CtrConnected)
        return out;
      Endpoint relay = c ? c->relay : Endpoint{};
      if (!c) {
        for (RelayConn& rc : cs.conns)
          if (rc.phase == ClientPhase::Connected || rc.phase == ClientPhase::CtrConnected)
            relay = rc.relay;
        if (relay == Endpoint{}) return out;
      }
      if (m.seg_count == 0) return out;
      Download d;
      d.relay = relay;
      d.seg_count = m.seg_count;
      d.segments.assign(m.seg_count, std::nullopt);
      d.state.assign(m.seg_count, Download::SegState{});
      auto [it, ok] = cs.downloads.emplace(m.hash, std::move(d));
      fill_window(cs, it->second, m.hash, now, out);
      return out;
    }

    case MsgKind::Blk: {
      auto it = cs.downloads.find(m.hash);
      if (it == cs.downloads.end()) return out;
      Download& d = it->second;
      if (d.complete || d.failed) return out;
      if (m.seg_id >= d.seg_count || m.seg_count != d.seg_count) return out;
      auto& st = d.state[m.seg_id];
      if (st.outstanding) {
        st.outstanding = false;
        --d.outstanding_count;
      }
      if (!d.segments[m.seg_id]) {
        d.segments[m.seg_id] = m.payload;
        ++d.received;
      }
      if (d.received == d.seg_count) {
        d.complete = true;
        std::vector<uint8_t> bytes;
        for (auto& seg : d.segments) bytes.insert(bytes.end(), seg->begin(), seg->end());
        // Reassembly must hash to the advertised identity.
        if (bytes.size() >= kBlockHeaderBytes &&
            sha256d(std::span<const uint8_t>(bytes.data(), kBlockHeaderBytes)) == m.hash) {
          cs.known_hashes.insert(m.hash);
          cs.completed_blocks.emplace(m.hash, std::move(bytes));
          out.completed.push_back(m.hash);
        } else {
          d.failed = true;
          out.failed.push_back(m.hash);
        }
      } else {
        fill_window(cs, d, m.hash, now, out);
      }
      return out;
    }

    case MsgKind::Ctr: {
      RelayConn* c = conn_for(cs, from);
      if (!c) {
        for (RelayConn& rc : cs.conns)
          if (rc.phase == ClientPhase::Connected) c = &rc;
      }
      if (!c) return out;
      c->phase = ClientPhase::CtrConnected;
      if (cs.pending_upload)
        out.uploads.push_back(UploadIntent{c->relay, *cs.pending_upload});
      return out;
    }

    default:
      return out;  // clients ignore everything else
  }
}

ClientOutput client_step_local_block(ClientState& cs, const Block& b, uint64_t now) {
  (void)now;
  ClientOutput out;
  BlockHash h = block_hash(b);
  cs.known_hashes.insert(h);
  cs.pending_upload = b;
  send_adv(cs, h, out);
  return out;
}

std::optional<uint64_t> client_next_deadline(const ClientState& cs) {
  std::optional<uint64_t> next;
  auto consider = [&](uint64_t t) {
    if (!next || t < *next) next = t;
  };
  for (const RelayConn& c : cs.conns) {
    if (c.phase == ClientPhase::Idle) consider(0);
    if (c.phase == ClientPhase::SynSent) consider(c.syn_deadline);
  }
  for (const auto& [hash, d] : cs.downloads) {
    if (d.complete || d.failed) continue;
    for (const auto& st : d.state)
      if (st.outstanding) consider(st.deadline);
  }
  return next;
}

}  // namespace relaynet
