#include "relaynet/netsim.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <random>
#include <sstream>
#include <variant>

#include "json.hpp"
#include "relaynet/errors.hpp"

namespace relaynet {

namespace {

using nlohmann::json;

NodeKind kind_from_string(const std::string& s) {
  if (s == "client") return NodeKind::Client;
  if (s == "legacy") return NodeKind::Legacy;
  if (s == "switch") return NodeKind::Switch;
  if (s == "controller") return NodeKind::Controller;
  throw ValidationError("scenario: unknown node kind '" + s + "'");
}

}  // namespace

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scenario file: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ParseError("scenario json: " + std::string(e.what()));
  }

  ScenarioConfig cfg;
  auto get = [&](const json& obj, const char* key, auto& field) {
    if (obj.contains(key)) field = obj.at(key).get<std::decay_t<decltype(field)>>();
  };
  get(j, "seed", cfg.seed);
  get(j, "stop_ms", cfg.stop_ms);
  get(j, "timer_tick_ms", cfg.timer_tick_ms);
  get(j, "default_delay_ms", cfg.default_delay_ms);
  get(j, "target_exp", cfg.target_exp);
  get(j, "source_rotation", cfg.source_rotation);
  get(j, "verify_blk_checksums", cfg.verify_blk_checksums);
  get(j, "resend_inv_on_nconn", cfg.resend_inv_on_nconn);
  if (j.contains("segment_bytes"))
    cfg.switch_cfg.segment_bytes = j.at("segment_bytes").get<uint32_t>();
  if (j.contains("client")) {
    const json& c = j.at("client");
    get(c, "window", cfg.client_cfg.window);
    get(c, "timeout_ms", cfg.client_cfg.timeout_ms);
    get(c, "timeout_cap_ms", cfg.client_cfg.timeout_cap_ms);
    get(c, "max_retries", cfg.client_cfg.max_retries);
  }
  if (j.contains("switch")) {
    const json& s = j.at("switch");
    get(s, "whitelist_threshold", cfg.switch_cfg.whitelist_threshold);
    get(s, "sentlimit_block_factor", cfg.switch_cfg.sentlimit_block_factor);
    get(s, "sentlimit_epoch_ms", cfg.switch_cfg.sentlimit_epoch_ms);
    get(s, "whitelist_ttl_ms", cfg.switch_cfg.whitelist_ttl_ms);
  }

  for (const json& n : j.at("nodes")) {
    NodeDef d;
    d.name = n.at("name").get<std::string>();
    d.kind = kind_from_string(n.at("kind").get<std::string>());
    d.addr.ip = parse_ipv4(n.at("ip").get<std::string>());
    d.addr.port = n.contains("port") ? n.at("port").get<uint16_t>() : 8333;
    get(n, "controller", d.controller);
    if (n.contains("switch")) d.switch_name = n.at("switch").get<std::string>();
    get(n, "relays", d.relays);
    cfg.nodes.push_back(std::move(d));
  }
  if (j.contains("links")) {
    for (const json& l : j.at("links")) {
      LinkDef d;
      d.a = l.at("a").get<std::string>();
      d.b = l.at("b").get<std::string>();
      get(l, "delay_ms", d.delay_ms);
      get(l, "loss", d.loss);
      cfg.links.push_back(std::move(d));
    }
  }
  if (j.contains("bitcoin_links")) {
    for (const json& l : j.at("bitcoin_links"))
      cfg.bitcoin_links.emplace_back(l.at(0).get<std::string>(), l.at(1).get<std::string>());
  }
  if (j.contains("adversary")) {
    const json& a = j.at("adversary");
    std::string type = a.value("type", "none");
    if (type == "none") {
      cfg.adversary.type = AdversaryPolicy::Type::None;
    } else if (type == "drop_crossing") {
      cfg.adversary.type = AdversaryPolicy::Type::DropCrossing;
      for (const json& s : a.at("side_s")) cfg.adversary.side_s.insert(s.get<std::string>());
      for (const json& s : a.at("side_n")) cfg.adversary.side_n.insert(s.get<std::string>());
    } else if (type == "drop_by_relay_ip") {
      cfg.adversary.type = AdversaryPolicy::Type::DropByRelayIp;
      for (const json& s : a.at("relay_ips"))
        cfg.adversary.relay_ips.push_back(parse_ipv4(s.get<std::string>()));
      get(a, "match_source", cfg.adversary.match_source);
      get(a, "match_dest", cfg.adversary.match_dest);
    } else {
      throw ValidationError("scenario: unknown adversary type '" + type + "'");
    }
  }
  if (j.contains("block")) {
    BlockSpec b;
    b.origin = j.at("block").at("origin").get<std::string>();
    get(j.at("block"), "at_ms", b.at_ms);
    get(j.at("block"), "size_bytes", b.size_bytes);
    cfg.block = b;
  }
  validate_scenario(cfg);
  return cfg;
}

void validate_scenario(const ScenarioConfig& cfg) {
  std::map<std::string, const NodeDef*> by_name;
  std::set<uint32_t> ips;
  for (const NodeDef& n : cfg.nodes) {
    if (by_name.count(n.name))
      throw ValidationError("scenario: duplicate node name '" + n.name + "'");
    if (!ips.insert(n.addr.ip).second)
      throw ValidationError("scenario: duplicate node ip for '" + n.name + "'");
    by_name[n.name] = &n;
  }
  auto need = [&](const std::string& name, NodeKind kind, const std::string& ctx) {
    auto it = by_name.find(name);
    if (it == by_name.end())
      throw ValidationError("scenario: " + ctx + " references unknown node '" + name + "'");
    if (it->second->kind != kind)
      throw ValidationError("scenario: " + ctx + " node '" + name + "' has the wrong kind");
  };
  for (const NodeDef& n : cfg.nodes) {
    if (n.kind == NodeKind::Switch) {
      if (n.controller.empty())
        throw ValidationError("scenario: switch '" + n.name + "' missing controller");
      need(n.controller, NodeKind::Controller, "switch '" + n.name + "'");
    }
    if (n.kind == NodeKind::Controller) {
      if (n.switch_name.empty())
        throw ValidationError("scenario: controller '" + n.name + "' missing switch");
      need(n.switch_name, NodeKind::Switch, "controller '" + n.name + "'");
    }
    if (n.kind == NodeKind::Client)
      for (const std::string& r : n.relays) need(r, NodeKind::Switch, "client '" + n.name + "'");
  }
  for (const LinkDef& l : cfg.links) {
    if (!by_name.count(l.a) || !by_name.count(l.b))
      throw ValidationError("scenario: link references unknown node " + l.a + "|" + l.b);
    if (l.loss < 0.0 || l.loss >= 1.0)
      throw ValidationError("scenario: link loss out of [0,1) for " + l.a + "|" + l.b);
  }
  for (const auto& [a, b] : cfg.bitcoin_links)
    if (!by_name.count(a) || !by_name.count(b))
      throw ValidationError("scenario: bitcoin link references unknown node " + a + "|" + b);
  if (cfg.adversary.type == AdversaryPolicy::Type::DropCrossing) {
    for (const std::string& s : cfg.adversary.side_s)
      if (cfg.adversary.side_n.count(s))
        throw ValidationError("scenario: adversary sides overlap on '" + s + "'");
  }
  if (cfg.block) {
    auto it = by_name.find(cfg.block->origin);
    if (it == by_name.end())
      throw ValidationError("scenario: block origin unknown node '" + cfg.block->origin + "'");
    if (it->second->kind != NodeKind::Client && it->second->kind != NodeKind::Legacy)
      throw ValidationError("scenario: block origin '" + cfg.block->origin +
                            "' must be a client or legacy node");
  }
}

// ---------------------------------------------------------------------------
// Simulation engine
// ---------------------------------------------------------------------------

namespace {

struct GossipBody {
  Block block;
};
struct UploadBody {
  Block block;
};
struct WireBody {
  Message msg;
  uint16_t checksum = 0;
  std::optional<Endpoint> forward_to;  // controller asks its switch to forward
};

struct Packet {
  Endpoint src, dst;
  std::variant<WireBody, GossipBody, UploadBody> body;
};

// Abuser behavior for the DDoS scenario, driven by kick events.
struct AbuserState {
  bool spoof = true;
  int phase = 0;  // 0 syn, 1 await synack, 2 flooding
  uint32_t secret = 0;
  int sent = 0;
  int budget = 0;
};

struct NodeRt {
  NodeDef def;
  int controller_idx = -1;  // switch
  int switch_idx = -1;      // controller
  std::optional<ClientState> client;
  std::optional<SwitchState> sw;
  std::optional<ControllerState> ctrl;
  std::optional<AbuserState> abuser;
  std::set<BlockHash> known;  // gossip dedupe (legacy + clients)
  std::vector<int> gossip_peers;
  bool benign_counted = false;
  bool first_get_seg = true;
  uint32_t rotate_counter = 0;
};

struct Event {
  uint64_t t = 0;
  uint64_t seq = 0;
  enum Kind { Deliver, Timer, Mine, AbuserKick } kind = Deliver;
  int node = -1;
  Packet pkt;
  std::string via_link;  // stats key of the carrying link (Deliver only)
};

struct EventCmp {
  bool operator()(const Event& a, const Event& b) const {
    return std::tie(a.t, a.seq) > std::tie(b.t, b.seq);
  }
};

class Sim {
 public:
  Sim(const ScenarioConfig& cfg, int attacker_rate, int attacker_count,
      double spoofed_fraction, bool ddos)
      : cfg_(cfg), rng_(cfg.seed), ddos_(ddos), attacker_rate_(attacker_rate) {
    build_nodes();
    if (ddos_) add_abusers(attacker_count, spoofed_fraction);
    build_links();
    prepare_block();
    schedule_initial();
  }

  Metrics run();

 private:
  const ScenarioConfig& cfg_;
  std::mt19937_64 rng_;
  bool ddos_;
  int attacker_rate_ = 0;

  std::vector<NodeRt> nodes_;
  std::map<std::string, int> name_idx_;
  std::map<uint32_t, int> ip_idx_;
  struct Link {
    uint64_t delay;
    double loss;
    std::string key;
  };
  std::map<uint64_t, Link> links_;  // (min_idx<<32|max_idx)
  Metrics metrics_;
  std::priority_queue<Event, std::vector<Event>, EventCmp> queue_;
  uint64_t seq_ = 0;
  std::optional<Block> test_block_;
  BlockHash test_hash_{};
  Target target_{};

  uint64_t link_key(int a, int b) const {
    return (uint64_t(std::min(a, b)) << 32) | uint64_t(std::max(a, b));
  }

  void build_nodes() {
    target_ = target_from_exponent(cfg_.target_exp);
    for (const NodeDef& d : cfg_.nodes) {
      name_idx_[d.name] = int(nodes_.size());
      nodes_.push_back(NodeRt{d});
    }
    for (NodeRt& n : nodes_) {
      ip_idx_[n.def.addr.ip] = int(&n - nodes_.data());
      switch (n.def.kind) {
        case NodeKind::Switch: {
          n.controller_idx = name_idx_.at(n.def.controller);
          Endpoint ctrl = nodes_[n.controller_idx].def.addr;
          n.sw = make_switch(cfg_.switch_cfg, n.def.addr, ctrl, cfg_.seed ^ 0xC0FFEE, 0);
          break;
        }
        case NodeKind::Controller: {
          n.switch_idx = name_idx_.at(n.def.switch_name);
          ControllerState st;
          st.self = n.def.addr;
          st.switch_ep = nodes_[n.switch_idx].def.addr;
          st.target = target_;
          st.segment_bytes = uint16_t(cfg_.switch_cfg.segment_bytes);
          st.resend_inv_on_nconn = cfg_.resend_inv_on_nconn || ddos_;
          n.ctrl = st;
          break;
        }
        case NodeKind::Client: {
          std::vector<Endpoint> relays;
          for (const std::string& r : n.def.relays)
            relays.push_back(nodes_[name_idx_.at(r)].def.addr);
          n.client = make_client(cfg_.client_cfg, n.def.addr, relays);
          break;
        }
        case NodeKind::Legacy:
          break;
      }
    }
    for (const auto& [a, b] : cfg_.bitcoin_links) {
      int ia = name_idx_.at(a), ib = name_idx_.at(b);
      nodes_[ia].gossip_peers.push_back(ib);
      nodes_[ib].gossip_peers.push_back(ia);
    }
  }

  void add_abusers(int count, double spoofed_fraction) {
    // Abusers attach to the first switch.
    int sw = -1;
    for (size_t i = 0; i < nodes_.size(); ++i)
      if (nodes_[i].def.kind == NodeKind::Switch) {
        sw = int(i);
        break;
      }
    if (sw < 0) throw ValidationError("ddos: scenario has no switch");
    int spoofed = int(count * spoofed_fraction);
    for (int i = 0; i < count; ++i) {
      NodeRt n;
      n.def.name = "abuser" + std::to_string(i);
      n.def.kind = NodeKind::Client;  // addressing only
      n.def.addr = Endpoint{0xC0000000u + uint32_t(i), 4444};
      n.def.relays = {nodes_[sw].def.name};
      n.abuser = AbuserState{};
      n.abuser->spoof = i < spoofed;
      n.abuser->budget = n.abuser->spoof ? 4 : 400;
      name_idx_[n.def.name] = int(nodes_.size());
      ip_idx_[n.def.addr.ip] = int(nodes_.size());
      nodes_.push_back(std::move(n));
    }
  }

  void build_links() {
    for (const LinkDef& l : cfg_.links) {
      int a = name_idx_.at(l.a), b = name_idx_.at(l.b);
      links_[link_key(a, b)] = Link{l.delay_ms, l.loss, l.a + "|" + l.b};
    }
  }

  Link& link_between(int a, int b) {
    auto key = link_key(a, b);
    auto it = links_.find(key);
    if (it == links_.end()) {
      std::string name = nodes_[a].def.name + "|" + nodes_[b].def.name;
      if (a > b) name = nodes_[b].def.name + "|" + nodes_[a].def.name;
      it = links_.emplace(key, Link{cfg_.default_delay_ms, 0.0, name}).first;
    }
    return it->second;
  }

  void prepare_block() {
    if (!cfg_.block && !ddos_) return;
    uint32_t size = cfg_.block ? cfg_.block->size_bytes : 16 * cfg_.switch_cfg.segment_bytes;
    if (size < kBlockHeaderBytes) throw ValidationError("scenario: block smaller than header");
    std::vector<uint8_t> body(size - kBlockHeaderBytes);
    std::mt19937_64 body_rng(cfg_.seed ^ 0xB10C);
    for (auto& b : body) b = uint8_t(body_rng());
    test_block_ = mine_block(BlockHash{}, std::move(body), target_, 1);
    test_hash_ = block_hash(*test_block_);
  }

  void schedule_initial() {
    for (size_t i = 0; i < nodes_.size(); ++i) {
      NodeRt& n = nodes_[i];
      if (n.client && !n.abuser) {
        // Staggered periodic timers keep client work deterministic.
        uint64_t start = (i % 7);
        for (uint64_t t = start; t <= cfg_.stop_ms; t += cfg_.timer_tick_ms)
          push_event(Event{t, 0, Event::Timer, int(i), {}});
      }
      if (n.abuser) {
        uint64_t start = 1 + (i % 97);
        push_event(Event{start, 0, Event::AbuserKick, int(i), {}});
      }
    }
    if (cfg_.block && test_block_)
      push_event(Event{cfg_.block->at_ms, 0, Event::Mine, name_idx_.at(cfg_.block->origin), {}});
    if (ddos_ && test_block_) {
      // Preload the relay with the block it will be serving.
      for (NodeRt& n : nodes_) {
        if (n.def.kind != NodeKind::Controller) continue;
        ControllerOutput out = on_new_block(*n.ctrl, *test_block_);
        int self = int(&n - nodes_.data());
        for (auto& [dst, msg] : out.sends) emit_from(self, dst, msg, 0);
      }
    }
  }

  void push_event(Event e) {
    e.seq = seq_++;
    queue_.push(std::move(e));
  }

  // --- packet movement ---

  bool adversary_drops(const Packet& p, int from_idx, int to_idx) {
    // A switch and its controller are one relay node; their link never
    // crosses the Internet.
    if (nodes_[from_idx].controller_idx == to_idx || nodes_[to_idx].controller_idx == from_idx)
      return false;
    const AdversaryPolicy& a = cfg_.adversary;
    switch (a.type) {
      case AdversaryPolicy::Type::None:
        return false;
      case AdversaryPolicy::Type::DropCrossing: {
        const std::string& fn = nodes_[from_idx].def.name;
        const std::string& tn = nodes_[to_idx].def.name;
        bool fs = a.side_s.count(fn), fn_ = a.side_n.count(fn);
        bool ts = a.side_s.count(tn), tn_ = a.side_n.count(tn);
        return (fs && tn_) || (fn_ && ts);
      }
      case AdversaryPolicy::Type::DropByRelayIp: {
        auto match = [&](uint32_t ip) {
          return std::find(a.relay_ips.begin(), a.relay_ips.end(), ip) != a.relay_ips.end();
        };
        if (a.match_source && match(p.src.ip)) return true;
        if (a.match_dest && match(p.dst.ip)) return true;
        return false;
      }
    }
    return false;
  }

  void send_packet(int from_idx, Packet p, uint64_t now) {
    // Every client-bound BLK a switch transmits is checked against a
    // from-scratch checksum over the final packet header, loss or not.
    if (cfg_.verify_blk_checksums && nodes_[from_idx].def.kind == NodeKind::Switch) {
      if (auto* wb = std::get_if<WireBody>(&p.body)) {
        if (wb->msg.kind == MsgKind::Blk && !(wb->msg.flags & kFlagCachedSum)) {
          ++metrics_.blk_checksum_checks;
          std::vector<uint8_t> bytes = encode(wb->msg);
          uint16_t expect = udp_checksum(p.src.ip, p.dst.ip, p.src.port, p.dst.port, bytes);
          if (expect != wb->checksum) ++metrics_.blk_checksum_mismatches;
        }
      }
    }
    auto it = ip_idx_.find(p.dst.ip);
    if (it == ip_idx_.end()) {
      // Replies to spoofed sources go nowhere.
      LinkStats& ls = metrics_.links[nodes_[from_idx].def.name + "|void"];
      ++ls.sent;
      ++ls.delivered;
      return;
    }
    int to_idx = it->second;
    Link& link = link_between(from_idx, to_idx);
    LinkStats& ls = metrics_.links[link.key];
    ++ls.sent;
    if (adversary_drops(p, from_idx, to_idx)) {
      ++ls.adversary_dropped;
      return;
    }
    if (link.loss > 0.0) {
      double draw = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
      if (draw < link.loss) {
        ++ls.lost;
        return;
      }
    }
    Event e;
    e.t = now + link.delay;
    e.kind = Event::Deliver;
    e.node = to_idx;
    e.pkt = std::move(p);
    e.via_link = link.key;
    push_event(std::move(e));
  }

  void emit_from(int node_idx, Endpoint dst, const Message& msg, uint64_t now,
                 uint16_t checksum = 0) {
    NodeRt& n = nodes_[node_idx];
    Packet p;
    p.src = n.def.addr;
    p.dst = dst;
    if (n.def.kind == NodeKind::Controller && dst != nodes_[n.switch_idx].def.addr) {
      // Controller packets to the outside go through its switch.
      p.dst = nodes_[n.switch_idx].def.addr;
      p.body = WireBody{msg, checksum, dst};
      send_packet(node_idx, std::move(p), now);
      return;
    }
    p.body = WireBody{msg, checksum, std::nullopt};
    send_packet(node_idx, std::move(p), now);
  }

  // Switch-originated packet, with optional source rotation.
  void emit_from_switch(int sw_idx, Endpoint dst, const Message& msg, uint16_t checksum,
                        uint64_t now) {
    NodeRt& n = nodes_[sw_idx];
    Packet p;
    p.src = n.def.addr;
    p.dst = dst;
    uint16_t csum = checksum;
    if (cfg_.source_rotation && dst != nodes_[n.controller_idx].def.addr) {
      uint32_t rotated = n.def.addr.ip ^ ((++n.rotate_counter % 251 + 1) << 20);
      csum = udp_checksum_update_src_ip(csum, n.def.addr.ip, rotated);
      p.src.ip = rotated;
    }
    p.body = WireBody{msg, csum, std::nullopt};
    send_packet(sw_idx, std::move(p), now);
  }

  // --- block learning & gossip ---

  void learn_block(int idx, const Block& b, uint64_t now, const char* how) {
    NodeRt& n = nodes_[idx];
    BlockHash h = block_hash(b);
    if (n.known.count(h)) return;
    n.known.insert(h);
    if (h == test_hash_ && !metrics_.block_arrival_ms.count(n.def.name)) {
      metrics_.block_arrival_ms[n.def.name] = now;
      metrics_.milestones.push_back(Milestone{now, std::string("block_learned_") + how, n.def.name});
    }
    // Gossip to bitcoin neighbors.
    for (int peer : n.gossip_peers) {
      Packet p;
      p.src = n.def.addr;
      p.dst = nodes_[peer].def.addr;
      p.body = GossipBody{b};
      send_packet(idx, std::move(p), now);
    }
    // Relay-connected clients advertise fresh blocks they did not get from
    // the relay path itself.
    if (n.client && std::string(how) != "relay") {
      ClientOutput out = client_step_local_block(*n.client, b, now);
      flush_client(idx, out, now);
    }
  }

  void flush_client(int idx, ClientOutput& out, uint64_t now) {
    for (auto& [dst, msg] : out.sends) emit_from(idx, dst, msg, now);
    for (UploadIntent& u : out.uploads) {
      Packet p;
      p.src = nodes_[idx].def.addr;
      p.dst = u.relay;
      p.body = UploadBody{u.block};
      send_packet(idx, std::move(p), now);
      metrics_.milestones.push_back(Milestone{now, "upload_sent", nodes_[idx].def.name});
    }
    for (BlockHash& h : out.completed) {
      if (h == test_hash_) {
        metrics_.milestones.push_back(Milestone{now, "download_complete", nodes_[idx].def.name});
        auto bytes = nodes_[idx].client->completed_blocks.at(h);
        if (test_block_ && bytes != serialize_block(*test_block_))
          ++metrics_.reassembly_mismatches;
        learn_block(idx, deserialize_block(bytes), now, "relay");
      }
    }
  }

  void flush_switch(int idx, SwitchOutput& out, uint64_t now) {
    NodeRt& n = nodes_[idx];
    for (OutPacket& op : out.out) {
      if (op.msg.kind == MsgKind::Ctr)
        metrics_.milestones.push_back(Milestone{now, "ctr_sent", n.def.name});
      emit_from_switch(idx, op.dst, op.msg, op.udp_checksum, now);
    }
    bool admission_changed = false;
    for (SwitchNote& note : out.notes) {
      switch (note.kind) {
        case NoteKind::NewConnection:
          ++metrics_.peerlist_connections;
          admission_changed = true;
          break;
        case NoteKind::WhitelistAdd:
          metrics_.milestones.push_back(Milestone{now, "whitelist_add", n.def.name});
          admission_changed = true;
          break;
        case NoteKind::BlacklistAdd:
          ++metrics_.blacklist_inserts;
          admission_changed = true;
          break;
        case NoteKind::UpdateCommitted:
          metrics_.milestones.push_back(Milestone{now, "update_committed", n.def.name});
          break;
        case NoteKind::UpdateRejected:
          metrics_.milestones.push_back(Milestone{now, "update_rejected", n.def.name});
          break;
      }
    }
    if (admission_changed)
      metrics_.occupancy.push_back(
          {now, uint64_t(n.sw->whitelist.size()), n.sw->stats.blacklist_inserts});
  }

  void flush_controller(int idx, ControllerOutput& out, uint64_t now) {
    for (auto& [dst, msg] : out.sends) emit_from(idx, dst, msg, now);
  }

  // Controller accepted a block: push switch/INV traffic out, then hand the
  // block to peer relays over the intra-relay mesh.
  void controller_accept(int idx, ControllerOutput& out, const Block& b, uint64_t now) {
    flush_controller(idx, out, now);
    if (!out.accepted) return;
    for (int peer : nodes_[idx].gossip_peers) {
      Packet p;
      p.src = nodes_[idx].def.addr;
      p.dst = nodes_[peer].def.addr;
      p.body = GossipBody{b};
      send_packet(idx, std::move(p), now);
    }
  }

  // --- delivery ---

  void deliver(int idx, Packet& p, uint64_t now) {
    NodeRt& n = nodes_[idx];
    if (n.abuser) {
      deliver_abuser(idx, p, now);
      return;
    }
    switch (n.def.kind) {
      case NodeKind::Switch: {
        if (auto* wb = std::get_if<WireBody>(&p.body)) {
          bool from_ctrl = (p.src == nodes_[n.controller_idx].def.addr);
          if (wb->forward_to && from_ctrl) {
            if (wb->msg.kind == MsgKind::Inv) {
              uint16_t csum = 0;  // stamped fresh at forward time
              std::vector<uint8_t> bytes = encode(wb->msg);
              csum = udp_checksum(n.def.addr.ip, wb->forward_to->ip, n.def.addr.port,
                                  wb->forward_to->port, bytes);
              emit_from_switch(idx, *wb->forward_to, wb->msg, csum, now);
            }
            return;
          }
          if (wb->msg.kind == MsgKind::Adv)
            metrics_.milestones.push_back(Milestone{now, "adv_received", n.def.name});
          SwitchOutput out = handle_packet(*n.sw, p.src, wb->msg, now);
          flush_switch(idx, out, now);
        } else if (auto* ub = std::get_if<UploadBody>(&p.body)) {
          // Only whitelisted clients may reach the controller.
          if (is_whitelisted(*n.sw, p.src, now)) {
            Packet fwd;
            fwd.src = p.src;  // controller sees the client identity
            fwd.dst = nodes_[n.controller_idx].def.addr;
            fwd.body = std::move(*ub);
            send_packet(idx, std::move(fwd), now);
          } else {
            ++n.sw->stats.dropped;
          }
        }
        return;
      }

      case NodeKind::Controller: {
        if (auto* wb = std::get_if<WireBody>(&p.body)) {
          if (wb->msg.kind == MsgKind::Nconn) {
            Endpoint peer{wb->msg.ipv4, wb->msg.port};
            ControllerOutput out = on_nconn(*n.ctrl, peer);
            flush_controller(idx, out, now);
          }
        } else if (auto* ub = std::get_if<UploadBody>(&p.body)) {
          metrics_.milestones.push_back(Milestone{now, "upload_received", n.def.name});
          ControllerOutput out = on_block_upload(*n.ctrl, p.src, ub->block);
          if (out.accepted)
            metrics_.milestones.push_back(Milestone{now, "block_validated", n.def.name});
          controller_accept(idx, out, ub->block, now);
        } else if (auto* gb = std::get_if<GossipBody>(&p.body)) {
          // Intra-relay propagation: a peer relay handed us a block.
          ControllerOutput out = on_block_upload(*n.ctrl, p.src, gb->block);
          controller_accept(idx, out, gb->block, now);
        }
        return;
      }

      case NodeKind::Client: {
        if (auto* wb = std::get_if<WireBody>(&p.body)) {
          if (wb->msg.kind == MsgKind::Inv && !n.client->known_hashes.count(wb->msg.hash))
            metrics_.milestones.push_back(Milestone{now, "inv_received", n.def.name});
          ClientOutput out = client_step_inbound(*n.client, p.src, wb->msg, now);
          if (n.first_get_seg)
            for (auto& [dst, msg] : out.sends)
              if (msg.kind == MsgKind::GetSeg) {
                metrics_.milestones.push_back(Milestone{now, "get_seg_first", n.def.name});
                n.first_get_seg = false;
                break;
              }
          flush_client(idx, out, now);
        } else if (auto* gb = std::get_if<GossipBody>(&p.body)) {
          learn_block(idx, gb->block, now, "gossip");
        }
        return;
      }

      case NodeKind::Legacy: {
        if (auto* gb = std::get_if<GossipBody>(&p.body)) learn_block(idx, gb->block, now, "gossip");
        return;
      }
    }
  }

  void deliver_abuser(int idx, Packet& p, uint64_t now) {
    NodeRt& n = nodes_[idx];
    if (auto* wb = std::get_if<WireBody>(&p.body)) {
      if (wb->msg.kind == MsgKind::SynAck && n.abuser->phase <= 1) {
        n.abuser->secret = wb->msg.secret;
        n.abuser->phase = 2;
        Message ack;
        ack.kind = MsgKind::Ack;
        ack.secret = wb->msg.secret;
        emit_from(idx, relay_addr_of(idx), ack, now);
      }
    }
  }

  Endpoint relay_addr_of(int idx) {
    return nodes_[name_idx_.at(nodes_[idx].def.relays.at(0))].def.addr;
  }

  void abuser_kick(int idx, uint64_t now) {
    NodeRt& n = nodes_[idx];
    AbuserState& a = *n.abuser;
    if (a.sent >= a.budget || now > cfg_.stop_ms) return;
    if (a.spoof) {
      // Spoofed SYN: forged source, the handshake can never complete.
      Packet p;
      p.src = Endpoint{0xD0000000u + uint32_t(idx * 13 + a.sent), 5555};
      p.dst = relay_addr_of(idx);
      Message syn;
      syn.kind = MsgKind::Syn;
      p.body = WireBody{syn, 0, std::nullopt};
      send_packet(idx, std::move(p), now);
      ++a.sent;
    } else if (a.phase == 0) {
      Message syn;
      syn.kind = MsgKind::Syn;
      emit_from(idx, relay_addr_of(idx), syn, now);
      a.phase = 1;
      ++a.sent;
    } else if (a.phase == 2) {
      // Connected: hammer the advertised block from segment zero forever.
      Message gs;
      gs.kind = MsgKind::GetSeg;
      gs.hash = test_hash_;
      gs.seg_id = uint16_t(a.sent % 4);
      emit_from(idx, relay_addr_of(idx), gs, now);
      ++a.sent;
    }
    uint64_t gap = attacker_rate_ > 0 ? std::max<uint64_t>(1, 1000 / attacker_rate_) : 50;
    push_event(Event{now + gap, 0, Event::AbuserKick, idx, {}});
  }

  void mine(int idx, uint64_t now) {
    metrics_.milestones.push_back(Milestone{now, "mined", nodes_[idx].def.name});
    learn_block(idx, *test_block_, now, "local");
  }
};

Metrics Sim::run() {
  while (!queue_.empty()) {
    Event e = queue_.top();
    queue_.pop();
    if (e.t > cfg_.stop_ms) {
      // Everything still queued is in flight at stop.
      if (e.kind == Event::Deliver) ++metrics_.links[e.via_link].inflight_at_stop;
      metrics_.end_ms = cfg_.stop_ms;
      continue;
    }
    metrics_.end_ms = std::max(metrics_.end_ms, e.t);
    switch (e.kind) {
      case Event::Deliver: {
        ++metrics_.links[e.via_link].delivered;
        deliver(e.node, e.pkt, e.t);
        break;
      }
      case Event::Timer: {
        NodeRt& n = nodes_[e.node];
        if (n.client) {
          ClientOutput out = client_step_timer(*n.client, e.t);
          flush_client(e.node, out, e.t);
        }
        break;
      }
      case Event::Mine:
        mine(e.node, e.t);
        break;
      case Event::AbuserKick:
        abuser_kick(e.node, e.t);
        break;
    }
  }

  // Verdicts.
  bool expects_block = test_block_.has_value();
  if (expects_block) {
    bool all = true;
    for (NodeRt& n : nodes_) {
      if (n.abuser) continue;
      if (n.def.kind == NodeKind::Client || n.def.kind == NodeKind::Legacy) {
        bool learned = n.known.count(test_hash_) != 0;
        if (n.def.kind == NodeKind::Client && n.client &&
            n.client->known_hashes.count(test_hash_))
          learned = true;
        if (!learned) all = false;
        if (n.def.kind == NodeKind::Client && n.client) {
          ++metrics_.benign_total;
          if (n.client->known_hashes.count(test_hash_) || n.known.count(test_hash_))
            ++metrics_.benign_completed;
        }
      }
    }
    metrics_.all_learned = all;
    metrics_.partitioned = !all;
  }
  std::sort(metrics_.milestones.begin(), metrics_.milestones.end(),
            [](const Milestone& a, const Milestone& b) { return a.t < b.t; });
  return metrics_;
}

}  // namespace

Metrics run_scenario(const ScenarioConfig& cfg) {
  validate_scenario(cfg);
  Sim sim(cfg, 0, 0, 0.0, false);
  return sim.run();
}

Metrics ddos_scenario(const ScenarioConfig& cfg, int attacker_rate, int attacker_count,
                      double spoofed_fraction) {
  validate_scenario(cfg);
  Sim sim(cfg, attacker_rate, attacker_count, spoofed_fraction, true);
  return sim.run();
}

std::string Metrics::summary() const {
  std::ostringstream out;
  out << "end_ms=" << end_ms << "\n";
  out << "all_learned=" << (all_learned ? "true" : "false") << "\n";
  out << "partition_verdict=" << (partitioned ? "partitioned" : "connected") << "\n";
  out << "peerlist_connections=" << peerlist_connections << "\n";
  out << "blacklist_inserts=" << blacklist_inserts << "\n";
  out << "blk_checksum_checks=" << blk_checksum_checks << "\n";
  out << "blk_checksum_mismatches=" << blk_checksum_mismatches << "\n";
  out << "benign_completed=" << benign_completed << "/" << benign_total << "\n";
  uint64_t sent = 0, delivered = 0, lost = 0, adv = 0, inflight = 0;
  for (const auto& [k, l] : links) {
    sent += l.sent;
    delivered += l.delivered;
    lost += l.lost;
    adv += l.adversary_dropped;
    inflight += l.inflight_at_stop;
  }
  out << "packets sent=" << sent << " delivered=" << delivered << " lost=" << lost
      << " adversary_dropped=" << adv << " inflight_at_stop=" << inflight << "\n";
  return out.str();
}

std::string Metrics::arrivals_csv() const {
  std::ostringstream out;
  out << "node,arrival_ms\n";
  for (const auto& [node, t] : block_arrival_ms) out << node << "," << t << "\n";
  return out.str();
}

std::string Metrics::links_csv() const {
  std::ostringstream out;
  out << "link,sent,delivered,lost,adversary_dropped,inflight_at_stop\n";
  for (const auto& [k, l] : links)
    out << k << "," << l.sent << "," << l.delivered << "," << l.lost << ","
        << l.adversary_dropped << "," << l.inflight_at_stop << "\n";
  return out.str();
}

bool Metrics::milestone_order(const std::vector<std::string>& tags) const {
  size_t want = 0;
  for (const Milestone& m : milestones) {
    if (want < tags.size() && m.tag == tags[want]) ++want;
  }
  return want == tags.size();
}

}  // namespace relaynet
