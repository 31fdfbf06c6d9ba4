#include "relaynet/topology.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <sstream>

namespace relaynet {

namespace {

// Key for an unordered AS pair.
uint64_t pair_key(Asn a, Asn b) {
  Asn lo = std::min(a, b), hi = std::max(a, b);
  return (uint64_t(lo) << 32) | hi;
}

struct Field {
  std::string_view text;
};

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

bool parse_u32(std::string_view s, uint32_t& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_i64(std::string_view s, int64_t& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string_view strip(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

NodeId ASGraph::id_of(Asn a) const {
  auto it = index_.find(a);
  if (it == index_.end())
    throw ValidationError("unknown ASN " + std::to_string(a));
  return it->second;
}

std::vector<NodeId> ASGraph::weighted_nodes() const {
  std::vector<NodeId> out;
  for (NodeId i = 0; i < NodeId(size()); ++i)
    if (weights_[i] > 0) out.push_back(i);
  return out;
}

ASGraph ASGraph::from_edges(const std::vector<Edge>& edges,
                            const std::vector<Asn>& isolated) {
  ASGraph g;
  g.asns_ = isolated;
  for (const Edge& e : edges) {
    g.asns_.push_back(e.a);
    g.asns_.push_back(e.b);
  }
  std::sort(g.asns_.begin(), g.asns_.end());
  g.asns_.erase(std::unique(g.asns_.begin(), g.asns_.end()), g.asns_.end());
  g.index_.reserve(g.asns_.size());
  for (NodeId i = 0; i < NodeId(g.asns_.size()); ++i) g.index_[g.asns_[i]] = i;

  size_t n = g.asns_.size();
  g.providers_.resize(n);
  g.customers_.resize(n);
  g.peers_.resize(n);
  g.weights_.assign(n, 0);

  g.edges_ = edges;
  for (Edge& e : g.edges_)
    if (e.rel == Rel::PeerPeer && e.a > e.b) std::swap(e.a, e.b);
  std::sort(g.edges_.begin(), g.edges_.end(), [](const Edge& x, const Edge& y) {
    return std::tie(x.a, x.b, x.rel) < std::tie(y.a, y.b, y.rel);
  });

  for (const Edge& e : g.edges_) {
    NodeId ia = g.index_[e.a], ib = g.index_[e.b];
    if (e.rel == Rel::ProviderCustomer) {
      g.customers_[ia].push_back(ib);
      g.providers_[ib].push_back(ia);
    } else {
      g.peers_[ia].push_back(ib);
      g.peers_[ib].push_back(ia);
    }
  }
  for (auto& v : g.providers_) std::sort(v.begin(), v.end());
  for (auto& v : g.customers_) std::sort(v.begin(), v.end());
  for (auto& v : g.peers_) std::sort(v.begin(), v.end());
  return g;
}

void ASGraph::set_weight(Asn a, uint64_t w) {
  NodeId id = id_of(a);
  total_weight_ -= weights_[id];
  weights_[id] = w;
  total_weight_ += w;
}

ASGraph parse_relationships(std::string_view text) {
  std::vector<Edge> edges;
  // pair -> line number of first occurrence, for error reporting
  std::map<uint64_t, std::pair<int, Edge>> seen;

  int lineno = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    std::string_view line = (nl == std::string_view::npos)
                                ? text.substr(pos)
                                : text.substr(pos, nl - pos);
    pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
    ++lineno;
    line = strip(line);
    if (line.empty() || line[0] == '#') continue;

    auto fields = split(line, '|');
    if (fields.size() != 3 && fields.size() != 4)
      throw ParseError("line " + std::to_string(lineno) +
                       ": expected <asn>|<asn>|<rel>, got '" + std::string(line) + "'");
    uint32_t a, b;
    int64_t rel;
    if (!parse_u32(strip(fields[0]), a) || !parse_u32(strip(fields[1]), b))
      throw ParseError("line " + std::to_string(lineno) + ": bad ASN");
    if (!parse_i64(strip(fields[2]), rel))
      throw ParseError("line " + std::to_string(lineno) + ": bad relationship code");
    if (rel != -1 && rel != 0)
      throw ValidationError("line " + std::to_string(lineno) + ": relationship code " +
                            std::to_string(rel) + " not supported (expected -1 or 0)");
    if (a == b)
      throw ValidationError("line " + std::to_string(lineno) + ": self-loop on AS " +
                            std::to_string(a));

    Edge e{a, b, rel == -1 ? Rel::ProviderCustomer : Rel::PeerPeer};
    uint64_t key = pair_key(a, b);
    auto it = seen.find(key);
    if (it != seen.end()) {
      const Edge& prev = it->second.second;
      bool identical = prev.rel == e.rel &&
                       (e.rel == Rel::PeerPeer || (prev.a == e.a && prev.b == e.b));
      throw ValidationError("line " + std::to_string(lineno) + ": " +
                            (identical ? "duplicate" : "conflicting") + " edge " +
                            std::to_string(a) + "|" + std::to_string(b) +
                            " (first seen at line " + std::to_string(it->second.first) + ")");
    }
    seen.emplace(key, std::make_pair(lineno, e));
    edges.push_back(e);
  }
  return ASGraph::from_edges(edges);
}

std::string serialize_relationships(const ASGraph& g) {
  std::ostringstream out;
  for (const Edge& e : g.edges()) {
    out << e.a << '|' << e.b << '|' << (e.rel == Rel::ProviderCustomer ? -1 : 0) << '\n';
  }
  return out.str();
}

void load_client_weights(ASGraph& g, std::string_view csv) {
  int lineno = 0;
  size_t pos = 0;
  std::vector<Asn> unknown;
  std::vector<std::pair<Asn, uint64_t>> rows;
  std::unordered_map<Asn, int> first_line;
  while (pos <= csv.size()) {
    size_t nl = csv.find('\n', pos);
    std::string_view line =
        (nl == std::string_view::npos) ? csv.substr(pos) : csv.substr(pos, nl - pos);
    pos = (nl == std::string_view::npos) ? csv.size() + 1 : nl + 1;
    ++lineno;
    line = strip(line);
    if (line.empty() || line[0] == '#') continue;
    if (line == "asn,count") continue;  // optional header

    auto fields = split(line, ',');
    if (fields.size() != 2)
      throw ParseError("weights line " + std::to_string(lineno) + ": expected 'asn,count'");
    uint32_t asn;
    if (!parse_u32(strip(fields[0]), asn))
      throw ParseError("weights line " + std::to_string(lineno) + ": bad ASN");
    int64_t count;
    if (!parse_i64(strip(fields[1]), count))
      throw ParseError("weights line " + std::to_string(lineno) + ": bad count");
    if (count < 0)
      throw ParseError("weights line " + std::to_string(lineno) + ": negative count " +
                       std::to_string(count));
    auto it = first_line.find(asn);
    if (it != first_line.end())
      throw ValidationError("weights line " + std::to_string(lineno) + ": AS " +
                            std::to_string(asn) + " already specified at line " +
                            std::to_string(it->second));
    first_line[asn] = lineno;
    if (!g.has_as(asn)) {
      unknown.push_back(asn);
      continue;
    }
    rows.emplace_back(asn, uint64_t(count));
  }
  if (!unknown.empty()) {
    std::ostringstream msg;
    msg << "weights reference " << unknown.size() << " ASN(s) not in the topology:";
    for (Asn a : unknown) msg << ' ' << a;
    throw ValidationError(msg.str());
  }
  for (auto& [asn, w] : rows) g.set_weight(asn, w);
}

size_t PeerGraph::edge_count() const {
  size_t twice = 0;
  for (const auto& v : adj) twice += v.size();
  return twice / 2;
}

PeerGraph candidate_relays(const ASGraph& g) {
  PeerGraph pg;
  std::vector<int> local(g.size(), -1);
  for (NodeId i = 0; i < NodeId(g.size()); ++i) {
    if (g.customers(i).empty()) {
      local[i] = int(pg.nodes.size());
      pg.nodes.push_back(g.asn_of(i));
    }
  }
  pg.adj.resize(pg.nodes.size());
  for (size_t i = 0; i < pg.nodes.size(); ++i) pg.index[pg.nodes[i]] = int(i);
  for (NodeId i = 0; i < NodeId(g.size()); ++i) {
    if (local[i] < 0) continue;
    for (NodeId p : g.peers(i)) {
      if (local[p] >= 0 && p > i) {
        pg.adj[local[i]].push_back(local[p]);
        pg.adj[local[p]].push_back(local[i]);
      }
    }
  }
  for (auto& v : pg.adj) std::sort(v.begin(), v.end());
  return pg;
}

}  // namespace relaynet
