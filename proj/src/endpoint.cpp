#include "relaynet/endpoint.hpp"

#include <charconv>

#include "relaynet/errors.hpp"

namespace relaynet {

std::string Endpoint::str() const { return format_ipv4(ip) + ":" + std::to_string(port); }

uint32_t parse_ipv4(const std::string& s) {
  uint32_t out = 0;
  size_t pos = 0;
  for (int i = 0; i < 4; ++i) {
    size_t dot = (i < 3) ? s.find('.', pos) : s.size();
    if (dot == std::string::npos) throw ParseError("bad IPv4 address: " + s);
    unsigned v = 0;
    auto [p, ec] = std::from_chars(s.data() + pos, s.data() + dot, v);
    if (ec != std::errc() || p != s.data() + dot || v > 255)
      throw ParseError("bad IPv4 address: " + s);
    out = out << 8 | v;
    pos = dot + 1;
  }
  return out;
}

std::string format_ipv4(uint32_t ip) {
  return std::to_string(ip >> 24) + "." + std::to_string((ip >> 16) & 0xFF) + "." +
         std::to_string((ip >> 8) & 0xFF) + "." + std::to_string(ip & 0xFF);
}

}  // namespace relaynet
