#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>

namespace relaynet {

/// A UDP endpoint; the identity the relay tracks clients by.
struct Endpoint {
  uint32_t ip = 0;
  uint16_t port = 0;

  auto operator<=>(const Endpoint&) const = default;

  std::array<uint8_t, 6> key_bytes() const {
    return {uint8_t(ip >> 24), uint8_t(ip >> 16), uint8_t(ip >> 8), uint8_t(ip),
            uint8_t(port >> 8), uint8_t(port)};
  }
  std::string str() const;
};

/// Parses dotted-quad IPv4 text; throws on bad input.
uint32_t parse_ipv4(const std::string& s);
std::string format_ipv4(uint32_t ip);

}  // namespace relaynet
