#include "relaynet/bloom.hpp"

#include <cmath>
#include <stdexcept>

namespace relaynet {

thread_local uint64_t* BloomFilter::probe_counter_ = nullptr;

uint64_t hash64(std::span<const uint8_t> key, uint64_t seed) {
  // splitmix64 over 8-byte chunks; small keys, speed is not the point.
  uint64_t h = seed ^ (0x9E3779B97F4A7C15ULL * (key.size() + 1));
  size_t i = 0;
  while (i < key.size()) {
    uint64_t chunk = 0;
    for (size_t j = 0; j < 8 && i < key.size(); ++j, ++i)
      chunk |= uint64_t(key[i]) << (8 * j);
    h ^= chunk;
    h += 0x9E3779B97F4A7C15ULL;
    h = (h ^ (h >> 30)) * 0xBF58476D1CE4E5B9ULL;
    h = (h ^ (h >> 27)) * 0x94D049BB133111EBULL;
    h ^= h >> 31;
  }
  return h;
}

BloomParams BloomParams::for_capacity(uint64_t n, double p) {
  if (n < 1 || p <= 0.0 || p >= 1.0)
    throw std::invalid_argument("bloom params: need n >= 1 and 0 < p < 1");
  static const double ln2 = std::log(2.0);
  double m = std::ceil(-double(n) * std::log(p) / (ln2 * ln2));
  BloomParams out;
  out.m_bits = uint64_t(m);
  out.hash_count = int(std::lround(m / double(n) * ln2));
  if (out.hash_count < 1) out.hash_count = 1;
  return out;
}

BloomFilter::BloomFilter(BloomParams params, uint64_t salt)
    : params_(params), salt_(salt), bits_((params.m_bits + 63) / 64, 0) {}

BloomFilter BloomFilter::for_capacity(uint64_t n, double p, uint64_t salt) {
  return BloomFilter(BloomParams::for_capacity(n, p), salt);
}

namespace {

// Independent bit position per probe index. Plain double hashing modulo a
// composite m lets probe sequences collapse into subgroups and measurably
// inflates the false-positive rate at small m.
inline uint64_t probe_bit(std::span<const uint8_t> key, uint64_t salt, int i, uint64_t m) {
  return hash64(key, salt + 0x9E3779B97F4A7C15ULL * uint64_t(i + 1)) % m;
}

}  // namespace

void BloomFilter::insert(std::span<const uint8_t> key) {
  for (int i = 0; i < params_.hash_count; ++i) {
    uint64_t bit = probe_bit(key, salt_, i, params_.m_bits);
    bits_[bit >> 6] |= 1ULL << (bit & 63);
    if (probe_counter_) ++*probe_counter_;
  }
  ++inserted_;
}

bool BloomFilter::maybe_contains(std::span<const uint8_t> key) const {
  for (int i = 0; i < params_.hash_count; ++i) {
    uint64_t bit = probe_bit(key, salt_, i, params_.m_bits);
    if (probe_counter_) ++*probe_counter_;
    if (!(bits_[bit >> 6] & (1ULL << (bit & 63)))) return false;
  }
  return true;
}

void BloomFilter::clear() {
  std::fill(bits_.begin(), bits_.end(), 0);
  inserted_ = 0;
}

CountMinSketch::CountMinSketch(int rows, int cols, uint64_t salt)
    : rows_(rows), cols_(cols), salt_(salt), counters_(size_t(rows) * cols, 0) {}

uint32_t CountMinSketch::add(std::span<const uint8_t> key) {
  uint32_t est = UINT32_MAX;
  for (int r = 0; r < rows_; ++r) {
    size_t col = hash64(key, salt_ + r) % cols_;
    uint16_t& c = counters_[size_t(r) * cols_ + col];
    if (c != UINT16_MAX) ++c;
    est = std::min<uint32_t>(est, c);
  }
  return est;
}

uint32_t CountMinSketch::estimate(std::span<const uint8_t> key) const {
  uint32_t est = UINT32_MAX;
  for (int r = 0; r < rows_; ++r) {
    size_t col = hash64(key, salt_ + r) % cols_;
    est = std::min<uint32_t>(est, counters_[size_t(r) * cols_ + col]);
  }
  return est;
}

void CountMinSketch::reset() { std::fill(counters_.begin(), counters_.end(), 0); }

}  // namespace relaynet
