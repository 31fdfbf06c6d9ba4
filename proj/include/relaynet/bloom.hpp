#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace relaynet {

/// Sizing for a Bloom filter holding n items at false-positive rate p:
/// m = ceil(-n ln p / (ln 2)^2) bits, h = round((m/n) ln 2) hashes.
struct BloomParams {
  uint64_t m_bits = 0;
  int hash_count = 0;

  static BloomParams for_capacity(uint64_t n, double p);
  double bytes() const { return double(m_bits) / 8.0; }
};

/// Plain blocked-free Bloom filter with double hashing. Deterministic for
/// a given salt. Probes are counted into an optional external counter so
/// tests can assert per-packet work bounds.
class BloomFilter {
 public:
  BloomFilter() = default;
  BloomFilter(BloomParams params, uint64_t salt);
  static BloomFilter for_capacity(uint64_t n, double p, uint64_t salt);

  void insert(std::span<const uint8_t> key);
  bool maybe_contains(std::span<const uint8_t> key) const;
  void clear();

  const BloomParams& params() const { return params_; }
  uint64_t inserted() const { return inserted_; }
  double bytes() const { return params_.bytes(); }

  static void set_probe_counter(uint64_t* counter) { probe_counter_ = counter; }

 private:
  BloomParams params_;
  uint64_t salt_ = 0;
  std::vector<uint64_t> bits_;
  uint64_t inserted_ = 0;

  static thread_local uint64_t* probe_counter_;
};

/// Count-min sketch over fixed-width uint16 counters with saturation.
class CountMinSketch {
 public:
  CountMinSketch() = default;
  CountMinSketch(int rows, int cols, uint64_t salt);

  /// Adds one occurrence and returns the new min-estimate.
  uint32_t add(std::span<const uint8_t> key);
  uint32_t estimate(std::span<const uint8_t> key) const;
  void reset();
  size_t bytes() const { return counters_.size() * sizeof(uint16_t); }

 private:
  int rows_ = 0;
  int cols_ = 0;
  uint64_t salt_ = 0;
  std::vector<uint16_t> counters_;
};

uint64_t hash64(std::span<const uint8_t> key, uint64_t seed);

}  // namespace relaynet
