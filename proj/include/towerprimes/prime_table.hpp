#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <unistd.h>

#include "towerprimes/errors.hpp"

namespace towerprimes {

using u64 = std::uint64_t;
using u32 = std::uint32_t;

/// Index into the increasing enumeration of primes, 1-based: prime_index 1 is 2.
using prime_index = std::uint64_t;

inline u64 isqrt_u64(u64 n) {
  if (n == 0) return 0;
  u64 r = static_cast<u64>(std::sqrt(static_cast<double>(n)));
  while (r > 0 && r > n / r) --r;
  while ((r + 1) <= n / (r + 1)) ++r;
  return r;
}

struct PrimeTableOptions {
  u64 value_ceiling = 10'000'000'000ULL;
  u64 segment_size = 1u << 22;  // integers covered per segment
  std::optional<std::filesystem::path> cache_dir;
  std::size_t max_resident_segments = 64;

  /// Fills cache_dir from TOWER_PRIMES_CACHE when not set explicitly.
  PrimeTableOptions& resolve_cache_from_env() {
    if (!cache_dir) {
      if (const char* env = std::getenv("TOWER_PRIMES_CACHE"); env && *env)
        cache_dir = std::filesystem::path(env);
    }
    return *this;
  }
};

/// Exact primality, prime counting and nth-prime over [0, value_ceiling],
/// backed by a segmented odd-only sieve.  Queries whose answer (or whose
/// proof-backed sizing bound) would exceed the ceiling throw ceiling_error
/// instead of guessing.
///
/// All query methods are safe to call concurrently; segment materialization
/// is serialized internally.
class PrimeTable {
  // One sieved segment: bit j of `bits` is set iff start + 2j + 1 is prime.
  struct Segment {
    std::vector<u64> bits;
    std::vector<u32> block_cum;  // exclusive prefix counts per 64-word block
    u64 count = 0;
    mutable std::atomic<u64> last_used{0};

    Segment() = default;
    Segment(const Segment&) = delete;

    void finalize() {
      const std::size_t blocks = (bits.size() + kWordsPerBlock - 1) / kWordsPerBlock;
      block_cum.resize(blocks + 1);  // sentinel entry holds the total
      u64 running = 0;
      for (std::size_t b = 0; b < blocks; ++b) {
        block_cum[b] = static_cast<u32>(running);
        const std::size_t end = std::min(bits.size(), (b + 1) * kWordsPerBlock);
        for (std::size_t w = b * kWordsPerBlock; w < end; ++w)
          running += std::popcount(bits[w]);
      }
      block_cum[blocks] = static_cast<u32>(running);
      count = running;
    }

    // Number of set bits among the first `slots` bit positions.
    u64 count_below(u64 slots) const {
      const u64 full_words = slots / 64;
      const u64 block = full_words / kWordsPerBlock;
      u64 total = block_cum[block];
      for (u64 w = block * kWordsPerBlock; w < full_words; ++w)
        total += std::popcount(bits[w]);
      const unsigned rem = static_cast<unsigned>(slots % 64);
      if (rem != 0)
        total += std::popcount(bits[full_words] & ((u64{1} << rem) - 1));
      return total;
    }

    // Bit position of the rank-th set bit (rank is 1-based).
    u64 select(u64 rank) const {
      std::size_t block = 0;
      while (block + 1 < block_cum.size() && block_cum[block + 1] < rank) ++block;
      u64 seen = block_cum[block];
      for (std::size_t w = block * kWordsPerBlock; w < bits.size(); ++w) {
        const unsigned pc = static_cast<unsigned>(std::popcount(bits[w]));
        if (seen + pc < rank) {
          seen += pc;
          continue;
        }
        u64 word = bits[w];
        while (word) {
          const unsigned tz = static_cast<unsigned>(std::countr_zero(word));
          if (++seen == rank) return w * 64 + tz;
          word &= word - 1;
        }
      }
      throw std::logic_error("segment select: rank out of range");
    }

    static constexpr std::size_t kWordsPerBlock = 64;  // 4096 bits per block
  };

 public:
  explicit PrimeTable(PrimeTableOptions opt = {}) : opt_(std::move(opt)) {
    if (opt_.value_ceiling < 2)
      throw std::invalid_argument("value_ceiling must be at least 2");
    if (opt_.segment_size < (u64{1} << 16))
      throw std::invalid_argument("segment_size must be at least 2^16");
    // Round up to whole bit-count blocks (8192 integers = 4096 odd slots).
    const u64 granule = 8192;
    opt_.segment_size = (opt_.segment_size + granule - 1) / granule * granule;
    if (opt_.cache_dir) std::filesystem::create_directories(*opt_.cache_dir);
  }

  PrimeTable(const PrimeTable&) = delete;
  PrimeTable& operator=(const PrimeTable&) = delete;

  u64 value_ceiling() const { return opt_.value_ceiling; }
  u64 segment_size() const { return opt_.segment_size; }
  const std::optional<std::filesystem::path>& cache_dir() const { return opt_.cache_dir; }

  bool is_prime(u64 m) const {
    check_ceiling(m);
    if (m < 2) return false;
    if (m == 2) return true;
    if (m % 2 == 0) return false;
    ensure_through(m);
    auto seg = segment(m / opt_.segment_size);
    return (seg->bits[slot_of(m) / 64] >> (slot_of(m) % 64)) & 1;
  }

  /// Exact count of primes <= x.
  u64 prime_pi(u64 x) const {
    check_ceiling(x);
    if (x < 2) return 0;
    if (x == 2) return 1;
    ensure_through(x);
    const u64 g = x / opt_.segment_size;
    u64 total = 1;  // the prime 2
    {
      std::shared_lock lock(mutex_);
      if (g > 0) total += cum_counts_[g - 1];
    }
    auto seg = segment(g);
    const u64 lo = g * opt_.segment_size;
    total += seg->count_below((x - lo + 1) / 2);
    return total;
  }

  /// The n-th prime, 1-based (nth_prime(1) = 2).  Range-checked against the
  /// sizing bound nth_prime_upper_bound(n) before any sieving happens.
  u64 nth_prime(prime_index n) const {
    if (n == 0) throw std::invalid_argument("prime index must be >= 1");
    const u64 bound = nth_prime_upper_bound(n);
    if (bound > opt_.value_ceiling)
      throw ceiling_error(bound, opt_.value_ceiling);
    if (n <= 5) return kSmallPrimes[n];
    ensure_through(bound);
    const u64 target = n - 1;  // rank among odd primes
    u64 g;
    {
      std::shared_lock lock(mutex_);
      auto it = std::lower_bound(cum_counts_.begin(), cum_counts_.end(), target);
      if (it == cum_counts_.end())
        throw std::logic_error("nth_prime: sizing bound did not cover index");
      g = static_cast<u64>(it - cum_counts_.begin());
    }
    u64 before = 0;
    {
      std::shared_lock lock(mutex_);
      if (g > 0) before = cum_counts_[g - 1];
    }
    auto seg = segment(g);
    const u64 slot = seg->select(target - before);
    return g * opt_.segment_size + 2 * slot + 1;
  }

  /// All primes in [lo, hi], increasing.
  std::vector<u64> primes_in_range(u64 lo, u64 hi) const {
    std::vector<u64> out;
    for_each_prime(lo, hi, [&](u64 p) { out.push_back(p); });
    return out;
  }

  template <typename Fn>
  void for_each_prime(u64 lo, u64 hi, Fn&& fn) const {
    if (lo > hi) throw std::invalid_argument("primes_in_range: lo > hi");
    check_ceiling(hi);
    if (hi < 2) return;
    ensure_through(hi);
    if (lo <= 2) fn(u64{2});
    const u64 first = std::max<u64>(lo, 3);
    const u64 g_lo = first / opt_.segment_size;
    const u64 g_hi = hi / opt_.segment_size;
    for (u64 g = g_lo; g <= g_hi; ++g) {
      auto seg = segment(g);
      const u64 base = g * opt_.segment_size;
      for (std::size_t w = 0; w < seg->bits.size(); ++w) {
        u64 word = seg->bits[w];
        while (word) {
          const unsigned tz = static_cast<unsigned>(std::countr_zero(word));
          word &= word - 1;
          const u64 value = base + 2 * (w * 64 + tz) + 1;
          if (value < first) continue;
          if (value > hi) return;
          fn(value);
        }
      }
    }
  }

  /// Proof-backed sizing bound for the n-th prime: a small lookup below n = 6,
  /// n (log n + log log n) from there on.
  static u64 nth_prime_upper_bound(prime_index n) {
    if (n == 0) throw std::invalid_argument("prime index must be >= 1");
    if (n <= 5) return kSmallPrimes[n];
    const double nd = static_cast<double>(n);
    const double b = nd * (std::log(nd) + std::log(std::log(nd)));
    return static_cast<u64>(b * (1.0 + 1e-12)) + 1;
  }

 private:
  static constexpr u64 kSmallPrimes[6] = {0, 2, 3, 5, 7, 11};

  void check_ceiling(u64 v) const {
    if (v > opt_.value_ceiling) throw ceiling_error(v, opt_.value_ceiling);
  }

  u64 slot_of(u64 odd_value) const {
    return (odd_value - (odd_value / opt_.segment_size) * opt_.segment_size) >> 1;
  }

  // Extends the contiguous sieved prefix so that every segment containing a
  // value <= x is materialized and counted.
  void ensure_through(u64 x) const {
    const u64 need = x / opt_.segment_size;
    {
      std::shared_lock lock(mutex_);
      if (cum_counts_.size() > need) return;
    }
    std::unique_lock lock(mutex_);
    while (cum_counts_.size() <= need) {
      const u64 g = cum_counts_.size();
      auto seg = load_or_sieve(g);
      const u64 prev = g > 0 ? cum_counts_[g - 1] : 0;
      cum_counts_.push_back(prev + seg->count);
      insert_resident(g, std::move(seg));
    }
  }

  std::shared_ptr<const Segment> segment(u64 g) const {
    {
      std::shared_lock lock(mutex_);
      auto it = resident_.find(g);
      if (it != resident_.end()) {
        it->second->last_used.store(++clock_, std::memory_order_relaxed);
        return it->second;
      }
      if (g >= cum_counts_.size())
        throw std::logic_error("segment requested past sieved prefix");
    }
    std::unique_lock lock(mutex_);
    auto it = resident_.find(g);
    if (it != resident_.end()) return it->second;
    auto seg = load_or_sieve(g);
    auto shared = insert_resident(g, std::move(seg));
    return shared;
  }

  std::shared_ptr<const Segment> insert_resident(u64 g, std::shared_ptr<Segment> seg) const {
    seg->last_used.store(++clock_, std::memory_order_relaxed);
    auto [it, _] = resident_.insert_or_assign(g, std::move(seg));
    auto kept = it->second;
    while (resident_.size() > opt_.max_resident_segments) {
      auto victim = resident_.begin();
      for (auto cur = resident_.begin(); cur != resident_.end(); ++cur)
        if (cur->second->last_used.load(std::memory_order_relaxed) <
            victim->second->last_used.load(std::memory_order_relaxed))
          victim = cur;
      if (victim->first == g) break;  // never evict what we just produced
      resident_.erase(victim);
    }
    return kept;
  }

  // --- sieving -------------------------------------------------------------

  std::shared_ptr<Segment> load_or_sieve(u64 g) const {
    if (opt_.cache_dir) {
      if (auto seg = load_from_cache(g)) return seg;
    }
    auto seg = sieve_segment(g);
    if (opt_.cache_dir) write_to_cache(g, *seg);
    return seg;
  }

  std::shared_ptr<Segment> sieve_segment(u64 g) const {
    const u64 S = opt_.segment_size;
    const u64 lo = g * S;
    const u64 hi = lo + S;  // exclusive
    grow_base_primes(isqrt_u64(hi - 1));

    auto seg = std::make_shared<Segment>();
    seg->bits.assign(S / 128, ~u64{0});
    if (g == 0) seg->bits[0] &= ~u64{1};  // 1 is not prime

    for (u64 p : base_primes_) {
      const u64 p2 = p * p;
      if (p2 >= hi) break;
      u64 m = std::max(p2, ((lo + p - 1) / p) * p);
      if (m % 2 == 0) m += p;
      for (u64 v = m; v < hi; v += 2 * p) {
        const u64 slot = (v - lo) >> 1;
        seg->bits[slot / 64] &= ~(u64{1} << (slot % 64));
      }
    }
    seg->finalize();
    return seg;
  }

  // Simple sieve for the base primes (odd primes >= 3 up to `limit`).
  void grow_base_primes(u64 limit) const {
    if (limit <= base_limit_) return;
    u64 target = std::max<u64>(limit, 1024);
    target = std::max(target, base_limit_ * 2);
    std::vector<bool> composite(target + 1, false);
    base_primes_.clear();
    for (u64 i = 3; i <= target; i += 2) {
      if (composite[i]) continue;
      base_primes_.push_back(i);
      if (i <= target / i)
        for (u64 j = i * i; j <= target; j += 2 * i) composite[j] = true;
    }
    base_limit_ = target;
  }

  // --- on-disk segment cache ------------------------------------------------
  // Layout: <cache_dir>/seg_<start>_<len>.bits, an 8-byte little-endian byte
  // count followed by the raw odd-only bitmap.

  std::filesystem::path cache_file(u64 g) const {
    const u64 start = g * opt_.segment_size;
    return *opt_.cache_dir / ("seg_" + std::to_string(start) + "_" +
                              std::to_string(opt_.segment_size) + ".bits");
  }

  std::shared_ptr<Segment> load_from_cache(u64 g) const {
    std::ifstream in(cache_file(g), std::ios::binary);
    if (!in) return nullptr;
    unsigned char header[8];
    if (!in.read(reinterpret_cast<char*>(header), 8)) return nullptr;
    u64 bytes = 0;
    for (int i = 7; i >= 0; --i) bytes = (bytes << 8) | header[i];
    const u64 expected = opt_.segment_size / 16;
    if (bytes != expected) return nullptr;
    auto seg = std::make_shared<Segment>();
    seg->bits.assign(expected / 8, 0);
    if (!in.read(reinterpret_cast<char*>(seg->bits.data()),
                 static_cast<std::streamsize>(bytes)))
      return nullptr;
    seg->finalize();
    return seg;
  }

  void write_to_cache(u64 g, const Segment& seg) const {
    std::error_code ec;
    const auto path = cache_file(g);
    if (std::filesystem::exists(path, ec)) return;
    const auto tmp = path.string() + ".tmp" + std::to_string(::getpid());
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) return;
      const u64 bytes = seg.bits.size() * 8;
      unsigned char header[8];
      for (int i = 0; i < 8; ++i) header[i] = static_cast<unsigned char>((bytes >> (8 * i)) & 0xff);
      out.write(reinterpret_cast<const char*>(header), 8);
      out.write(reinterpret_cast<const char*>(seg.bits.data()),
                static_cast<std::streamsize>(bytes));
      if (!out) {
        std::filesystem::remove(tmp, ec);
        return;
      }
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) std::filesystem::remove(tmp, ec);
  }

  PrimeTableOptions opt_;

  mutable std::shared_mutex mutex_;
  mutable std::vector<u64> cum_counts_;  // odd primes per segment, cumulative
  mutable std::unordered_map<u64, std::shared_ptr<Segment>> resident_;
  mutable std::atomic<u64> clock_{0};

  mutable std::vector<u64> base_primes_;  // odd primes for marking, >= 3
  mutable u64 base_limit_ = 0;
};

}  // namespace towerprimes
