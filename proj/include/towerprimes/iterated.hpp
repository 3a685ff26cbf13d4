#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "towerprimes/prime_table.hpp"

namespace towerprimes {

/// One cell of the iterated-prime matrix: value(n, 0) = n and
/// value(n, k+1) = nth_prime(value(n, k)).
struct IteratedPrimeCell {
  u64 n = 0;
  u64 k = 0;
  u64 value = 0;
};

enum class SetKind { Nested, Tower, Diagonal };

/// Selects one of the derived member families:
///   Nested(k)  — k-fold prime indexing applied to all of N (Nested(1) = primes)
///   Tower(n)   — the increasing column obtained by iterating from a fixed n
///   Diagonal   — cell (k, k) for k = 1, 2, ...
struct SetFamilySelector {
  SetKind kind = SetKind::Nested;
  u64 param = 1;

  static SetFamilySelector nested(u64 k) { return {SetKind::Nested, k}; }
  static SetFamilySelector tower(u64 n) {
    if (n == 0) throw std::invalid_argument("tower selector requires n >= 1");
    return {SetKind::Tower, n};
  }
  static SetFamilySelector diagonal() { return {SetKind::Diagonal, 0}; }

  std::string describe() const {
    switch (kind) {
      case SetKind::Nested: return "nested(" + std::to_string(param) + ")";
      case SetKind::Tower: return "tower(" + std::to_string(param) + ")";
      case SetKind::Diagonal: return "diagonal";
    }
    return "?";
  }
};

struct CountSample {
  u64 x = 0;
  u64 count = 0;
  SetFamilySelector selector;
  bool complete = true;  // false only when a diagonal walk was cut short
};

struct TailIntersection {
  bool contained = false;
  u64 k = 0;  // meaningful when contained: m == value(n, k)
};

struct CountingDifferenceReport {
  u64 j0 = 0;
  std::int64_t difference = 0;
  bool within_theorem = false;
  bool precondition_ok = false;
};

/// Memoized iterated prime indexing plus enumeration/counting for the derived
/// set families.  All lookups are funneled through one PrimeTable; the memo
/// tolerates concurrent insert-if-absent and can persist to the sieve cache
/// directory as append-only `n k value` lines.
class IteratedPrimes {
 public:
  explicit IteratedPrimes(PrimeTable& table, bool persist_memo = true)
      : table_(table) {
    if (persist_memo && table.cache_dir())
      memo_path_ = *table.cache_dir() / "iterated_memo.txt";
    load_memo();
  }

  PrimeTable& table() { return table_; }
  const PrimeTable& table() const { return table_; }

  /// p_n^(k).  Throws ceiling_error carrying the first depth at which the
  /// ceiling was exceeded.
  u64 value(u64 n, u64 k) {
    if (n == 0) throw std::invalid_argument("row index must be >= 1");
    if (k == 0) return n;
    u64 cur = n;
    u64 depth = 0;
    {
      std::lock_guard lock(memo_mutex_);
      for (u64 j = k; j >= 1; --j) {
        auto it = memo_.find(Key{n, j});
        if (it != memo_.end()) {
          cur = it->second;
          depth = j;
          break;
        }
      }
    }
    while (depth < k) {
      u64 next;
      try {
        next = table_.nth_prime(cur);
      } catch (const ceiling_error& e) {
        throw e.with_depth(depth + 1);
      }
      ++depth;
      remember(n, depth, next);
      cur = next;
    }
    return cur;
  }

  IteratedPrimeCell cell(u64 n, u64 k) { return {n, k, value(n, k)}; }

  /// Largest depth reachable from row n under the ceiling.
  u64 reachable_depth(u64 n) {
    u64 k = 0;
    for (;;) {
      try {
        value(n, k + 1);
      } catch (const ceiling_error&) {
        return k;
      }
      ++k;
    }
  }

  /// The indexing identity: iterating then indexing equals indexing then
  /// iterating.  Must hold for every (n, k) that stays under the ceiling.
  bool commutation_check(u64 n, u64 k) {
    const u64 via_iterate = table_.nth_prime(value(n, k));
    const u64 via_index = value(table_.nth_prime(n), k);
    return via_iterate == via_index;
  }

  /// Largest k such that m belongs to the k-fold nested family, computed by
  /// the descending prime-count chain: replace m by pi(m) while m is prime.
  /// Always finite, since the chain strictly decreases.
  u64 tower_level(u64 m) {
    if (m == 0) throw std::invalid_argument("tower_level requires m >= 1");
    if (m > table_.value_ceiling()) throw ceiling_error(m, table_.value_ceiling());
    u64 level = 0;
    u64 cur = m;
    while (cur >= 2 && table_.is_prime(cur)) {
      cur = table_.prime_pi(cur);
      ++level;
    }
    return level;
  }

  /// Streams members of the family that are <= x, in increasing order.
  /// Nested(k) is produced by k rounds of index filtering; Tower and Diagonal
  /// enumerate by iterating.  Returns true when the emitted list is provably
  /// complete; a diagonal walk cut short by the ceiling returns false instead
  /// of throwing, since the diagonal outgrows every ceiling within a few cells.
  bool for_each_member(const SetFamilySelector& sel, u64 x,
                       const std::function<void(u64)>& fn) {
    if (x > table_.value_ceiling()) throw ceiling_error(x, table_.value_ceiling());
    switch (sel.kind) {
      case SetKind::Nested:
        if (sel.param == 0) {
          if (x > kNestedZeroEnumerationCap)
            throw std::invalid_argument(
                "nested(0) enumeration capped at 10^7 elements");
          for (u64 v = 1; v <= x; ++v) fn(v);
          return true;
        }
        if (sel.param == 1) {
          table_.for_each_prime(2, x, fn);
          return true;
        }
        {
          const std::vector<u64> idx =
              members_upto(SetFamilySelector::nested(sel.param - 1), table_.prime_pi(x));
          u64 counter = 0;
          std::size_t ptr = 0;
          table_.for_each_prime(2, x, [&](u64 p) {
            ++counter;
            if (ptr < idx.size() && idx[ptr] == counter) {
              ++ptr;
              fn(p);
            }
          });
        }
        return true;
      case SetKind::Tower:
        walk_column(sel.param, x, fn);
        return true;
      case SetKind::Diagonal:
        return walk_diagonal(x, fn);
    }
    return true;
  }

  std::vector<u64> members_upto(const SetFamilySelector& sel, u64 x) {
    std::vector<u64> out;
    for_each_member(sel, x, [&](u64 v) { out.push_back(v); });
    return out;
  }

  /// Exact member count at x.  For Nested(k) this is the k-fold prime count
  /// of x, which the enumeration-length consistency tests cross-check.
  CountSample count_upto(const SetFamilySelector& sel, u64 x) {
    if (x > table_.value_ceiling()) throw ceiling_error(x, table_.value_ceiling());
    CountSample sample{x, 0, sel, true};
    switch (sel.kind) {
      case SetKind::Nested: {
        u64 cur = x;
        for (u64 i = 0; i < sel.param && cur > 0; ++i) cur = table_.prime_pi(cur);
        sample.count = cur;
        break;
      }
      case SetKind::Tower:
        walk_column(sel.param, x, [&](u64) { ++sample.count; });
        break;
      case SetKind::Diagonal:
        sample.complete = walk_diagonal(x, [&](u64) { ++sample.count; });
        break;
    }
    return sample;
  }

  /// Decides whether the columns started at n and m (n < m) share a tail:
  /// they do exactly when m is reached from n, at the depth reported.
  TailIntersection tail_intersection(u64 n, u64 m) {
    if (n == 0 || m == 0) throw std::invalid_argument("indices must be >= 1");
    if (n >= m) throw std::invalid_argument("tail_intersection requires n < m");
    u64 prev = n;
    for (u64 k = 1;; ++k) {
      u64 v;
      try {
        v = value(n, k);
      } catch (const ceiling_error&) {
        if (certainly_above(prev, m)) return {false, 0};
        throw;
      }
      if (v == m) return {true, k};
      if (v > m) return {false, 0};
      prev = v;
    }
  }

  /// Counting difference between columns n and m (n < m) at x, together with
  /// the shift j0 defined by value(n, j0) <= m < value(n, j0 + 1).
  CountingDifferenceReport counting_difference(u64 n, u64 m, u64 x) {
    if (n == 0 || m == 0) throw std::invalid_argument("indices must be >= 1");
    if (n >= m) throw std::invalid_argument("counting_difference requires n < m");
    u64 j0 = 0;
    while (value(n, j0 + 1) <= m) ++j0;
    const u64 threshold = value(n, j0 + 1);

    CountingDifferenceReport report;
    report.j0 = j0;
    report.precondition_ok = x >= threshold;
    const u64 count_n = count_upto(SetFamilySelector::tower(n), x).count;
    const u64 count_m = count_upto(SetFamilySelector::tower(m), x).count;
    report.difference = static_cast<std::int64_t>(count_n) - static_cast<std::int64_t>(count_m);
    report.within_theorem =
        report.precondition_ok &&
        (report.difference == static_cast<std::int64_t>(j0) ||
         report.difference == static_cast<std::int64_t>(j0) + 1);
    return report;
  }

  static constexpr u64 kNestedZeroEnumerationCap = 10'000'000;

 private:
  struct Key {
    u64 n, k;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& key) const {
      u64 h = key.n * 0x9e3779b97f4a7c15ULL;
      h ^= key.k + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      return static_cast<std::size_t>(h);
    }
  };

  void remember(u64 n, u64 k, u64 v) {
    std::lock_guard lock(memo_mutex_);
    auto [it, inserted] = memo_.emplace(Key{n, k}, v);
    if (inserted && memo_file_.is_open()) {
      memo_file_ << n << ' ' << k << ' ' << v << '\n';
      memo_file_.flush();
    }
  }

  void load_memo() {
    if (memo_path_.empty()) return;
    {
      std::ifstream in(memo_path_);
      u64 n, k, v;
      while (in >> n >> k >> v)
        if (n >= 1 && k >= 1) memo_.emplace(Key{n, k}, v);
    }
    memo_file_.open(memo_path_, std::ios::app);
  }

  // True when the successor of `last` in any column provably exceeds `m`
  // even though it is not computable under the ceiling (the successor of v
  // is at least v log v).
  static bool certainly_above(u64 last, u64 m) {
    if (last < 2) return false;
    const double lower = static_cast<double>(last) * std::log(static_cast<double>(last));
    return lower * (1.0 - 0x1p-40) > static_cast<double>(m);
  }

  template <typename Fn>
  void walk_column(u64 n, u64 x, Fn&& fn) {
    u64 prev = n;
    for (u64 k = 1;; ++k) {
      u64 v;
      try {
        v = value(n, k);
      } catch (const ceiling_error&) {
        if (certainly_above(prev, x)) return;
        throw;
      }
      if (v > x) return;
      fn(v);
      prev = v;
    }
  }

  // Returns true when the walk provably covered [1, x].
  template <typename Fn>
  bool walk_diagonal(u64 x, Fn&& fn) {
    u64 prev = 1;
    for (u64 k = 1;; ++k) {
      u64 v;
      try {
        v = value(k, k);
      } catch (const ceiling_error&) {
        return certainly_above(prev, x);
      }
      if (v > x) return true;
      fn(v);
      prev = v;
    }
  }

  PrimeTable& table_;
  std::mutex memo_mutex_;
  std::unordered_map<Key, u64, KeyHash> memo_;
  std::filesystem::path memo_path_;
  std::ofstream memo_file_;
};

}  // namespace towerprimes
