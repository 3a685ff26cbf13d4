#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace towerprimes {

/// Thrown when a query (or a bound required to answer it) would exceed the
/// table's value ceiling.  Carries the offending value/bound and, for iterated
/// lookups, the first depth at which the ceiling was crossed.
class ceiling_error : public std::runtime_error {
 public:
  ceiling_error(std::uint64_t requested, std::uint64_t limit,
                std::optional<std::uint64_t> depth = std::nullopt)
      : std::runtime_error(make_message(requested, limit, depth)),
        requested_(requested),
        limit_(limit),
        depth_(depth) {}

  std::uint64_t requested() const { return requested_; }
  std::uint64_t limit() const { return limit_; }
  std::optional<std::uint64_t> depth() const { return depth_; }

  ceiling_error with_depth(std::uint64_t depth) const {
    return ceiling_error(requested_, limit_, depth);
  }

 private:
  static std::string make_message(std::uint64_t requested, std::uint64_t limit,
                                  std::optional<std::uint64_t> depth) {
    std::string msg = "value " + std::to_string(requested) +
                      " exceeds ceiling " + std::to_string(limit);
    if (depth) msg += " (first exceeded at depth " + std::to_string(*depth) + ")";
    return msg;
  }

  std::uint64_t requested_;
  std::uint64_t limit_;
  std::optional<std::uint64_t> depth_;
};

}  // namespace towerprimes
