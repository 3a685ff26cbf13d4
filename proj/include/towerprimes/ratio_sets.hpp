#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "towerprimes/bounds.hpp"
#include "towerprimes/iterated.hpp"

namespace towerprimes {

/// Best quotient a/b found near a target, with the achieved error.  When no
/// pair within epsilon exists below the search bound the best effort is
/// returned with `sufficient` cleared, never an error: finite truncations
/// have a bounded ratio range even when the full quotient set is dense.
struct RatioWitness {
  double target = 0;
  u64 a = 0;
  u64 b = 0;
  double achieved_error = 0;
  u64 search_bound = 0;
  bool sufficient = false;
};

/// For each member a, binary-search the member list for the b nearest a/target
/// and keep the overall best pair.  Ties break toward smaller b, then the scan
/// order (increasing a) makes the result deterministic.  Below any bound this
/// per-numerator search returns the same minimal error as the all-pairs scan.
inline RatioWitness find_ratio_witness(IteratedPrimes& it, u64 nested_k, double target,
                                       double epsilon, u64 search_bound,
                                       unsigned threads = 1) {
  if (target <= 0) throw std::invalid_argument("target must be positive");
  if (epsilon <= 0) throw std::invalid_argument("epsilon must be positive");
  const std::vector<u64> members =
      it.members_upto(SetFamilySelector::nested(nested_k), search_bound);
  if (members.empty()) throw std::invalid_argument("no members below the search bound");

  struct Best {
    double error = std::numeric_limits<double>::infinity();
    u64 a = 0, b = 0;
    void offer(double err, u64 a_, u64 b_) {
      if (err < error || (err == error && (a_ < a || (a_ == a && b_ < b)))) {
        error = err;
        a = a_;
        b = b_;
      }
    }
  };

  auto scan = [&](std::size_t lo, std::size_t hi) {
    Best best;
    for (std::size_t i = lo; i < hi; ++i) {
      const u64 a = members[i];
      const double want = static_cast<double>(a) / target;
      auto pos = std::lower_bound(members.begin(), members.end(),
                                  static_cast<u64>(std::floor(want)));
      auto consider = [&](std::vector<u64>::const_iterator cand) {
        if (cand == members.end()) return;
        const u64 b = *cand;
        const double err =
            std::abs(static_cast<double>(a) / static_cast<double>(b) - target);
        best.offer(err, a, b);
      };
      if (pos != members.begin()) consider(std::prev(pos));
      consider(pos);
      if (pos != members.end()) consider(std::next(pos));
    }
    return best;
  };

  Best best;
  if (threads <= 1 || members.size() < 4096) {
    best = scan(0, members.size());
  } else {
    std::vector<Best> locals(threads);
    std::vector<std::thread> workers;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t lo = members.size() * t / threads;
      const std::size_t hi = members.size() * (t + 1) / threads;
      workers.emplace_back([&, t, lo, hi] { locals[t] = scan(lo, hi); });
    }
    for (auto& w : workers) w.join();
    for (const auto& local : locals)
      if (local.b != 0) best.offer(local.error, local.a, local.b);
  }

  RatioWitness witness;
  witness.target = target;
  witness.a = best.a;
  witness.b = best.b;
  witness.achieved_error = best.error;
  witness.search_bound = search_bound;
  witness.sufficient = best.error <= epsilon;
  return witness;
}

/// Finite-range isolation evidence for a tower or the diagonal: the exact
/// per-step fact successor >= member * log(member) (so the consecutive ratio
/// is at least log member), plus the observed ratio floor.
struct IsolationCertificate {
  SetFamilySelector family;
  struct Step {
    u64 j = 0;
    u64 value = 0;
    u64 next = 0;
    double ratio = 0;
    double log_value = 0;
    bool holds = false;  // next >= value * log(value), exact up to the guard
  };
  std::vector<Step> steps;
  double consecutive_ratio_floor = 0;
  double floor_from_second_step = 0;
  bool all_hold = false;
  bool ratios_increasing = false;
  bool truncated = false;  // ceiling stopped the walk before j_max
};

inline IsolationCertificate isolation_certificate(IteratedPrimes& it,
                                                  const SetFamilySelector& family,
                                                  u64 j_max) {
  if (family.kind == SetKind::Nested)
    throw std::invalid_argument("isolation applies to tower/diagonal families");
  if (j_max == 0) throw std::invalid_argument("j_max must be >= 1");

  auto member = [&](u64 j) {
    return family.kind == SetKind::Tower ? it.value(family.param, j) : it.value(j, j);
  };

  IsolationCertificate cert;
  cert.family = family;
  cert.all_hold = true;
  for (u64 j = 1; j <= j_max; ++j) {
    IsolationCertificate::Step step;
    step.j = j;
    try {
      step.value = member(j);
      step.next = member(j + 1);
    } catch (const ceiling_error&) {
      cert.truncated = true;
      break;
    }
    step.ratio = static_cast<double>(step.next) / static_cast<double>(step.value);
    step.log_value = std::log(static_cast<double>(step.value));
    step.holds = static_cast<double>(step.next) >=
                 static_cast<double>(step.value) * step.log_value *
                     (1.0 - kComparisonGuard);
    cert.all_hold = cert.all_hold && step.holds;
    cert.steps.push_back(step);
  }
  if (!cert.steps.empty()) {
    cert.consecutive_ratio_floor = cert.steps.front().ratio;
    cert.ratios_increasing = true;
    for (std::size_t i = 0; i < cert.steps.size(); ++i) {
      cert.consecutive_ratio_floor =
          std::min(cert.consecutive_ratio_floor, cert.steps[i].ratio);
      if (i > 0 && cert.steps[i].ratio <= cert.steps[i - 1].ratio)
        cert.ratios_increasing = false;
    }
    cert.floor_from_second_step = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < cert.steps.size(); ++i)
      cert.floor_from_second_step =
          std::min(cert.floor_from_second_step, cert.steps[i].ratio);
  }
  return cert;
}

/// Raw consecutive-ratio data (j, member(j+1)/member(j)) for reader-side
/// isolation arguments; no judgment attached.
inline std::vector<std::pair<u64, double>> ratio_gap_scan(IteratedPrimes& it,
                                                          const SetFamilySelector& family,
                                                          u64 j_max) {
  if (family.kind == SetKind::Nested)
    throw std::invalid_argument("gap scan applies to tower/diagonal families");
  auto member = [&](u64 j) {
    return family.kind == SetKind::Tower ? it.value(family.param, j) : it.value(j, j);
  };
  std::vector<std::pair<u64, double>> out;
  for (u64 j = 1; j <= j_max; ++j) {
    try {
      const double a = static_cast<double>(member(j));
      const double b = static_cast<double>(member(j + 1));
      out.emplace_back(j, b / a);
    } catch (const ceiling_error&) {
      break;
    }
  }
  return out;
}

}  // namespace towerprimes
