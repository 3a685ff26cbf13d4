#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "towerprimes/iterated.hpp"

namespace towerprimes {

/// Partial sum of sum_{a in family, a <= cutoff} a^(-alpha), with a rigorous
/// tail bracket where one is available (tower and diagonal families).  When
/// tail_upper is set, the full sum lies in [partial_sum, partial_sum + tail].
struct SeriesAccount {
  SetFamilySelector family;
  double alpha = 1.0;
  u64 cutoff_x = 0;
  double partial_sum = 0;
  std::optional<double> tail_upper;
  u64 terms_used = 0;
};

/// Tail of a tower series past the anchor value(n, k): with t = log value(n, k)
/// and T = t^alpha, the remaining terms sum to at most value^-alpha * T/(T-1).
/// Needs k >= 2 and t^alpha > 1 (anchor at least 3).
inline double tower_tail_bound(IteratedPrimes& it, u64 n, double alpha, u64 k) {
  if (alpha <= 0) throw std::invalid_argument("alpha must be positive");
  if (k < 2) throw std::invalid_argument("tail bracket needs k >= 2");
  const u64 anchor = it.value(n, k);
  const double t = std::log(static_cast<double>(anchor));
  const double amp = std::pow(t, alpha);
  if (amp <= 1.0) throw std::domain_error("tail bracket needs log(anchor)^alpha > 1");
  return std::pow(static_cast<double>(anchor), -alpha) * amp / (amp - 1.0);
}

/// Same bracket along the diagonal, anchored at value(k, k).
inline double diagonal_tail_bound(IteratedPrimes& it, double alpha, u64 k) {
  if (alpha <= 0) throw std::invalid_argument("alpha must be positive");
  if (k < 2) throw std::invalid_argument("tail bracket needs k >= 2");
  const u64 anchor = it.value(k, k);
  const double t = std::log(static_cast<double>(anchor));
  const double amp = std::pow(t, alpha);
  if (amp <= 1.0) throw std::domain_error("tail bracket needs log(anchor)^alpha > 1");
  return std::pow(static_cast<double>(anchor), -alpha) * amp / (amp - 1.0);
}

/// Ascending compensated summation of member^-alpha over the family, plus the
/// tail bracket for tower/diagonal when the next member is still computable.
inline SeriesAccount partial_sum(IteratedPrimes& it, const SetFamilySelector& family,
                                 double alpha, u64 cutoff_x) {
  if (alpha <= 0) throw std::invalid_argument("alpha must be positive");
  SeriesAccount account;
  account.family = family;
  account.alpha = alpha;
  account.cutoff_x = cutoff_x;

  double sum = 0, carry = 0;  // Kahan
  it.for_each_member(family, cutoff_x, [&](u64 member) {
    const double term = std::pow(static_cast<double>(member), -alpha);
    const double y = term - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
    ++account.terms_used;
  });
  account.partial_sum = sum;

  if (family.kind == SetKind::Tower || family.kind == SetKind::Diagonal) {
    const u64 k_next = account.terms_used + 1;  // first member past the cutoff
    if (k_next >= 2) {
      try {
        account.tail_upper = family.kind == SetKind::Tower
                                 ? tower_tail_bound(it, family.param, alpha, k_next)
                                 : diagonal_tail_bound(it, alpha, k_next);
      } catch (const ceiling_error&) {
        // next member not computable; bracket stays unknown
      } catch (const std::domain_error&) {
      }
    }
  }
  return account;
}

/// Partial sums of one nested family at a schedule of cutoffs.  The data feeds
/// two checks done by callers: partial sums are nondecreasing in the cutoff,
/// and deeper families are strictly below shallower ones at equal cutoffs.
inline std::vector<SeriesAccount> nested_convergence_probe(IteratedPrimes& it, u64 k,
                                                           double alpha,
                                                           std::span<const u64> cutoffs) {
  std::vector<SeriesAccount> out;
  out.reserve(cutoffs.size());
  for (u64 cutoff : cutoffs)
    out.push_back(partial_sum(it, SetFamilySelector::nested(k), alpha, cutoff));
  return out;
}

/// Desk-scale estimate of the convergence exponent limsup log n / log a_n.
/// The early indices are transient, so the estimate takes the maximum over
/// the tail half of the samples; the samples themselves are kept for
/// inspection.
struct ExponentEstimate {
  SetFamilySelector family;
  double estimate = 0;
  u64 sample_n_max = 0;
  std::vector<std::pair<u64, double>> samples;  // (index, log index / log member)
};

inline ExponentEstimate exponent_estimate(IteratedPrimes& it,
                                          const SetFamilySelector& family, u64 n_max) {
  if (n_max < 2) throw std::invalid_argument("n_max must be >= 2");
  ExponentEstimate est;
  est.family = family;
  est.sample_n_max = n_max;

  auto push = [&](u64 index, u64 member) {
    if (index < 2 || member < 2) return;
    est.samples.emplace_back(index, std::log(static_cast<double>(index)) /
                                        std::log(static_cast<double>(member)));
  };

  switch (family.kind) {
    case SetKind::Nested: {
      // geometric samples, ratio 10, n_max always included
      std::vector<u64> ns;
      for (u64 n = 10; n < n_max; n *= 10) ns.push_back(n);
      ns.push_back(n_max);
      for (u64 n : ns) push(n, it.value(n, family.param));
      break;
    }
    case SetKind::Tower:
      for (u64 j = 1; j <= n_max; ++j) push(j, it.value(family.param, j));
      break;
    case SetKind::Diagonal:
      for (u64 j = 1; j <= n_max; ++j) push(j, it.value(j, j));
      break;
  }
  if (est.samples.empty()) throw std::invalid_argument("no usable samples");
  const std::size_t from = est.samples.size() / 2;
  double best = 0;
  for (std::size_t i = from; i < est.samples.size(); ++i)
    best = std::max(best, est.samples[i].second);
  est.estimate = best;
  return est;
}

}  // namespace towerprimes
