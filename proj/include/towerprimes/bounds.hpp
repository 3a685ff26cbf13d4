#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "towerprimes/iterated.hpp"

namespace towerprimes {

/// Relative guard for integer-versus-real comparisons: double rounding must
/// never turn a true inequality into a reported violation.  Far below any
/// meaningful slack at these magnitudes.
inline constexpr double kComparisonGuard = 0x1p-40;

struct Violation {
  std::string site;
  double actual = 0;
  double bound = 0;
};

/// Outcome of sweeping one inequality over a range of cells.
struct BoundReport {
  std::string bound_id;
  std::string range_checked;
  bool passed = true;
  std::optional<Violation> first_violation;
  double min_slack = std::numeric_limits<double>::infinity();
  std::string min_slack_site;
  u64 cells_checked = 0;
  u64 inf_passes = 0;                // upper bounds that overflowed double range
  std::vector<std::string> skipped;  // cells excluded by a domain guard

  explicit BoundReport(std::string id = {}) : bound_id(std::move(id)) {}

  // actual >= bound
  void check_lower(const std::string& site, double actual, double bound) {
    ++cells_checked;
    if (bound <= 0) return;  // vacuous; slack undefined
    const bool ok = actual >= bound * (1.0 - kComparisonGuard);
    note(site, ok, actual, bound, actual / bound);
  }

  // actual <= bound
  void check_upper(const std::string& site, double actual, double bound) {
    ++cells_checked;
    if (std::isinf(bound)) {
      ++inf_passes;
      return;
    }
    const bool ok = actual <= bound * (1.0 + kComparisonGuard);
    note(site, ok, actual, bound, actual > 0 ? bound / actual
                                             : std::numeric_limits<double>::infinity());
  }

  void skip(const std::string& site, const std::string& why) {
    skipped.push_back(site + ": " + why);
  }

  // Deterministic reduction: first violation in merge order wins, slacks take
  // the minimum.
  void merge(const BoundReport& other) {
    passed = passed && other.passed;
    if (!first_violation && other.first_violation) first_violation = other.first_violation;
    if (other.min_slack < min_slack) {
      min_slack = other.min_slack;
      min_slack_site = other.min_slack_site;
    }
    cells_checked += other.cells_checked;
    inf_passes += other.inf_passes;
    skipped.insert(skipped.end(), other.skipped.begin(), other.skipped.end());
  }

 private:
  void note(const std::string& site, bool ok, double actual, double bound, double slack) {
    if (!ok) {
      passed = false;
      if (!first_violation) first_violation = Violation{site, actual, bound};
    }
    if (std::isfinite(slack) && slack < min_slack) {
      min_slack = slack;
      min_slack_site = site;
    }
  }
};

// ---------------------------------------------------------------------------
// Rosser bounds: n log n <= p_n for all n, p_n <= n (log n + log log n) for
// n >= 6.  A failure anywhere is an implementation bug, never new math.
// ---------------------------------------------------------------------------

inline BoundReport check_rosser(PrimeTable& table, u64 n_max, unsigned threads = 1) {
  BoundReport report("rosser");
  report.range_checked = "n in [1, " + std::to_string(n_max) + "]";
  if (n_max == 0) return report;
  const u64 p_max = table.nth_prime(n_max);  // materializes everything we need

  auto sweep = [&table](u64 n_lo, u64 n_hi) {
    BoundReport local("rosser");
    const u64 from = table.nth_prime(n_lo);
    const u64 to = table.nth_prime(n_hi);
    u64 n = n_lo;
    table.for_each_prime(from, to, [&](u64 p) {
      const double nd = static_cast<double>(n);
      const double log_n = std::log(nd);
      local.check_lower("n=" + std::to_string(n), static_cast<double>(p), nd * log_n);
      if (n >= 6)
        local.check_upper("n=" + std::to_string(n), static_cast<double>(p),
                          nd * (log_n + std::log(log_n)));
      ++n;
    });
    return local;
  };

  if (threads <= 1 || n_max < 64) {
    report.merge(sweep(1, n_max));
  } else {
    const unsigned parts = threads;
    std::vector<BoundReport> locals(parts, BoundReport("rosser"));
    std::vector<std::thread> workers;
    for (unsigned i = 0; i < parts; ++i) {
      const u64 lo = 1 + n_max * i / parts;
      const u64 hi = n_max * (i + 1) / parts;
      workers.emplace_back([&, i, lo, hi] {
        if (lo <= hi) locals[i] = sweep(lo, hi);
      });
    }
    for (auto& w : workers) w.join();
    for (auto& local : locals) report.merge(local);
  }
  (void)p_max;
  return report;
}

// ---------------------------------------------------------------------------
// Column lower bounds: for j >= k,
//   value(n, j) >= value(n, k) * log(value(n, k))^(j-k)                 (power)
//   value(n, j) >= value(n, k) * prod_{i=0}^{j-k-1} (t + i log t)       (product)
// where t = log value(n, k).  The product form needs log log > 0, so the
// anchor must be at least 3.
// ---------------------------------------------------------------------------

struct TowerLowerReports {
  BoundReport power{"tower.lower.power"};
  BoundReport product{"tower.lower.product"};
};

inline TowerLowerReports check_tower_lower_bounds(IteratedPrimes& it, u64 n, u64 k,
                                                  u64 j_max = 0,
                                                  bool include_product = true) {
  if (j_max == 0) j_max = it.reachable_depth(n);
  if (j_max < k) throw std::invalid_argument("j_max below anchor k");
  const u64 anchor = it.value(n, k);
  const double t = std::log(static_cast<double>(anchor));
  if (include_product && anchor < 3)
    throw std::domain_error("product-form anchor needs value >= 3 (log log > 0)");
  const double loglog = anchor >= 3 ? std::log(t) : 0.0;

  TowerLowerReports out;
  const std::string range = "n=" + std::to_string(n) + " k=" + std::to_string(k) +
                            " j in [" + std::to_string(k) + ", " + std::to_string(j_max) + "]";
  out.power.range_checked = range;
  out.product.range_checked = range;

  double power_bound = static_cast<double>(anchor);
  double product_bound = static_cast<double>(anchor);
  for (u64 j = k; j <= j_max; ++j) {
    const u64 actual = it.value(n, j);
    const std::string site = "n=" + std::to_string(n) + " k=" + std::to_string(k) +
                             " j=" + std::to_string(j);
    out.power.check_lower(site, static_cast<double>(actual), power_bound);
    if (include_product)
      out.product.check_lower(site, static_cast<double>(actual), product_bound);
    // extend both bounds for the next j
    power_bound *= t;
    product_bound *= t + static_cast<double>(j - k) * loglog;
  }
  return out;
}

/// Sweeps every anchor k in [0, j_max]; anchors below 3 are skipped for the
/// product form and listed in the report.
inline TowerLowerReports check_tower_lower_all(IteratedPrimes& it, u64 n, u64 j_max = 0) {
  if (j_max == 0) j_max = it.reachable_depth(n);
  TowerLowerReports out;
  out.power.range_checked = out.product.range_checked =
      "n=" + std::to_string(n) + " all 0 <= k <= j <= " + std::to_string(j_max);
  for (u64 k = 0; k <= j_max; ++k) {
    // the power form applies at every anchor; the product form needs the
    // anchor at 3 or above, smaller ones are listed as skipped
    const bool product_ok = it.value(n, k) >= 3;
    if (!product_ok)
      out.product.skip("n=" + std::to_string(n) + " k=" + std::to_string(k),
                       "anchor below 3, log log undefined or negative");
    TowerLowerReports one = check_tower_lower_bounds(it, n, k, j_max, product_ok);
    out.power.merge(one.power);
    out.product.merge(one.product);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Column count upper bound: with anchor p = value(n, k) >= 3, t = log p,
// for every x >= p:
//   tower-count(x) <= log x / log t + (k - t / log t)
// With x = p the right side is exactly k.
// ---------------------------------------------------------------------------

inline BoundReport check_tower_count_upper(IteratedPrimes& it, u64 n, u64 k,
                                           std::span<const u64> x_samples) {
  const u64 anchor = it.value(n, k);
  if (anchor < 3) throw std::domain_error("count bound anchor needs value >= 3");
  const double t = std::log(static_cast<double>(anchor));
  const double loglog = std::log(t);

  BoundReport report("tower.count.upper");
  report.range_checked = "n=" + std::to_string(n) + " k=" + std::to_string(k) + " at " +
                         std::to_string(x_samples.size()) + " samples";
  for (u64 x : x_samples) {
    const std::string site =
        "n=" + std::to_string(n) + " k=" + std::to_string(k) + " x=" + std::to_string(x);
    if (x < anchor) {
      report.skip(site, "sample below anchor value");
      continue;
    }
    const u64 count = it.count_upto(SetFamilySelector::tower(n), x).count;
    const double bound =
        std::log(static_cast<double>(x)) / loglog + (static_cast<double>(k) - t / loglog);
    report.check_upper(site, static_cast<double>(count), bound);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Threshold ("k0") certificates.
//
// The super-logarithmic upper bounds hold from some depth onward, subject to
// two side conditions at the anchor p (t = log p):
//
//   base:  c <= t^e                 (c=2, e=2 log 2 - 1 for columns;
//                                    c=8, e=4 log 2 - 2 on the diagonal)
//   step:  c (t + f l log l log t) <= t^(log l)   for step widths l
//                                   (f=1 columns, f=2 diagonal)
//
// The step condition is provably empty for small l: at l = 2 the right side
// is t^(log 2) < t while the left side exceeds 2t whenever t >= 1, so no
// anchor whatsoever satisfies it.  (The same squeeze rules out l = 3 and 4
// for every anchor within integer range.)  A certificate therefore stamps
// the maximal verified suffix [l_lo, l_max] of step widths at the first
// anchor whose base condition holds and whose suffix is nonempty, and keeps
// the failing prefix on record; it never claims the full requested range.
// ---------------------------------------------------------------------------

struct SideCondition {
  double lhs = 0;
  double rhs = 0;
  bool holds = false;
};

inline SideCondition side_base(double log_p, double c, double e) {
  SideCondition s;
  s.lhs = c;
  s.rhs = std::pow(log_p, e);
  s.holds = s.lhs <= s.rhs * (1.0 + kComparisonGuard);
  return s;
}

inline SideCondition side_step(double log_p, u64 l, double c, double f) {
  SideCondition s;
  const double ld = static_cast<double>(l);
  s.lhs = c * (log_p + f * ld * std::log(ld) * std::log(log_p));
  s.rhs = std::pow(log_p, std::log(ld));
  s.holds = s.lhs <= s.rhs * (1.0 + kComparisonGuard);
  return s;
}

inline SideCondition tower_side_base(double log_p) {
  return side_base(log_p, 2.0, 2.0 * std::log(2.0) - 1.0);
}
inline SideCondition tower_side_step(double log_p, u64 l) {
  return side_step(log_p, l, 2.0, 1.0);
}
inline SideCondition diag_side_base(double log_p) {
  return side_base(log_p, 8.0, 4.0 * std::log(2.0) - 2.0);
}
inline SideCondition diag_side_step(double log_p, u64 l) {
  return side_step(log_p, l, 8.0, 2.0);
}

struct KZeroCertificate {
  std::string bound_id;
  std::optional<u64> row;  // empty for the diagonal
  u64 k0 = 0;
  u64 anchor_value = 0;
  u64 l_lo = 0;  // step condition verified for every l in [l_lo, l_hi]
  u64 l_hi = 0;
  u64 l_requested_lo = 2;  // widths in [l_requested_lo, l_lo) fail at this anchor
  u64 verified_j_lo = 0;   // stamped by the main-inequality check
  u64 verified_j_hi = 0;
  std::string note;
};

struct KZeroSearch {
  std::optional<KZeroCertificate> certificate;
  u64 k_first_base = 0;  // least k whose base condition holds (0 = none found)
  u64 k_scanned_hi = 0;
  std::string diagnostics;
};

namespace detail {

template <typename AnchorFn, typename BaseFn, typename StepFn>
KZeroSearch find_k0_impl(const std::string& id, std::optional<u64> row, u64 k_hi,
                         u64 l_max, AnchorFn&& anchor_of, BaseFn&& base,
                         StepFn&& step) {
  if (l_max < 2) throw std::invalid_argument("l_max must be >= 2");
  KZeroSearch search;
  search.k_scanned_hi = k_hi;
  for (u64 k = 1; k <= k_hi; ++k) {
    const u64 p = anchor_of(k);
    if (p < 3) continue;  // log log undefined below 3
    const double t = std::log(static_cast<double>(p));
    if (!base(t).holds) continue;
    if (search.k_first_base == 0) search.k_first_base = k;
    // Maximal verified suffix of step widths.  Testing l_max first skips
    // anchors that cannot support any suffix (log log p <= 1).
    if (!step(t, l_max).holds) continue;
    u64 last_fail = 1;
    for (u64 l = 2; l <= l_max; ++l)
      if (!step(t, l).holds) last_fail = l;
    const u64 l_lo = last_fail + 1;
    if (l_lo > l_max) continue;

    KZeroCertificate cert;
    cert.bound_id = id;
    cert.row = row;
    cert.k0 = k;
    cert.anchor_value = p;
    cert.l_lo = l_lo;
    cert.l_hi = l_max;
    const auto at2 = step(t, 2);
    cert.note = "step condition fails for widths below " + std::to_string(l_lo) +
                " at this anchor (l=2: lhs=" + std::to_string(at2.lhs) +
                " rhs=" + std::to_string(at2.rhs) +
                "); widths beyond " + std::to_string(l_max) + " unverified";
    search.certificate = cert;
    return search;
  }
  search.diagnostics =
      search.k_first_base == 0
          ? "base condition never held below the ceiling"
          : "no anchor with a nonempty verified step-width suffix below the ceiling";
  return search;
}

}  // namespace detail

inline KZeroSearch find_k0_tower(IteratedPrimes& it, u64 n, u64 l_max) {
  return detail::find_k0_impl(
      "tower.k0", n, it.reachable_depth(n), l_max, [&](u64 k) { return it.value(n, k); },
      [](double t) { return tower_side_base(t); },
      [](double t, u64 l) { return tower_side_step(t, l); });
}

inline KZeroSearch find_k0_diagonal(IteratedPrimes& it, u64 l_max) {
  u64 k_hi = 0;
  for (u64 k = 1;; ++k) {
    try {
      it.value(k, k);
    } catch (const ceiling_error&) {
      break;
    }
    k_hi = k;
  }
  return detail::find_k0_impl(
      "diag.k0", std::nullopt, k_hi, l_max, [&](u64 k) { return it.value(k, k); },
      [](double t) { return diag_side_base(t); },
      [](double t, u64 l) { return diag_side_step(t, l); });
}

// ---------------------------------------------------------------------------
// Column upper bounds from a certificate.  With p = value(n, k), t = log p,
// l = j - k, for all k0 <= k <= j <= j_max:
//
//   superlog: value(n, j) <= p * t^((l+1) log(l+1))
//   product:  value(n, j) <= 2^l * p * prod_{i=1}^{l} (t + i log i log t)
//   power:    value(n, j) <= p * t^(l^alpha)   -- only where the power
//             exponent dominates the superlog one, i.e. l^alpha >=
//             (l+1) log(l+1); at l = 1 the claim would contradict the
//             Rosser lower bound for every anchor, so such gaps are
//             skipped and listed.
// ---------------------------------------------------------------------------

inline bool power_gap_derivable(u64 gap, double alpha, double factor) {
  if (gap == 0) return true;
  const double l = static_cast<double>(gap);
  return std::pow(l, alpha) >= factor * (l + 1.0) * std::log(l + 1.0);
}

struct TowerUpperReports {
  BoundReport superlog{"tower.upper.superlog"};
  BoundReport product{"tower.upper.product"};
  BoundReport power{"tower.upper.power"};
  KZeroCertificate certificate;
};

inline TowerUpperReports check_tower_upper_main(IteratedPrimes& it, u64 n,
                                                const KZeroCertificate& cert,
                                                u64 j_max, double alpha) {
  if (!cert.row || *cert.row != n)
    throw std::invalid_argument("certificate does not apply to this row");
  if (alpha <= 1.0) throw std::invalid_argument("alpha must exceed 1");
  if (j_max == 0) j_max = it.reachable_depth(n);

  TowerUpperReports out;
  out.certificate = cert;
  out.certificate.verified_j_lo = cert.k0;
  out.certificate.verified_j_hi = j_max;
  const std::string range = "n=" + std::to_string(n) + " " + std::to_string(cert.k0) +
                            " <= k <= j <= " + std::to_string(j_max);
  out.superlog.range_checked = range;
  out.product.range_checked = range;
  out.power.range_checked = range + " where the power exponent dominates";

  for (u64 k = cert.k0; k <= j_max; ++k) {
    const u64 anchor = it.value(n, k);
    const double p = static_cast<double>(anchor);
    const double t = std::log(p);
    const double loglog = std::log(t);
    double product_bound = p;
    for (u64 j = k; j <= j_max; ++j) {
      const u64 gap = j - k;
      const double l = static_cast<double>(gap);
      const double actual = static_cast<double>(it.value(n, j));
      const std::string site = "n=" + std::to_string(n) + " k=" + std::to_string(k) +
                               " j=" + std::to_string(j);
      out.superlog.check_upper(site, actual,
                               p * std::pow(t, (l + 1.0) * std::log(l + 1.0)));
      out.product.check_upper(site, actual, product_bound);
      if (power_gap_derivable(gap, alpha, 1.0))
        out.power.check_upper(site, actual, p * std::pow(t, std::pow(l, alpha)));
      else
        out.power.skip(site, "gap below derivable range for alpha");
      product_bound *= 2.0 * (t + (l + 1.0) * std::log(l + 1.0) * loglog);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Diagonal bundle: lower bounds for every anchor, the two shift/step
// inequalities, threshold-certified upper bounds, and the count bound.
// d_j denotes the diagonal cell value(j, j).
// ---------------------------------------------------------------------------

struct DiagonalReports {
  BoundReport lower_power{"diag.lower.power"};
  BoundReport lower_product{"diag.lower.product"};
  BoundReport shift{"diag.shift"};          // value(j+1, j-1) <= d_j
  BoundReport step{"diag.step"};            // d_{j+1} <= 8 d_j log^2 d_j, j >= 3
  BoundReport upper_superlog{"diag.upper.superlog"};
  BoundReport upper_product{"diag.upper.product"};
  BoundReport upper_power{"diag.upper.power"};
  BoundReport count_upper{"diag.count.upper"};
  KZeroSearch k0;

  std::vector<const BoundReport*> parts() const {
    return {&lower_power, &lower_product, &shift,         &step,
            &upper_superlog, &upper_product, &upper_power, &count_upper};
  }
  bool all_passed() const {
    for (const auto* part : parts())
      if (!part->passed) return false;
    return true;
  }
};

inline DiagonalReports check_diagonal_bounds(IteratedPrimes& it, u64 j_max, double alpha,
                                             u64 l_max,
                                             std::span<const u64> count_samples) {
  DiagonalReports out;
  u64 reachable = 0;
  for (u64 k = 1;; ++k) {
    try {
      it.value(k, k);
    } catch (const ceiling_error&) {
      break;
    }
    reachable = k;
  }
  if (j_max == 0 || j_max > reachable) j_max = reachable;
  if (j_max == 0) throw std::invalid_argument("no diagonal cells under the ceiling");
  const std::string range = "diagonal j in [1, " + std::to_string(j_max) + "]";
  for (auto* part : {&out.lower_power, &out.lower_product, &out.shift, &out.step,
                     &out.upper_superlog, &out.upper_product, &out.upper_power,
                     &out.count_upper})
    part->range_checked = range;

  std::vector<u64> diag(j_max + 1, 0);
  for (u64 k = 1; k <= j_max; ++k) diag[k] = it.value(k, k);

  // lower bounds, every anchor
  for (u64 k = 1; k <= j_max; ++k) {
    const double p = static_cast<double>(diag[k]);
    const double t = std::log(p);
    const bool product_ok = diag[k] >= 3;
    if (!product_ok)
      out.lower_product.skip("k=" + std::to_string(k), "anchor below 3");
    const double loglog = product_ok ? std::log(t) : 0.0;
    double power_bound = p;
    double product_bound = p;
    for (u64 j = k; j <= j_max; ++j) {
      const std::string site = "k=" + std::to_string(k) + " j=" + std::to_string(j);
      out.lower_power.check_lower(site, static_cast<double>(diag[j]), power_bound);
      if (product_ok)
        out.lower_product.check_lower(site, static_cast<double>(diag[j]), product_bound);
      power_bound *= t;
      product_bound *= t + static_cast<double>(j - k) * loglog;
    }
  }

  // shift and step inequalities, j >= 3
  for (u64 j = 3; j + 1 <= j_max; ++j) {
    const std::string site = "j=" + std::to_string(j);
    out.shift.check_upper(site, static_cast<double>(it.value(j + 1, j - 1)),
                          static_cast<double>(diag[j]));
    const double t = std::log(static_cast<double>(diag[j]));
    out.step.check_upper(site, static_cast<double>(diag[j + 1]),
                         8.0 * static_cast<double>(diag[j]) * t * t);
  }

  // threshold-certified upper bounds
  out.k0 = find_k0_diagonal(it, l_max);
  if (out.k0.certificate) {
    auto& cert = *out.k0.certificate;
    cert.verified_j_lo = cert.k0;
    cert.verified_j_hi = j_max;
    for (u64 k = cert.k0; k <= j_max; ++k) {
      const double p = static_cast<double>(diag[k]);
      const double t = std::log(p);
      const double loglog = std::log(t);
      double product_bound = p;
      for (u64 j = k; j <= j_max; ++j) {
        const u64 gap = j - k;
        const double l = static_cast<double>(gap);
        const double actual = static_cast<double>(diag[j]);
        const std::string site = "k=" + std::to_string(k) + " j=" + std::to_string(j);
        out.upper_superlog.check_upper(
            site, actual, p * std::pow(t, 2.0 * (l + 1.0) * std::log(l + 1.0)));
        out.upper_product.check_upper(site, actual, product_bound);
        if (power_gap_derivable(gap, alpha, 2.0))
          out.upper_power.check_upper(site, actual, p * std::pow(t, std::pow(l, alpha)));
        else
          out.upper_power.skip(site, "gap below derivable range for alpha");
        const double factor = t + (l + 1.0) * std::log(l + 1.0) * loglog;
        product_bound *= 8.0 * factor * factor;
      }
    }
  } else {
    out.upper_superlog.skip("all", "no threshold certificate under the ceiling");
    out.upper_product.skip("all", "no threshold certificate under the ceiling");
    out.upper_power.skip("all", "no threshold certificate under the ceiling");
  }

  // count bound at the sampled x, anchors k >= 2 (anchor value >= 3)
  for (u64 k = 2; k <= j_max; ++k) {
    const double t = std::log(static_cast<double>(diag[k]));
    const double loglog = std::log(t);
    for (u64 x : count_samples) {
      if (x < diag[k]) continue;
      const u64 count = it.count_upto(SetFamilySelector::diagonal(), x).count;
      const double bound = std::log(static_cast<double>(x)) / loglog +
                           (static_cast<double>(k) - t / loglog);
      out.count_upper.check_upper("k=" + std::to_string(k) + " x=" + std::to_string(x),
                                  static_cast<double>(count), bound);
    }
  }
  return out;
}

}  // namespace towerprimes
