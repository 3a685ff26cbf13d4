#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "towerprimes/iterated.hpp"

namespace towerprimes {

/// Sampled ratio diagnostics for one limit-flavored claim.  Traces expose
/// data; they never decide a limit.  The trend summary discards the first
/// three samples, where small-argument noise dominates.
struct RatioTrace {
  std::string claim_id;
  std::vector<std::pair<double, double>> sample_points;  // (argument, ratio)
  bool truncated = false;  // ceiling cut the sweep short

  struct Trend {
    double last_value = 0;
    double max_after_burn_in = 0;
    double min_after_burn_in = 0;
  };

  void add(double argument, double ratio) { sample_points.emplace_back(argument, ratio); }

  Trend trend() const {
    Trend t;
    if (sample_points.empty()) return t;
    t.last_value = sample_points.back().second;
    const std::size_t burn = sample_points.size() > 3 ? 3 : 0;
    t.max_after_burn_in = t.min_after_burn_in = sample_points[burn].second;
    for (std::size_t i = burn; i < sample_points.size(); ++i) {
      t.max_after_burn_in = std::max(t.max_after_burn_in, sample_points[i].second);
      t.min_after_burn_in = std::min(t.min_after_burn_in, sample_points[i].second);
    }
    return t;
  }
};

struct NestedGrowthTraces {
  RatioTrace value_ratio;      // value(n, k) / (n log^k n)
  RatioTrace successor_ratio;  // value(n+1, k) / value(n, k)
  RatioTrace log_ratio;        // log value(n, k) / log n
};

/// Growth diagnostics of the k-fold iterate along a schedule of rows.
inline NestedGrowthTraces trace_nested_growth(IteratedPrimes& it, u64 k,
                                              std::span<const u64> rows) {
  NestedGrowthTraces out;
  out.value_ratio.claim_id = "t1.value";
  out.successor_ratio.claim_id = "t1.successor";
  out.log_ratio.claim_id = "t1.log";
  for (u64 n : rows) {
    if (n == 0) continue;
    try {
      const double nd = static_cast<double>(n);
      const double v = static_cast<double>(it.value(n, k));
      const double v_next = static_cast<double>(it.value(n + 1, k));
      const double denom = nd * std::pow(std::log(nd), static_cast<double>(k));
      if (denom > 0) out.value_ratio.add(nd, v / denom);
      out.successor_ratio.add(nd, v_next / v);
      if (n >= 2) out.log_ratio.add(nd, std::log(v) / std::log(nd));
    } catch (const ceiling_error&) {
      out.value_ratio.truncated = out.successor_ratio.truncated =
          out.log_ratio.truncated = true;
      break;
    }
  }
  return out;
}

/// Normalized nested counting function: count(x) * log^k x / x.  Identically
/// one at k = 0 for integer x.
inline RatioTrace trace_nested_count_ratio(IteratedPrimes& it, u64 k,
                                           std::span<const u64> x_samples) {
  RatioTrace trace;
  trace.claim_id = "h" + std::to_string(k);
  for (u64 x : x_samples) {
    if (x < 1) continue;
    const double xd = static_cast<double>(x);
    const double count =
        static_cast<double>(it.count_upto(SetFamilySelector::nested(k), x).count);
    trace.add(xd, count * std::pow(std::log(xd), static_cast<double>(k)) / xd);
  }
  return trace;
}

/// Single-step growth along a column: value(n, k+1) / (value(n, k) log value(n, k)).
inline RatioTrace trace_tower_step_ratio(IteratedPrimes& it, u64 n, u64 k_max) {
  RatioTrace trace;
  trace.claim_id = "t4.row" + std::to_string(n);
  for (u64 k = 1; k <= k_max; ++k) {
    try {
      const double v = static_cast<double>(it.value(n, k));
      const double v_next = static_cast<double>(it.value(n, k + 1));
      trace.add(static_cast<double>(k), v_next / (v * std::log(v)));
    } catch (const ceiling_error&) {
      trace.truncated = true;
      break;
    }
  }
  return trace;
}

/// log value(n, j) / (j log j) for j >= 2 — along a fixed row, or along the
/// diagonal when `diagonal` is set.
inline RatioTrace trace_log_growth(IteratedPrimes& it, u64 n, u64 j_max, bool diagonal) {
  RatioTrace trace;
  trace.claim_id = diagonal ? "c8.diag" : "c7.row" + std::to_string(n);
  for (u64 j = 2; j <= j_max; ++j) {
    try {
      const u64 v = diagonal ? it.value(j, j) : it.value(n, j);
      const double jd = static_cast<double>(j);
      trace.add(jd, std::log(static_cast<double>(v)) / (jd * std::log(jd)));
    } catch (const ceiling_error&) {
      trace.truncated = true;
      break;
    }
  }
  return trace;
}

/// Data for the open neighbor-ratio question: value(k+1, k) / value(k, k).
inline RatioTrace trace_diagonal_neighbor_ratio(IteratedPrimes& it, u64 k_max) {
  RatioTrace trace;
  trace.claim_id = "q1";
  for (u64 k = 1; k <= k_max; ++k) {
    try {
      const double above = static_cast<double>(it.value(k + 1, k));
      const double diag = static_cast<double>(it.value(k, k));
      trace.add(static_cast<double>(k), above / diag);
    } catch (const ceiling_error&) {
      trace.truncated = true;
      break;
    }
  }
  return trace;
}

/// Data for the row-versus-diagonal hypothesis: value(n, k) / value(k, k)
/// for k from n upward.
inline RatioTrace trace_row_vs_diagonal(IteratedPrimes& it, u64 n, u64 k_max) {
  RatioTrace trace;
  trace.claim_id = "hypothesis.row" + std::to_string(n);
  for (u64 k = n; k <= k_max; ++k) {
    try {
      const double row = static_cast<double>(it.value(n, k));
      const double diag = static_cast<double>(it.value(k, k));
      trace.add(static_cast<double>(k), row / diag);
    } catch (const ceiling_error&) {
      trace.truncated = true;
      break;
    }
  }
  return trace;
}

/// Tower count against diagonal count at the sampled x.  The pointwise fact
/// tower-count >= diagonal-count for x >= value(n, n) is exact and asserted;
/// a breach would mean a counting bug, so it throws.
inline RatioTrace trace_tower_vs_diagonal_counts(IteratedPrimes& it, u64 n,
                                                 std::span<const u64> x_samples) {
  RatioTrace trace;
  trace.claim_id = "t13.row" + std::to_string(n);
  const u64 threshold = it.value(n, n);
  for (u64 x : x_samples) {
    if (x < threshold) continue;
    const u64 tower = it.count_upto(SetFamilySelector::tower(n), x).count;
    const u64 diag = it.count_upto(SetFamilySelector::diagonal(), x).count;
    if (tower < diag)
      throw std::logic_error("tower count fell below diagonal count at x=" +
                             std::to_string(x));
    if (diag == 0) continue;
    trace.add(static_cast<double>(x),
              static_cast<double>(tower) / static_cast<double>(diag));
  }
  return trace;
}

/// Ordinary least squares on the log-transformed model
///   count(x) = log c + log x + beta log log x,
/// which is the exponentiated-count growth question in linear form.
struct FitResult {
  std::string model;
  double c = 0;
  double beta = 0;
  double residual_norm = 0;
  u64 x_lo = 0, x_hi = 0;
  u64 samples = 0;
};

inline FitResult fit_exp_count(IteratedPrimes& it, const SetFamilySelector& family,
                               std::span<const u64> x_samples) {
  if (family.kind == SetKind::Nested)
    throw std::invalid_argument("exp-count fit applies to tower/diagonal families");
  if (x_samples.size() < 3) throw std::invalid_argument("degenerate fit: need >= 3 samples");

  // y = count - log x = log c + beta z, z = log log x
  std::vector<double> ys, zs;
  ys.reserve(x_samples.size());
  for (u64 x : x_samples) {
    if (x < 3) throw std::invalid_argument("samples must be >= 3 for log log");
    const double xd = static_cast<double>(x);
    const double count = static_cast<double>(it.count_upto(family, x).count);
    ys.push_back(count - std::log(xd));
    zs.push_back(std::log(std::log(xd)));
  }
  const double m = static_cast<double>(ys.size());
  double sz = 0, sy = 0, szz = 0, szy = 0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    sz += zs[i];
    sy += ys[i];
    szz += zs[i] * zs[i];
    szy += zs[i] * ys[i];
  }
  const double det = m * szz - sz * sz;
  if (std::abs(det) < 1e-12) throw std::invalid_argument("degenerate fit: collinear samples");
  const double beta = (m * szy - sz * sy) / det;
  const double intercept = (sy - beta * sz) / m;

  FitResult fit;
  fit.model = "exp-count ~ c * x * log^beta x";
  fit.beta = beta;
  fit.c = std::exp(intercept);
  double rss = 0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double r = ys[i] - (intercept + beta * zs[i]);
    rss += r * r;
  }
  fit.residual_norm = std::sqrt(rss);
  fit.x_lo = x_samples.front();
  fit.x_hi = x_samples.back();
  fit.samples = x_samples.size();
  return fit;
}

}  // namespace towerprimes
