#pragma once

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "towerprimes/asymptotics.hpp"
#include "towerprimes/bounds.hpp"
#include "towerprimes/ratio_sets.hpp"
#include "towerprimes/series.hpp"

namespace towerprimes {

/// Deterministic double formatting; identical inputs print identically, which
/// golden-file comparisons rely on.
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.15g", v);
  return buf;
}

inline std::string fmt_u64(u64 v) { return std::to_string(v); }

using KvRecord = std::vector<std::pair<std::string, std::string>>;

inline KvRecord to_kv(const BoundReport& report) {
  KvRecord kv;
  kv.emplace_back("bound_id", report.bound_id);
  kv.emplace_back("range", report.range_checked);
  kv.emplace_back("passed", report.passed ? "true" : "false");
  kv.emplace_back("cells_checked", fmt_u64(report.cells_checked));
  kv.emplace_back("min_slack", fmt_double(report.min_slack));
  kv.emplace_back("min_slack_at", report.min_slack_site);
  if (report.first_violation) {
    kv.emplace_back("first_violation", report.first_violation->site);
    kv.emplace_back("violation_actual", fmt_double(report.first_violation->actual));
    kv.emplace_back("violation_bound", fmt_double(report.first_violation->bound));
  }
  if (report.inf_passes > 0) kv.emplace_back("inf_passes", fmt_u64(report.inf_passes));
  kv.emplace_back("skipped", fmt_u64(report.skipped.size()));
  return kv;
}

inline KvRecord to_kv(const KZeroCertificate& cert) {
  KvRecord kv;
  kv.emplace_back("bound_id", cert.bound_id);
  kv.emplace_back("family", cert.row ? "tower(" + fmt_u64(*cert.row) + ")" : "diagonal");
  kv.emplace_back("k0", fmt_u64(cert.k0));
  kv.emplace_back("anchor_value", fmt_u64(cert.anchor_value));
  kv.emplace_back("l_verified_lo", fmt_u64(cert.l_lo));
  kv.emplace_back("l_verified_hi", fmt_u64(cert.l_hi));
  kv.emplace_back("l_requested_lo", fmt_u64(cert.l_requested_lo));
  if (cert.verified_j_hi > 0) {
    kv.emplace_back("verified_j_lo", fmt_u64(cert.verified_j_lo));
    kv.emplace_back("verified_j_hi", fmt_u64(cert.verified_j_hi));
  }
  kv.emplace_back("note", cert.note);
  return kv;
}

inline KvRecord to_kv(const SeriesAccount& account) {
  KvRecord kv;
  kv.emplace_back("family", account.family.describe());
  kv.emplace_back("alpha", fmt_double(account.alpha));
  kv.emplace_back("cutoff", fmt_u64(account.cutoff_x));
  kv.emplace_back("partial_sum", fmt_double(account.partial_sum));
  kv.emplace_back("tail_upper",
                  account.tail_upper ? fmt_double(*account.tail_upper) : "unknown");
  kv.emplace_back("bracket_hi", account.tail_upper
                                    ? fmt_double(account.partial_sum + *account.tail_upper)
                                    : "unknown");
  kv.emplace_back("terms", fmt_u64(account.terms_used));
  return kv;
}

inline KvRecord to_kv(const RatioWitness& witness) {
  KvRecord kv;
  kv.emplace_back("target", fmt_double(witness.target));
  kv.emplace_back("a", fmt_u64(witness.a));
  kv.emplace_back("b", fmt_u64(witness.b));
  kv.emplace_back("error", fmt_double(witness.achieved_error));
  kv.emplace_back("bound", fmt_u64(witness.search_bound));
  kv.emplace_back("sufficient", witness.sufficient ? "true" : "insufficient");
  return kv;
}

inline KvRecord to_kv(const FitResult& fit) {
  KvRecord kv;
  kv.emplace_back("model", fit.model);
  kv.emplace_back("c", fmt_double(fit.c));
  kv.emplace_back("beta", fmt_double(fit.beta));
  kv.emplace_back("residual_norm", fmt_double(fit.residual_norm));
  kv.emplace_back("x_lo", fmt_u64(fit.x_lo));
  kv.emplace_back("x_hi", fmt_u64(fit.x_hi));
  kv.emplace_back("samples", fmt_u64(fit.samples));
  return kv;
}

inline void print_kv(std::ostream& os, const KvRecord& kv) {
  for (const auto& [key, value] : kv) os << key << '=' << value << '\n';
}

}  // namespace towerprimes
