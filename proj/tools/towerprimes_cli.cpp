// Command-line front end: every library operation behind one binary with
// machine-readable output.  Data goes to stdout, diagnostics to stderr.
// Exit codes: 0 success, 1 verification failure, 2 usage error, 3 range or
// ceiling error.

#include <cstdint>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "towerprimes/asymptotics.hpp"
#include "towerprimes/bounds.hpp"
#include "towerprimes/iterated.hpp"
#include "towerprimes/prime_table.hpp"
#include "towerprimes/ratio_sets.hpp"
#include "towerprimes/series.hpp"
#include "towerprimes/text_io.hpp"

namespace tp = towerprimes;
using tp::u64;

namespace {

enum class Format { Rows, Csv, Plain };

struct RunConfig {
  u64 ceiling = 10'000'000'000ULL;
  std::string cache_dir;  // empty: fall back to TOWER_PRIMES_CACHE, else none
  unsigned threads = 1;
  Format format = Format::Plain;
};

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void emit_table(Format format, const std::vector<std::string>& cols,
                const std::vector<std::vector<std::string>>& rows) {
  switch (format) {
    case Format::Csv: {
      std::cout << "#v1\n";
      for (std::size_t i = 0; i < cols.size(); ++i)
        std::cout << (i ? "," : "") << csv_field(cols[i]);
      std::cout << '\n';
      for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
          std::cout << (i ? "," : "") << csv_field(row[i]);
        std::cout << '\n';
      }
      break;
    }
    case Format::Rows:
      for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
          std::cout << (i ? " " : "") << cols[i] << '=' << row[i];
        std::cout << '\n';
      }
      break;
    case Format::Plain:
      for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
          std::cout << (i ? " " : "") << row[i];
        std::cout << '\n';
      }
      break;
  }
}

void emit_record(Format format, const tp::KvRecord& kv) {
  if (format == Format::Csv) {
    std::cout << "#v1\n";
    for (std::size_t i = 0; i < kv.size(); ++i)
      std::cout << (i ? "," : "") << csv_field(kv[i].first);
    std::cout << '\n';
    for (std::size_t i = 0; i < kv.size(); ++i)
      std::cout << (i ? "," : "") << csv_field(kv[i].second);
    std::cout << '\n';
    return;
  }
  tp::print_kv(std::cout, kv);
}

void emit_scalar(Format format, const std::string& name, const std::string& value) {
  if (format == Format::Csv) {
    std::cout << "#v1\n" << name << '\n' << value << '\n';
    return;
  }
  std::cout << value << '\n';
}

std::vector<u64> geometric_samples(u64 lo, u64 hi, std::size_t count) {
  if (lo < 1) lo = 1;
  if (hi < lo) hi = lo;
  std::vector<u64> out;
  if (count <= 1 || lo == hi) {
    out.push_back(hi);
    return out;
  }
  const double ratio = std::pow(static_cast<double>(hi) / static_cast<double>(lo),
                                1.0 / static_cast<double>(count - 1));
  double cur = static_cast<double>(lo);
  for (std::size_t i = 0; i < count; ++i, cur *= ratio) {
    u64 v = static_cast<u64>(cur + 0.5);
    if (v < lo) v = lo;
    if (v > hi) v = hi;
    if (out.empty() || v > out.back()) out.push_back(v);
  }
  if (out.back() != hi) out.push_back(hi);
  return out;
}

// Exactly one of --nested K / --tower N / --diagonal.
struct SelectorOpts {
  std::int64_t nested = -1;
  std::int64_t tower = -1;
  bool diagonal = false;

  void attach(CLI::App* sub, bool with_nested = true) {
    if (with_nested)
      sub->add_option("--nested", nested, "nested family depth k (>= 0)")
          ->check(CLI::NonNegativeNumber);
    sub->add_option("--tower", tower, "tower family row n (>= 1)")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--diagonal", diagonal, "diagonal family");
  }

  tp::SetFamilySelector resolve() const {
    const int picked = (nested >= 0 ? 1 : 0) + (tower >= 0 ? 1 : 0) + (diagonal ? 1 : 0);
    if (picked != 1)
      throw CLI::ValidationError("selector",
                                 "pick exactly one of --nested/--tower/--diagonal");
    if (nested >= 0) return tp::SetFamilySelector::nested(static_cast<u64>(nested));
    if (tower >= 0) return tp::SetFamilySelector::tower(static_cast<u64>(tower));
    return tp::SetFamilySelector::diagonal();
  }
};

struct Session {
  RunConfig cfg;
  std::unique_ptr<tp::PrimeTable> table;
  std::unique_ptr<tp::IteratedPrimes> iterates;

  tp::IteratedPrimes& open() {
    if (!iterates) {
      tp::PrimeTableOptions opt;
      opt.value_ceiling = cfg.ceiling;
      if (!cfg.cache_dir.empty()) opt.cache_dir = cfg.cache_dir;
      opt.resolve_cache_from_env();
      table = std::make_unique<tp::PrimeTable>(opt);
      iterates = std::make_unique<tp::IteratedPrimes>(*table);
    }
    return *iterates;
  }
};

std::vector<std::string> trace_row(const std::string& claim,
                                   const std::pair<double, double>& point) {
  return {claim, tp::fmt_double(point.first), tp::fmt_double(point.second)};
}

void emit_traces(Format format, std::initializer_list<const tp::RatioTrace*> traces) {
  std::vector<std::vector<std::string>> rows;
  for (const auto* trace : traces) {
    for (const auto& point : trace->sample_points)
      rows.push_back(trace_row(trace->claim_id, point));
    if (trace->truncated)
      std::cerr << "note: trace " << trace->claim_id << " truncated by the ceiling\n";
  }
  emit_table(format, {"claim", "x", "ratio"}, rows);
}

int report_exit(std::initializer_list<const tp::BoundReport*> reports) {
  for (const auto* report : reports)
    if (!report->passed) return 1;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"iterated prime indexing: sequences, set families, inequality sweeps"};
  app.require_subcommand(1);

  Session session;
  auto& cfg = session.cfg;
  int exit_code = 0;

  app.add_option("--ceiling", cfg.ceiling, "largest value any query may touch")
      ->check(CLI::Range(u64{2}, std::numeric_limits<u64>::max()))
      ->capture_default_str();
  app.add_option("--cache", cfg.cache_dir,
                 "segment cache directory (TOWER_PRIMES_CACHE as fallback)");
  app.add_option("--threads", cfg.threads, "worker thread count")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  std::map<std::string, Format> format_names{
      {"rows", Format::Rows}, {"csv", Format::Csv}, {"plain", Format::Plain}};
  app.add_option("--format", cfg.format, "output format")
      ->transform(CLI::CheckedTransformer(format_names, CLI::ignore_case))
      ->default_str("plain");

  // --- iterate ---------------------------------------------------------------
  {
    auto* sub = app.add_subcommand("iterate", "value of the k-fold iterate at row n");
    auto n = std::make_shared<u64>(1);
    auto k = std::make_shared<u64>(0);
    sub->add_option("--n", *n, "row (>= 1)")->required()->check(CLI::PositiveNumber);
    sub->add_option("--k", *k, "depth (>= 0)")->required();
    sub->callback([&, n, k] {
      emit_scalar(cfg.format, "value", tp::fmt_u64(session.open().value(*n, *k)));
    });
  }

  // --- enumerate / count -------------------------------------------------------
  {
    auto* sub = app.add_subcommand("enumerate", "members of a set family up to x");
    auto sel = std::make_shared<SelectorOpts>();
    auto x = std::make_shared<u64>(0);
    sel->attach(sub);
    sub->add_option("--x", *x, "upper limit")->required();
    sub->callback([&, sel, x] {
      auto& it = session.open();
      const bool complete = it.for_each_member(sel->resolve(), *x, [&](u64 v) {
        std::cout << v << '\n';
      });
      if (!complete)
        std::cerr << "note: diagonal walk stopped by the ceiling before x\n";
    });
  }
  {
    auto* sub = app.add_subcommand("count", "member count of a set family at x");
    auto sel = std::make_shared<SelectorOpts>();
    auto x = std::make_shared<u64>(0);
    sel->attach(sub);
    sub->add_option("--x", *x, "upper limit")->required();
    sub->callback([&, sel, x] {
      const auto sample = session.open().count_upto(sel->resolve(), *x);
      if (!sample.complete) {
        std::cerr << "range error: the ceiling stops the diagonal walk before "
                     "completeness at x is certain\n";
        exit_code = 3;
        return;
      }
      emit_scalar(cfg.format, "count", tp::fmt_u64(sample.count));
    });
  }

  // --- level -------------------------------------------------------------------
  {
    auto* sub = app.add_subcommand("level", "largest k with m in the k-fold nested family");
    auto m = std::make_shared<u64>(1);
    sub->add_option("--m", *m, "value (>= 1)")->required()->check(CLI::PositiveNumber);
    sub->callback([&, m] {
      emit_scalar(cfg.format, "level", tp::fmt_u64(session.open().tower_level(*m)));
    });
  }

  // --- tails ---------------------------------------------------------------------
  {
    auto* sub = app.add_subcommand(
        "tails", "tower intersection for rows n < m, plus the counting difference at x");
    auto n = std::make_shared<u64>(1);
    auto m = std::make_shared<u64>(2);
    auto x = std::make_shared<u64>(0);
    sub->add_option("--n", *n)->required()->check(CLI::PositiveNumber);
    sub->add_option("--m", *m)->required()->check(CLI::PositiveNumber);
    sub->add_option("--x", *x, "also report the counting difference at x");
    sub->callback([&, n, m, x] {
      auto& it = session.open();
      const auto tail = it.tail_intersection(*n, *m);
      tp::KvRecord kv;
      kv.emplace_back("n", tp::fmt_u64(*n));
      kv.emplace_back("m", tp::fmt_u64(*m));
      kv.emplace_back("relation", tail.contained ? "contained" : "disjoint");
      if (tail.contained) kv.emplace_back("k", tp::fmt_u64(tail.k));
      if (*x > 0) {
        const auto diff = it.counting_difference(*n, *m, *x);
        kv.emplace_back("x", tp::fmt_u64(*x));
        kv.emplace_back("j0", tp::fmt_u64(diff.j0));
        kv.emplace_back("difference", std::to_string(diff.difference));
        kv.emplace_back("within_theorem", diff.within_theorem ? "true" : "false");
        kv.emplace_back("precondition_ok", diff.precondition_ok ? "true" : "false");
      }
      emit_record(cfg.format, kv);
    });
  }

  // --- verify ---------------------------------------------------------------------
  {
    auto* verify = app.add_subcommand("verify", "inequality sweeps; exit 1 on any violation");
    verify->require_subcommand(1);

    {
      auto* sub = verify->add_subcommand("rosser", "n log n <= p_n <= n(log n + log log n)");
      auto n_max = std::make_shared<u64>(1'000'000);
      sub->add_option("--n-max", *n_max)->capture_default_str()->check(CLI::PositiveNumber);
      sub->callback([&, n_max] {
        const auto report =
            tp::check_rosser(session.open().table(), *n_max, cfg.threads);
        emit_record(cfg.format, tp::to_kv(report));
        exit_code = report_exit({&report});
      });
    }
    {
      auto* sub = verify->add_subcommand("tower-lower",
                                         "column lower bounds (power and product forms)");
      auto n = std::make_shared<u64>(1);
      auto k = std::make_shared<std::int64_t>(-1);
      auto j_max = std::make_shared<u64>(0);
      sub->add_option("--n", *n)->required()->check(CLI::PositiveNumber);
      sub->add_option("--k", *k, "anchor depth; omit to sweep all anchors");
      sub->add_option("--j-max", *j_max, "0 = as far as the ceiling allows");
      sub->callback([&, n, k, j_max] {
        auto& it = session.open();
        const auto reports =
            *k < 0 ? tp::check_tower_lower_all(it, *n, *j_max)
                   : tp::check_tower_lower_bounds(it, *n, static_cast<u64>(*k), *j_max);
        emit_record(cfg.format, tp::to_kv(reports.power));
        emit_record(cfg.format, tp::to_kv(reports.product));
        exit_code = report_exit({&reports.power, &reports.product});
      });
    }
    {
      auto* sub = verify->add_subcommand("tower-count", "column count upper bound");
      auto n = std::make_shared<u64>(1);
      auto k = std::make_shared<u64>(2);
      auto samples = std::make_shared<std::size_t>(50);
      auto x_hi = std::make_shared<u64>(0);
      sub->add_option("--n", *n)->required()->check(CLI::PositiveNumber);
      sub->add_option("--k", *k)->required()->check(CLI::PositiveNumber);
      sub->add_option("--samples", *samples)->capture_default_str();
      sub->add_option("--x-hi", *x_hi, "0 = ceiling");
      sub->callback([&, n, k, samples, x_hi] {
        auto& it = session.open();
        const u64 anchor = it.value(*n, *k);
        const u64 hi = *x_hi == 0 ? cfg.ceiling : *x_hi;
        const auto xs = geometric_samples(anchor, hi, *samples);
        const auto report = tp::check_tower_count_upper(it, *n, *k, xs);
        emit_record(cfg.format, tp::to_kv(report));
        exit_code = report_exit({&report});
      });
    }
    {
      auto* sub = verify->add_subcommand(
          "tower-upper", "threshold-certified column upper bounds");
      auto n = std::make_shared<u64>(1);
      auto l_max = std::make_shared<u64>(1'000'000);
      auto alpha = std::make_shared<double>(1.5);
      auto j_max = std::make_shared<u64>(0);
      sub->add_option("--n", *n)->required()->check(CLI::PositiveNumber);
      sub->add_option("--l-max", *l_max)->capture_default_str();
      sub->add_option("--alpha", *alpha)->capture_default_str();
      sub->add_option("--j-max", *j_max, "0 = as far as the ceiling allows");
      sub->callback([&, n, l_max, alpha, j_max] {
        auto& it = session.open();
        const auto search = tp::find_k0_tower(it, *n, *l_max);
        if (!search.certificate) {
          std::cerr << "no threshold certificate: " << search.diagnostics << '\n';
          exit_code = 3;
          return;
        }
        const auto reports =
            tp::check_tower_upper_main(it, *n, *search.certificate, *j_max, *alpha);
        emit_record(cfg.format, tp::to_kv(reports.certificate));
        emit_record(cfg.format, tp::to_kv(reports.superlog));
        emit_record(cfg.format, tp::to_kv(reports.product));
        emit_record(cfg.format, tp::to_kv(reports.power));
        exit_code = report_exit({&reports.superlog, &reports.product, &reports.power});
      });
    }
    {
      auto* sub = verify->add_subcommand("diag", "diagonal bounds bundle");
      auto alpha = std::make_shared<double>(1.5);
      auto l_max = std::make_shared<u64>(1'000'000);
      auto j_max = std::make_shared<u64>(0);
      auto samples = std::make_shared<std::size_t>(8);
      sub->add_option("--alpha", *alpha)->capture_default_str();
      sub->add_option("--l-max", *l_max)->capture_default_str();
      sub->add_option("--j-max", *j_max, "0 = as far as the ceiling allows");
      sub->add_option("--samples", *samples, "count-bound sample points")
          ->capture_default_str();
      sub->callback([&, alpha, l_max, j_max, samples] {
        auto& it = session.open();
        const auto xs = geometric_samples(2, cfg.ceiling, *samples);
        const auto bundle = tp::check_diagonal_bounds(it, *j_max, *alpha, *l_max, xs);
        if (bundle.k0.certificate)
          emit_record(cfg.format, tp::to_kv(*bundle.k0.certificate));
        else
          std::cerr << "no diagonal threshold certificate: " << bundle.k0.diagnostics
                    << '\n';
        for (const auto* part : bundle.parts()) emit_record(cfg.format, tp::to_kv(*part));
        exit_code = bundle.all_passed() ? (bundle.k0.certificate ? 0 : 3) : 1;
      });
    }
  }

  // --- k0 ----------------------------------------------------------------------
  {
    auto* sub = app.add_subcommand("k0", "threshold certificate search");
    auto sel = std::make_shared<SelectorOpts>();
    auto l_max = std::make_shared<u64>(1'000'000);
    sel->attach(sub, /*with_nested=*/false);
    sub->add_option("--l-max", *l_max)->capture_default_str();
    sub->callback([&, sel, l_max] {
      auto& it = session.open();
      const auto selector = sel->resolve();
      const auto search = selector.kind == tp::SetKind::Tower
                              ? tp::find_k0_tower(it, selector.param, *l_max)
                              : tp::find_k0_diagonal(it, *l_max);
      if (!search.certificate) {
        std::cerr << "no certificate: " << search.diagnostics << '\n';
        exit_code = 3;
        return;
      }
      emit_record(cfg.format, tp::to_kv(*search.certificate));
    });
  }

  // --- series / tail-bound --------------------------------------------------------
  {
    auto* sub = app.add_subcommand("series", "partial sums with tail brackets");
    auto sel = std::make_shared<SelectorOpts>();
    auto alpha = std::make_shared<double>(1.0);
    auto cutoffs = std::make_shared<std::vector<u64>>();
    sel->attach(sub);
    sub->add_option("--alpha", *alpha)->capture_default_str();
    sub->add_option("--cutoff,--cutoffs", *cutoffs, "one or more cutoffs")
        ->required()
        ->delimiter(',');
    sub->callback([&, sel, alpha, cutoffs] {
      auto& it = session.open();
      const auto selector = sel->resolve();
      std::vector<std::vector<std::string>> rows;
      for (u64 cutoff : *cutoffs) {
        const auto account = tp::partial_sum(it, selector, *alpha, cutoff);
        rows.push_back({account.family.describe(), tp::fmt_double(account.alpha),
                        tp::fmt_u64(account.cutoff_x), tp::fmt_double(account.partial_sum),
                        account.tail_upper ? tp::fmt_double(*account.tail_upper) : "unknown",
                        account.tail_upper
                            ? tp::fmt_double(account.partial_sum + *account.tail_upper)
                            : "unknown",
                        tp::fmt_u64(account.terms_used)});
      }
      emit_table(cfg.format,
                 {"family", "alpha", "cutoff", "partial_sum", "tail_upper", "bracket_hi",
                  "terms"},
                 rows);
    });
  }
  {
    auto* sub = app.add_subcommand("tail-bound", "tail bracket at a given depth");
    auto sel = std::make_shared<SelectorOpts>();
    auto alpha = std::make_shared<double>(1.0);
    auto k = std::make_shared<u64>(2);
    sel->attach(sub, /*with_nested=*/false);
    sub->add_option("--alpha", *alpha)->capture_default_str();
    sub->add_option("--k", *k, "depth of the first excluded member (>= 2)")->required();
    sub->callback([&, sel, alpha, k] {
      auto& it = session.open();
      const auto selector = sel->resolve();
      const double bound = selector.kind == tp::SetKind::Tower
                               ? tp::tower_tail_bound(it, selector.param, *alpha, *k)
                               : tp::diagonal_tail_bound(it, *alpha, *k);
      emit_scalar(cfg.format, "tail_upper", tp::fmt_double(bound));
    });
  }

  // --- rho -------------------------------------------------------------------------
  {
    auto* sub = app.add_subcommand("rho", "convergence exponent estimate");
    auto sel = std::make_shared<SelectorOpts>();
    auto n_max = std::make_shared<u64>(1'000'000);
    sel->attach(sub);
    sub->add_option("--n-max", *n_max, "largest row index / step")->capture_default_str();
    sub->callback([&, sel, n_max] {
      const auto est = tp::exponent_estimate(session.open(), sel->resolve(), *n_max);
      tp::KvRecord kv;
      kv.emplace_back("family", est.family.describe());
      kv.emplace_back("n_max", tp::fmt_u64(est.sample_n_max));
      kv.emplace_back("estimate", tp::fmt_double(est.estimate));
      kv.emplace_back("samples", tp::fmt_u64(est.samples.size()));
      emit_record(cfg.format, kv);
    });
  }

  // --- trace --------------------------------------------------------------------
  {
    auto* trace = app.add_subcommand("trace", "ratio diagnostics for the limit claims");
    trace->require_subcommand(1);
    {
      auto* sub = trace->add_subcommand("t1", "k-fold iterate growth along rows");
      auto k = std::make_shared<u64>(1);
      auto n_hi = std::make_shared<u64>(1'000'000);
      auto samples = std::make_shared<std::size_t>(12);
      sub->add_option("--k", *k)->required();
      sub->add_option("--n-hi", *n_hi)->capture_default_str();
      sub->add_option("--samples", *samples)->capture_default_str();
      sub->callback([&, k, n_hi, samples] {
        const auto ns = geometric_samples(2, *n_hi, *samples);
        const auto traces = tp::trace_nested_growth(session.open(), *k, ns);
        emit_traces(cfg.format,
                    {&traces.value_ratio, &traces.successor_ratio, &traces.log_ratio});
      });
    }
    {
      auto* sub = trace->add_subcommand("h", "normalized nested counting function");
      auto k = std::make_shared<u64>(1);
      auto x_hi = std::make_shared<u64>(0);
      auto samples = std::make_shared<std::size_t>(10);  // ratio 10 up to 1e10
      sub->add_option("--k", *k)->required();
      sub->add_option("--x-hi", *x_hi, "0 = ceiling");
      sub->add_option("--samples", *samples)->capture_default_str();
      sub->callback([&, k, x_hi, samples] {
        const u64 hi = *x_hi == 0 ? cfg.ceiling : *x_hi;
        const auto xs = geometric_samples(10, hi, *samples);
        const auto t = tp::trace_nested_count_ratio(session.open(), *k, xs);
        emit_traces(cfg.format, {&t});
      });
    }
    {
      auto* sub = trace->add_subcommand("t4", "single-step growth along a column");
      auto n = std::make_shared<u64>(1);
      auto k_max = std::make_shared<u64>(10);
      sub->add_option("--n", *n)->required()->check(CLI::PositiveNumber);
      sub->add_option("--k-max", *k_max)->capture_default_str();
      sub->callback([&, n, k_max] {
        const auto t = tp::trace_tower_step_ratio(session.open(), *n, *k_max);
        emit_traces(cfg.format, {&t});
      });
    }
    {
      auto* sub = trace->add_subcommand("c7", "log growth along a row");
      auto n = std::make_shared<u64>(1);
      auto j_max = std::make_shared<u64>(12);
      sub->add_option("--n", *n)->required()->check(CLI::PositiveNumber);
      sub->add_option("--j-max", *j_max)->capture_default_str();
      sub->callback([&, n, j_max] {
        const auto t = tp::trace_log_growth(session.open(), *n, *j_max, false);
        emit_traces(cfg.format, {&t});
      });
    }
    {
      auto* sub = trace->add_subcommand("c8", "log growth along the diagonal");
      auto j_max = std::make_shared<u64>(8);
      sub->add_option("--j-max", *j_max)->capture_default_str();
      sub->callback([&, j_max] {
        const auto t = tp::trace_log_growth(session.open(), 1, *j_max, true);
        emit_traces(cfg.format, {&t});
      });
    }
    {
      auto* sub = trace->add_subcommand("t13", "tower count over diagonal count");
      auto n = std::make_shared<u64>(1);
      auto x_hi = std::make_shared<u64>(0);
      auto samples = std::make_shared<std::size_t>(8);
      sub->add_option("--n", *n)->required()->check(CLI::PositiveNumber);
      sub->add_option("--x-hi", *x_hi, "0 = ceiling");
      sub->add_option("--samples", *samples)->capture_default_str();
      sub->callback([&, n, x_hi, samples] {
        auto& it = session.open();
        const u64 hi = *x_hi == 0 ? cfg.ceiling : *x_hi;
        const auto xs = geometric_samples(it.value(*n, *n), hi, *samples);
        const auto t = tp::trace_tower_vs_diagonal_counts(it, *n, xs);
        emit_traces(cfg.format, {&t});
      });
    }
  }

  // --- experiment ------------------------------------------------------------------
  {
    auto* experiment = app.add_subcommand("experiment", "open-question data, never verdicts");
    experiment->require_subcommand(1);
    {
      auto* sub = experiment->add_subcommand("q1", "neighbor-over-diagonal ratios");
      auto k_max = std::make_shared<u64>(9);
      sub->add_option("--k-max", *k_max)->capture_default_str();
      sub->callback([&, k_max] {
        const auto t = tp::trace_diagonal_neighbor_ratio(session.open(), *k_max);
        emit_traces(cfg.format, {&t});
      });
    }
    {
      auto* sub = experiment->add_subcommand("hypothesis", "row-over-diagonal ratios");
      auto n = std::make_shared<u64>(1);
      auto k_max = std::make_shared<u64>(9);
      sub->add_option("--n", *n)->required()->check(CLI::PositiveNumber);
      sub->add_option("--k-max", *k_max)->capture_default_str();
      sub->callback([&, n, k_max] {
        const auto t = tp::trace_row_vs_diagonal(session.open(), *n, *k_max);
        emit_traces(cfg.format, {&t});
      });
    }
    {
      auto* sub = experiment->add_subcommand("expfit",
                                             "least squares for the exp-count model");
      auto sel = std::make_shared<SelectorOpts>();
      auto x_lo = std::make_shared<u64>(1'000);
      auto x_hi = std::make_shared<u64>(0);
      auto samples = std::make_shared<std::size_t>(7);
      sel->attach(sub, /*with_nested=*/false);
      sub->add_option("--x-lo", *x_lo)->capture_default_str();
      sub->add_option("--x-hi", *x_hi, "0 = ceiling");
      sub->add_option("--samples", *samples)->capture_default_str();
      sub->callback([&, sel, x_lo, x_hi, samples] {
        const u64 hi = *x_hi == 0 ? cfg.ceiling : *x_hi;
        const auto xs = geometric_samples(*x_lo, hi, *samples);
        const auto fit = tp::fit_exp_count(session.open(), sel->resolve(), xs);
        emit_record(cfg.format, tp::to_kv(fit));
      });
    }
  }

  // --- ratio ---------------------------------------------------------------------
  {
    auto* ratio = app.add_subcommand("ratio", "quotient-set witnesses and isolation");
    ratio->require_subcommand(1);
    {
      auto* sub = ratio->add_subcommand("witness", "best quotient near a target");
      auto k = std::make_shared<u64>(1);
      auto target = std::make_shared<double>(1.0);
      auto epsilon = std::make_shared<double>(1e-3);
      auto bound = std::make_shared<u64>(1'000'000);
      sub->add_option("--nested", *k, "nested family depth")->required();
      sub->add_option("--target", *target)->required();
      sub->add_option("--epsilon", *epsilon)->capture_default_str();
      sub->add_option("--bound", *bound)->capture_default_str();
      sub->callback([&, k, target, epsilon, bound] {
        const auto witness = tp::find_ratio_witness(session.open(), *k, *target, *epsilon,
                                                    *bound, cfg.threads);
        if (cfg.format == Format::Plain) {
          std::cout << tp::fmt_double(witness.target) << ' ' << witness.a << ' '
                    << witness.b << ' ' << tp::fmt_double(witness.achieved_error) << '\n';
        } else {
          emit_record(cfg.format, tp::to_kv(witness));
        }
        if (!witness.sufficient)
          std::cerr << "note: best pair misses epsilon (insufficient)\n";
      });
    }
    {
      auto* sub = ratio->add_subcommand("isolate", "per-step isolation certificate");
      auto sel = std::make_shared<SelectorOpts>();
      auto j_max = std::make_shared<u64>(8);
      sel->attach(sub, /*with_nested=*/false);
      sub->add_option("--j-max", *j_max)->capture_default_str();
      sub->callback([&, sel, j_max] {
        const auto cert =
            tp::isolation_certificate(session.open(), sel->resolve(), *j_max);
        std::vector<std::vector<std::string>> rows;
        for (const auto& step : cert.steps)
          rows.push_back({tp::fmt_u64(step.j), tp::fmt_u64(step.value),
                          tp::fmt_u64(step.next), tp::fmt_double(step.ratio),
                          tp::fmt_double(step.log_value), step.holds ? "true" : "false"});
        emit_table(cfg.format, {"j", "value", "next", "ratio", "log_value", "holds"},
                   rows);
        std::cerr << "ratio_floor=" << tp::fmt_double(cert.consecutive_ratio_floor)
                  << " floor_from_j2=" << tp::fmt_double(cert.floor_from_second_step)
                  << " increasing=" << (cert.ratios_increasing ? "true" : "false")
                  << (cert.truncated ? " (truncated)" : "") << '\n';
        exit_code = cert.all_hold ? 0 : 1;
      });
    }
    {
      auto* sub = ratio->add_subcommand("gaps", "raw consecutive-ratio data");
      auto sel = std::make_shared<SelectorOpts>();
      auto j_max = std::make_shared<u64>(8);
      sel->attach(sub, /*with_nested=*/false);
      sub->add_option("--j-max", *j_max)->capture_default_str();
      sub->callback([&, sel, j_max] {
        const auto gaps = tp::ratio_gap_scan(session.open(), sel->resolve(), *j_max);
        std::vector<std::vector<std::string>> rows;
        for (const auto& [j, r] : gaps)
          rows.push_back({tp::fmt_u64(j), tp::fmt_double(r)});
        emit_table(cfg.format, {"j", "ratio"}, rows);
      });
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const tp::ceiling_error& e) {
    std::cerr << "range error: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return exit_code;
}
