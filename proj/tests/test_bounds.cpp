#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "towerprimes/bounds.hpp"

using namespace towerprimes;

namespace {
IteratedPrimes& shared() {
  static PrimeTable table({.value_ceiling = 1'000'000'000});
  static IteratedPrimes it(table);
  return it;
}
}  // namespace

TEST_CASE("report bookkeeping") {
  BoundReport r("demo");
  r.check_lower("a", 31.0, 26.376848);
  CHECK(r.passed);
  CHECK(r.min_slack == doctest::Approx(31.0 / 26.376848));
  r.check_upper("b", 10.0, std::numeric_limits<double>::infinity());
  CHECK(r.inf_passes == 1);
  CHECK(r.passed);
  r.check_upper("c", 11.0, 10.0);
  CHECK_FALSE(r.passed);
  REQUIRE(r.first_violation.has_value());
  CHECK(r.first_violation->site == "c");

  BoundReport other("demo");
  other.check_lower("d", 5.0, 1.0);
  other.check_upper("e", 2.0, 1.0);
  r.merge(other);
  CHECK(r.first_violation->site == "c");  // merge keeps the earlier violation
  CHECK(r.cells_checked == 5);
}

TEST_CASE("comparison guard tolerates equality") {
  BoundReport r("equality");
  r.check_lower("x", 2.0, 2.0);
  r.check_upper("x", 2.0, 2.0);
  CHECK(r.passed);
  CHECK(r.min_slack == doctest::Approx(1.0));
}

TEST_CASE("rosser sweep") {
  auto& it = shared();
  {
    const auto r = check_rosser(it.table(), 1);
    CHECK(r.passed);  // p_1 = 2 against the vacuous bound log 1 = 0
  }
  {
    const auto r = check_rosser(it.table(), 6);
    CHECK(r.passed);  // includes p_6 = 13 <= 6(log 6 + log log 6) ~ 14.25
  }
  {
    const auto r = check_rosser(it.table(), 100'000);
    CHECK(r.passed);
    CHECK(r.cells_checked == 100'000 + (100'000 - 5));
    CHECK(r.min_slack > 1.0);
  }
}

TEST_CASE("rosser sweep is deterministic across thread counts") {
  auto& it = shared();
  const auto one = check_rosser(it.table(), 20'000, 1);
  const auto four = check_rosser(it.table(), 20'000, 4);
  CHECK(one.passed == four.passed);
  CHECK(one.cells_checked == four.cells_checked);
  CHECK(one.min_slack == four.min_slack);
  CHECK(one.min_slack_site == four.min_slack_site);
}

TEST_CASE("column lower bounds") {
  auto& it = shared();
  {
    const auto r = check_tower_lower_bounds(it, 1, 4, 5);
    CHECK(r.power.passed);
    CHECK(r.product.passed);
    // the j = k cell compares the anchor with itself, so the minimum slack is
    // exactly one and sits there; the j = 5 cell is 31 against 11 log 11
    CHECK(r.power.min_slack == doctest::Approx(1.0));
    CHECK(r.power.min_slack_site == "n=1 k=4 j=4");
    CHECK(static_cast<double>(it.value(1, 5)) / (11.0 * std::log(11.0)) ==
          doctest::Approx(1.17527).epsilon(1e-4));
  }
  {
    // degenerate j = k: bound equals the value itself
    const auto r = check_tower_lower_bounds(it, 1, 4, 4);
    CHECK(r.power.passed);
    CHECK(r.power.min_slack == doctest::Approx(1.0));
  }
  {
    const auto r = check_tower_lower_bounds(it, 3, 1, 4);
    CHECK(r.power.passed);
    CHECK(r.product.passed);
  }
  // product form needs the anchor at 3 or above
  CHECK_THROWS_AS(check_tower_lower_bounds(it, 1, 1, 5), std::domain_error);
  {
    const auto r = check_tower_lower_all(it, 1, 8);
    CHECK(r.power.passed);
    CHECK(r.product.passed);
    CHECK(r.product.skipped.size() == 2);  // anchors 1 (k=0) and 2 (k=1)
  }
}

TEST_CASE("lower-bound slack is smallest at the first step") {
  auto& it = shared();
  // power form only: the depth-1 anchor value is 2, below the product guard
  const auto r = check_tower_lower_bounds(it, 1, 1, 8, /*include_product=*/false);
  CHECK(r.power.passed);
  CHECK(r.power.min_slack_site == "n=1 k=1 j=1");
  CHECK(r.power.min_slack == doctest::Approx(1.0));
  CHECK(r.product.cells_checked == 0);
}

TEST_CASE("column count upper bound") {
  auto& it = shared();
  {
    // at x equal to the anchor the bound is exactly k
    const std::vector<u64> xs{3};
    const auto r = check_tower_count_upper(it, 1, 2, xs);
    CHECK(r.passed);
    CHECK(r.min_slack == doctest::Approx(1.0));
  }
  {
    const std::vector<u64> xs{11, 1000, 1'000'000};
    CHECK(check_tower_count_upper(it, 1, 4, xs).passed);
  }
  {
    const std::vector<u64> xs{100'000'000};
    CHECK(check_tower_count_upper(it, 2, 3, xs).passed);
  }
  const std::vector<u64> xs{10};
  CHECK_THROWS_AS(check_tower_count_upper(it, 1, 1, xs), std::domain_error);
}

TEST_CASE("side conditions at the value 11 anchor") {
  const double t = std::log(11.0);
  const auto base = tower_side_base(t);
  CHECK_FALSE(base.holds);
  CHECK(base.rhs == doctest::Approx(1.402).epsilon(0.002));
  const auto step = tower_side_step(t, 2);
  CHECK_FALSE(step.holds);
  CHECK(step.lhs == doctest::Approx(7.2212).epsilon(0.002));
  CHECK(step.rhs == doctest::Approx(1.8337).epsilon(0.002));
}

TEST_CASE("step condition at width 2 is impossible for every anchor") {
  // lhs >= 2 log p while rhs = (log p)^(log 2) < log p whenever log p >= 1
  for (double p : {3.0, 11.0, 709.0, 1e6, 1e9, 1e15, 1e30})
    CHECK_FALSE(tower_side_step(std::log(p), 2).holds);
}

TEST_CASE("threshold search stamps a maximal suffix of step widths") {
  auto& it = shared();
  const auto search = find_k0_tower(it, 1, 1'000'000);
  REQUIRE(search.certificate.has_value());
  const auto& cert = *search.certificate;
  CHECK(cert.k0 > 4);  // the value-11 anchor fails both side conditions
  CHECK(cert.k0 == search.k_first_base);
  CHECK(cert.l_lo > 2);
  CHECK(cert.l_lo <= cert.l_hi);
  CHECK(cert.l_hi == 1'000'000);
  CHECK(cert.anchor_value == it.value(1, cert.k0));

  // stamped range is genuinely verified, and its left edge is sharp
  const double t = std::log(static_cast<double>(cert.anchor_value));
  CHECK(tower_side_base(t).holds);
  CHECK_FALSE(tower_side_step(t, cert.l_lo - 1).holds);
  for (u64 l : {cert.l_lo, cert.l_lo + 1, u64{1000}, u64{1'000'000}})
    CHECK(tower_side_step(t, l).holds);
}

TEST_CASE("side conditions stay valid at deeper anchors") {
  auto& it = shared();
  const auto search = find_k0_tower(it, 1, 100'000);
  REQUIRE(search.certificate.has_value());
  const auto& cert = *search.certificate;
  const u64 deepest = it.reachable_depth(1);
  for (u64 k = cert.k0; k <= deepest; ++k) {
    const double t = std::log(static_cast<double>(it.value(1, k)));
    CHECK(tower_side_base(t).holds);
    for (u64 l : {cert.l_lo, u64{100}, u64{100'000}}) {
      CAPTURE(k);
      CAPTURE(l);
      CHECK(tower_side_step(t, l).holds);
    }
  }
}

TEST_CASE("threshold search exhausts below a tiny ceiling") {
  PrimeTable table({.value_ceiling = 500});
  IteratedPrimes it(table);
  const auto search = find_k0_tower(it, 1, 1000);
  CHECK_FALSE(search.certificate.has_value());
  CHECK(search.k_first_base == 0);
  CHECK_FALSE(search.diagnostics.empty());
}

TEST_CASE("power-bound gaps follow the dominance rule") {
  // alpha = 1.5, column factor: first derivable gap is 5
  CHECK(power_gap_derivable(0, 1.5, 1.0));
  CHECK_FALSE(power_gap_derivable(1, 1.5, 1.0));
  CHECK_FALSE(power_gap_derivable(4, 1.5, 1.0));
  CHECK(power_gap_derivable(5, 1.5, 1.0));
  CHECK(power_gap_derivable(6, 1.5, 1.0));
  // diagonal factor 2 pushes the first derivable gap to 79
  CHECK_FALSE(power_gap_derivable(78, 1.5, 2.0));
  CHECK(power_gap_derivable(79, 1.5, 2.0));
}

TEST_CASE("certified column upper bounds pass") {
  auto& it = shared();
  const auto search = find_k0_tower(it, 1, 1'000'000);
  REQUIRE(search.certificate.has_value());
  const auto reports = check_tower_upper_main(it, 1, *search.certificate, 0, 1.5);
  CHECK(reports.superlog.passed);
  CHECK(reports.product.passed);
  CHECK(reports.power.passed);
  CHECK(reports.power.skipped.size() > 0);  // small gaps listed, not asserted
  CHECK(reports.certificate.verified_j_hi == it.reachable_depth(1));
  CHECK_THROWS_AS(check_tower_upper_main(it, 2, *search.certificate, 0, 1.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(check_tower_upper_main(it, 1, *search.certificate, 0, 1.0),
                  std::invalid_argument);
}

TEST_CASE("certified upper bounds pass on a second column") {
  auto& it = shared();
  const auto search = find_k0_tower(it, 2, 10'000);
  REQUIRE(search.certificate.has_value());
  const auto reports = check_tower_upper_main(it, 2, *search.certificate, 0, 1.5);
  CHECK(reports.superlog.passed);
  CHECK(reports.product.passed);
  CHECK(reports.power.passed);
}

TEST_CASE("diagonal bundle") {
  auto& it = shared();
  const std::vector<u64> xs{100, 100'000, 1'000'000'000};
  const auto bundle = check_diagonal_bounds(it, 0, 1.5, 100'000, xs);
  CHECK(bundle.lower_power.passed);
  CHECK(bundle.lower_product.passed);
  CHECK(bundle.shift.passed);
  CHECK(bundle.step.passed);
  CHECK(bundle.count_upper.passed);
  CHECK(bundle.upper_superlog.passed);
  CHECK(bundle.upper_product.passed);
  CHECK(bundle.upper_power.passed);
  CHECK(bundle.all_passed());
  REQUIRE(bundle.k0.certificate.has_value());
  CHECK(bundle.k0.certificate->k0 == 8);
  // at this ceiling the only certified pair is the trivial gap 0; wider gaps
  // sit below the derivable range for alpha = 1.5 and would be skipped
  CHECK(bundle.upper_power.cells_checked == 1);
}

TEST_CASE("diagonal shift and step anchors") {
  auto& it = shared();
  // value(4, 2) = 17 <= value(3, 3) = 31
  CHECK(it.value(4, 2) == 17);
  CHECK(it.value(3, 3) == 31);
  // step at j = 3: value(4, 4) <= 8 * 31 * log^2 31
  const double cap = 8.0 * 31.0 * std::log(31.0) * std::log(31.0);
  CHECK(static_cast<double>(it.value(4, 4)) <= cap);
  CHECK(it.value(4, 4) == 277);
}
