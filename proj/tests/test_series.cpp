#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "towerprimes/series.hpp"

using namespace towerprimes;

namespace {
IteratedPrimes& shared() {
  static PrimeTable table({.value_ceiling = 1'000'000'000});
  static IteratedPrimes it(table);
  return it;
}
}  // namespace

TEST_CASE("partial sums against direct arithmetic") {
  auto& it = shared();
  {
    // 1/2 + 1/3
    const auto a = partial_sum(it, SetFamilySelector::tower(1), 1.0, 3);
    CHECK(a.partial_sum == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
    CHECK(a.terms_used == 2);
    REQUIRE(a.tail_upper.has_value());
  }
  {
    // 1/3 + 1/5 + 1/11 + 1/17 + 1/31
    const auto a = partial_sum(it, SetFamilySelector::nested(2), 1.0, 31);
    CHECK(a.partial_sum == doctest::Approx(0.7153240182).epsilon(1e-9));
    CHECK(a.terms_used == 5);
    CHECK_FALSE(a.tail_upper.has_value());  // no bracket for nested families
  }
  {
    // 2^-1/2 + 5^-1/2 + 31^-1/2
    const auto a = partial_sum(it, SetFamilySelector::diagonal(), 0.5, 31);
    CHECK(a.partial_sum == doctest::Approx(1.3339256787).epsilon(1e-9));
    CHECK(a.terms_used == 3);
  }
  CHECK_THROWS_AS(partial_sum(it, SetFamilySelector::tower(1), 0.0, 100),
                  std::invalid_argument);
}

TEST_CASE("partial sum equals the naive oracle sum") {
  auto& it = shared();
  const oracle::FlatSieve sieve(100'000);
  for (double alpha : {0.5, 1.0, 2.0}) {
    double expected = 0;
    for (u64 p : sieve.primes())
      expected += std::pow(static_cast<double>(p), -alpha);
    const auto got = partial_sum(it, SetFamilySelector::nested(1), alpha, 100'000);
    CHECK(got.partial_sum == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("tail bracket values") {
  auto& it = shared();
  // anchor value(1,2) = 3
  CHECK(tower_tail_bound(it, 1, 1.0, 2) ==
        doctest::Approx((1.0 / 3.0) * std::log(3.0) / (std::log(3.0) - 1.0))
            .epsilon(1e-12));
  CHECK(tower_tail_bound(it, 1, 1.0, 2) == doctest::Approx(3.71357).epsilon(1e-4));
  // anchor value(1,4) = 11
  CHECK(tower_tail_bound(it, 1, 1.0, 4) == doctest::Approx(0.155942).epsilon(1e-4));
  // alpha = 2 at the depth-2 anchor
  const double t2 = std::log(3.0) * std::log(3.0);
  CHECK(tower_tail_bound(it, 1, 2.0, 2) ==
        doctest::Approx((1.0 / 9.0) * t2 / (t2 - 1.0)).epsilon(1e-12));
  CHECK_THROWS_AS(tower_tail_bound(it, 1, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(diagonal_tail_bound(it, 1.0, 0), std::invalid_argument);
  CHECK(diagonal_tail_bound(it, 1.0, 2) ==
        doctest::Approx((1.0 / 5.0) * std::log(5.0) / (std::log(5.0) - 1.0))
            .epsilon(1e-12));
}

TEST_CASE("bracket really contains later partial sums") {
  auto& it = shared();
  for (double alpha : {0.5, 1.0}) {
    const auto early = partial_sum(it, SetFamilySelector::tower(1), alpha, 1'000);
    REQUIRE(early.tail_upper.has_value());
    const double hi = early.partial_sum + *early.tail_upper;
    for (u64 cutoff : {u64{10'000}, u64{1'000'000}, u64{900'000'000}}) {
      const auto later = partial_sum(it, SetFamilySelector::tower(1), alpha, cutoff);
      CHECK(later.partial_sum >= early.partial_sum);
      CHECK(later.partial_sum <= hi * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("term-subset monotonicity across depths") {
  auto& it = shared();
  for (u64 x : {u64{100}, u64{10'000}, u64{1'000'000}}) {
    const double s1 = partial_sum(it, SetFamilySelector::nested(1), 1.0, x).partial_sum;
    const double s2 = partial_sum(it, SetFamilySelector::nested(2), 1.0, x).partial_sum;
    const double s3 = partial_sum(it, SetFamilySelector::nested(3), 1.0, x).partial_sum;
    CHECK(s2 < s1);
    CHECK(s3 < s2);
  }
}

TEST_CASE("convergence probe: monotone in the cutoff, bounded for depth 2") {
  auto& it = shared();
  const std::vector<u64> cutoffs{1'000, 10'000, 100'000, 1'000'000, 10'000'000};
  const auto accounts = nested_convergence_probe(it, 2, 1.0, cutoffs);
  REQUIRE(accounts.size() == cutoffs.size());
  for (std::size_t i = 1; i < accounts.size(); ++i)
    CHECK(accounts[i].partial_sum >= accounts[i - 1].partial_sum);
  // frozen after a full run to 1e9: the depth-2 sum stays below 1
  CHECK(accounts.back().partial_sum < 1.0);
}

TEST_CASE("contraction ratio across depths, recorded as a diagnostic") {
  auto& it = shared();
  // the full-sum contraction constant is 1/log 3; at finite cutoffs only the
  // strict ordering is a theorem, so the observed ratio is data
  for (u64 k : {u64{2}, u64{3}}) {
    const double upper = partial_sum(it, SetFamilySelector::nested(k), 1.0, 10'000'000)
                             .partial_sum;
    const double lower =
        partial_sum(it, SetFamilySelector::nested(k + 1), 1.0, 10'000'000).partial_sum;
    const double contraction = lower / upper;
    CAPTURE(k);
    CAPTURE(contraction);
    CHECK(contraction > 0.0);
    CHECK(contraction < 1.0);
    MESSAGE("depth ", k, " -> ", k + 1, " contraction at 1e7: ", contraction);
  }
}

TEST_CASE("summation is deterministic") {
  auto& it = shared();
  const auto a = partial_sum(it, SetFamilySelector::nested(2), 1.0, 1'000'000);
  const auto b = partial_sum(it, SetFamilySelector::nested(2), 1.0, 1'000'000);
  CHECK(a.partial_sum == b.partial_sum);
}

TEST_CASE("exponent estimates") {
  auto& it = shared();
  {
    const auto est = exponent_estimate(it, SetFamilySelector::nested(0), 100'000);
    CHECK(est.estimate == doctest::Approx(1.0).epsilon(1e-12));
  }
  {
    const auto est = exponent_estimate(it, SetFamilySelector::nested(1), 1'000'000);
    CHECK(est.estimate > 0.8);
    CHECK(est.estimate < 1.0);
  }
  {
    const auto est = exponent_estimate(it, SetFamilySelector::tower(1), 12);
    CHECK(est.estimate <= 0.35);
    CHECK(est.estimate > 0.0);
  }
  {
    const auto est = exponent_estimate(it, SetFamilySelector::diagonal(), 8);
    CHECK(est.estimate < 0.5);
  }
  CHECK_THROWS_AS(exponent_estimate(it, SetFamilySelector::nested(1), 1),
                  std::invalid_argument);
}

TEST_CASE("estimates sit in the sanity window") {
  auto& it = shared();
  for (u64 k : {u64{0}, u64{1}, u64{2}, u64{3}}) {
    const auto est = exponent_estimate(it, SetFamilySelector::nested(k), 10'000);
    CHECK(est.estimate >= 0.0);
    CHECK(est.estimate <= 1.5);
  }
}
