#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <random>
#include <vector>

#include "dlbsim/probability.hpp"

using namespace dlbsim;

namespace {

// Independent Monte Carlo oracle: draw `tries` distinct targets out of
// `total` (the first `busy` labeled busy) and count rounds with no hit.
double mc_success(long long total, long long busy, int tries, long long rounds,
                  std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<long long> pool(static_cast<std::size_t>(total));
  for (long long i = 0; i < total; ++i) pool[static_cast<std::size_t>(i)] = i;
  long long hits = 0;
  for (long long r = 0; r < rounds; ++r) {
    bool found = false;
    for (int i = 0; i < tries; ++i) {
      std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(i),
                                                      pool.size() - 1);
      std::swap(pool[static_cast<std::size_t>(i)], pool[pick(gen)]);
      if (pool[static_cast<std::size_t>(i)] < busy) found = true;
    }
    if (found) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(rounds);
}

}  // namespace

TEST_CASE("hypergeometric pmf matches exact binomial arithmetic") {
  CHECK(hypergeometric_pmf({10, 5, 5}, 0) == doctest::Approx(1.0 / 252.0).epsilon(1e-12));
  CHECK(hypergeometric_pmf({10, 0, 5}, 0) == doctest::Approx(1.0));   // failure certain
  CHECK(hypergeometric_pmf({10, 10, 3}, 3) == doctest::Approx(1.0));  // all busy
}

TEST_CASE("invalid populations are rejected") {
  CHECK_THROWS_AS(hypergeometric_pmf({10, 11, 3}, 0), std::invalid_argument);
  CHECK_THROWS_AS(hypergeometric_pmf({10, 5, 11}, 0), std::invalid_argument);
  CHECK_THROWS_AS(hypergeometric_pmf({10, 5, 0}, 0), std::invalid_argument);
  CHECK_THROWS_AS(hypergeometric_pmf({10, 5, 5}, 6), std::invalid_argument);
}

TEST_CASE("pmf sums to one over k") {
  std::mt19937_64 gen(41);
  for (int trial = 0; trial < 50; ++trial) {
    const long long total = 2 + static_cast<long long>(gen() % 199);
    const long long busy = static_cast<long long>(gen() % (total + 1));
    const int tries = 1 + static_cast<int>(gen() % total);
    double sum = 0;
    for (int k = 0; k <= tries; ++k) sum += hypergeometric_pmf({total, busy, tries}, k);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("success probability") {
  CHECK(success_probability({10, 5, 5}) == doctest::Approx(251.0 / 252.0).epsilon(1e-12));
  CHECK(success_probability({10, 0, 5}) == doctest::Approx(0.0));
  const double p100 = success_probability({100, 50, 5});
  CHECK(p100 > 0.96875);
  CHECK(p100 < 1.0);
}

TEST_CASE("success probability agrees with Monte Carlo sampling") {
  std::mt19937_64 gen(99);
  const long long rounds = 200000;
  for (int trial = 0; trial < 4; ++trial) {
    const long long total = 5 + static_cast<long long>(gen() % 96);
    const long long busy = static_cast<long long>(gen() % (total + 1));
    const int tries = 1 + static_cast<int>(gen() % std::min<long long>(total, 8));
    const double exact = success_probability({total, busy, tries});
    const double sampled = mc_success(total, busy, tries, rounds, gen());
    const double stderr_bound =
        3.0 * std::sqrt(std::max(exact * (1 - exact), 1e-9) / static_cast<double>(rounds));
    CHECK_MESSAGE(std::abs(sampled - exact) <= stderr_bound,
                  "P=", total, " K=", busy, " n=", tries, " exact=", exact,
                  " sampled=", sampled);
  }
}

TEST_CASE("asymptotic success is 1 - 2^-n") {
  CHECK(asymptotic_success(5) == doctest::Approx(0.96875).epsilon(1e-15));
  CHECK(asymptotic_success(1) == doctest::Approx(0.5));
  CHECK(asymptotic_success(10) == doctest::Approx(0.9990234375).epsilon(1e-15));
  CHECK_THROWS_AS(asymptotic_success(0), std::invalid_argument);
}

TEST_CASE("finite populations at K=P/2 exceed the asymptote and approach it") {
  const double limit = asymptotic_success(5);
  double prev = 1.0;
  for (long long p : {10LL, 100LL, 1000LL, 10000LL}) {
    const double v = success_probability({p, p / 2, 5});
    CHECK(v >= limit);
    CHECK(v <= prev);
    prev = v;
  }
  CHECK(prev - limit < 1e-3);
}

TEST_CASE("success curve") {
  SUBCASE("single try, 9 of 10 busy") {
    const auto curve = success_curve(10, 9, 1);
    REQUIRE(curve.size() == 1);
    CHECK(curve[0].first == 1);
    CHECK(curve[0].second == doctest::Approx(0.9).epsilon(1e-12));
  }
  SUBCASE("matches success_probability at the last entry") {
    const auto curve = success_curve(10, 5, 5);
    CHECK(curve.back().second == doctest::Approx(251.0 / 252.0).epsilon(1e-12));
  }
  SUBCASE("monotone nondecreasing in n") {
    std::mt19937_64 gen(7);
    for (int trial = 0; trial < 20; ++trial) {
      const long long total = 2 + static_cast<long long>(gen() % 150);
      const long long busy = static_cast<long long>(gen() % (total + 1));
      const auto curve = success_curve(total, busy, static_cast<int>(total));
      for (std::size_t i = 1; i < curve.size(); ++i) {
        CHECK(curve[i].second >= curve[i - 1].second - 1e-12);
      }
    }
  }
  SUBCASE("n_max above the population is rejected") {
    CHECK_THROWS_AS(success_curve(10, 5, 11), std::invalid_argument);
  }
}

TEST_CASE("large populations evaluate without overflow") {
  const double v = success_probability({100000, 50000, 5});
  CHECK(v == doctest::Approx(asymptotic_success(5)).epsilon(1e-4));
  CHECK(std::isfinite(hypergeometric_pmf({100000, 50000, 5}, 3)));
}
