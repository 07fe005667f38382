#pragma once

#include <utility>
#include <vector>

namespace dlbsim {

// Population seen by one randomized partner search: P processes total, K of
// them busy, n tries per round (distinct targets, sampling without
// replacement).
struct SearchPopulation {
  long long total = 0;   // P
  long long busy = 0;    // K
  int tries = 0;         // n

  void validate() const;  // throws on K > P, n > P, negatives, n < 1
};

// P(k): probability that exactly k of the n tries hit a busy process.
// Hypergeometric pmf C(P-K, n-k) * C(K, k) / C(P, n), evaluated in the log
// domain (long double lgamma) so populations up to 1e5+ neither overflow nor
// lose the 1e-12 mass-sum accuracy the tests require.
double hypergeometric_pmf(const SearchPopulation& pop, int k);

// Probability that at least one try hits a busy process: 1 - P(0).
double success_probability(const SearchPopulation& pop);

// Large-P limit of the success probability at K = P/2: 1 - 2^-n.
double asymptotic_success(int tries);

// (n, success_probability) for n = 1..n_max at fixed P, K.
std::vector<std::pair<int, double>> success_curve(long long total, long long busy, int n_max);

}  // namespace dlbsim
