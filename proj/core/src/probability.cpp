#include "dlbsim/probability.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace dlbsim {

void SearchPopulation::validate() const {
  if (total < 0 || busy < 0) throw std::invalid_argument("population counts must be >= 0");
  if (busy > total) {
    throw std::invalid_argument("busy count " + std::to_string(busy) + " exceeds population " +
                                std::to_string(total));
  }
  if (tries < 1) throw std::invalid_argument("tries must be >= 1");
  if (tries > total) {
    throw std::invalid_argument("tries " + std::to_string(tries) +
                                " exceed population (targets are distinct)");
  }
}

namespace {

// log C(a, b); -inf when the coefficient is zero.
long double log_choose(long long a, long long b) {
  if (b < 0 || b > a) return -std::numeric_limits<long double>::infinity();
  if (b == 0 || b == a) return 0.0L;
  return std::lgamma(static_cast<long double>(a) + 1.0L) -
         std::lgamma(static_cast<long double>(b) + 1.0L) -
         std::lgamma(static_cast<long double>(a - b) + 1.0L);
}

}  // namespace

double hypergeometric_pmf(const SearchPopulation& pop, int k) {
  pop.validate();
  if (k < 0 || k > pop.tries) throw std::invalid_argument("k must lie in [0, n]");
  const long double log_p = log_choose(pop.total - pop.busy, pop.tries - k) +
                            log_choose(pop.busy, k) - log_choose(pop.total, pop.tries);
  if (std::isinf(log_p)) return 0.0;
  return static_cast<double>(std::exp(log_p));
}

double success_probability(const SearchPopulation& pop) {
  return 1.0 - hypergeometric_pmf(pop, 0);
}

double asymptotic_success(int tries) {
  if (tries < 1) throw std::invalid_argument("tries must be >= 1");
  return 1.0 - std::exp2(-static_cast<double>(tries));
}

std::vector<std::pair<int, double>> success_curve(long long total, long long busy, int n_max) {
  if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
  if (n_max > total) throw std::invalid_argument("n_max exceeds population");
  std::vector<std::pair<int, double>> curve;
  curve.reserve(static_cast<std::size_t>(n_max));
  for (int n = 1; n <= n_max; ++n) {
    curve.emplace_back(n, success_probability({total, busy, n}));
  }
  return curve;
}

}  // namespace dlbsim
