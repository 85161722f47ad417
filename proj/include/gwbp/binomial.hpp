#pragma once

#include <cstdint>

namespace gwbp {

// P(Bin(n, p) <= m) where q = 1 - p is passed separately so callers can
// supply it without cancellation. Sums the m+1 lower terms, so it is
// intended for small m. Log-space terms for n > 500.
double binomial_lower_tail(std::int64_t n, double p, double q, std::int64_t m);

inline double binomial_lower_tail(std::int64_t n, double p, std::int64_t m) {
  return binomial_lower_tail(n, p, 1.0 - p, m);
}

// P(Bin(n, p) = i).
double binomial_pmf(std::int64_t n, double p, double q, std::int64_t i);

}  // namespace gwbp
