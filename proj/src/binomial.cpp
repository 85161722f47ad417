#include "gwbp/binomial.hpp"

#include "gwbp/numeric.hpp"

#include <algorithm>
#include <cmath>

namespace gwbp {

namespace {
constexpr std::int64_t kLogSpaceAbove = 500;
}

double binomial_pmf(std::int64_t n, double p, double q, std::int64_t i) {
  if (i < 0 || i > n) return 0.0;
  if (p <= 0.0) return i == 0 ? 1.0 : 0.0;
  if (q <= 0.0) return i == n ? 1.0 : 0.0;
  if (n <= kLogSpaceAbove) {
    return choose(n, i) * std::pow(p, static_cast<double>(i)) *
           std::pow(q, static_cast<double>(n - i));
  }
  double lg = log_choose(n, i) + static_cast<double>(i) * std::log(p) +
              static_cast<double>(n - i) * std::log(q);
  return std::exp(lg);
}

double binomial_lower_tail(std::int64_t n, double p, double q, std::int64_t m) {
  if (m < 0) return 0.0;
  if (m >= n) return 1.0;
  CompensatedSum s;
  for (std::int64_t i = 0; i <= m; ++i) s.add(binomial_pmf(n, p, q, i));
  return std::min(1.0, s.value());
}

}  // namespace gwbp
