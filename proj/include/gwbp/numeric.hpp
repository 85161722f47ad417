#pragma once

// Shared numeric helpers: exact/float parameter values, harmonic numbers,
// compensated sums, power sums and a golden-section maximizer.

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

namespace gwbp {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;
using HighFloat = boost::multiprecision::cpp_bin_float_50;

// A parameter value that is exact when it came from an integer, a decimal
// literal or a p/q literal, and floating otherwise.
struct Number {
  double value = 0.0;
  std::optional<Rational> exact;

  static Number from_int(std::int64_t v);
  static Number from_rational(const Rational& q);
  static Number from_double(double v);

  bool is_integer() const;
  // Requires is_integer().
  std::int64_t as_int() const;
  HighFloat high() const;
  std::string to_string() const;
};

// Parses "12", "-3.25", "1/3" (exact) or "1e-3" (floating).
Number parse_number(const std::string& text);

// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double v) {
    double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

// H_n with H_0 = 0.
double harmonic(std::int64_t n);
HighFloat harmonic_high(std::int64_t n);
Rational harmonic_exact(std::int64_t n);

// log C(n, k).
double log_choose(std::int64_t n, std::int64_t k);
// C(n, k) in double; exact for moderately sized arguments.
double choose(std::int64_t n, std::int64_t k);

// sum_{k=a}^{m} k^s via direct summation for short ranges and
// Euler-Maclaurin otherwise.
long double power_sum(long double s, std::int64_t a, std::int64_t m);

struct GoldenResult {
  double x;
  double value;
  double width;
};

// Maximizes f on [a, b] until the bracket is narrower than tol.
GoldenResult golden_section_maximize(const std::function<double(double)>& f, double a, double b,
                                     double tol);

}  // namespace gwbp
