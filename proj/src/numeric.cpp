#include "gwbp/numeric.hpp"

#include "gwbp/error.hpp"

#include <boost/math/constants/constants.hpp>

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>

namespace gwbp {

Number Number::from_int(std::int64_t v) {
  return Number{static_cast<double>(v), Rational(v)};
}

Number Number::from_rational(const Rational& q) {
  return Number{static_cast<double>(q), q};
}

Number Number::from_double(double v) { return Number{v, std::nullopt}; }

bool Number::is_integer() const {
  if (exact) return denominator(*exact) == 1;
  return std::isfinite(value) && std::floor(value) == value && std::abs(value) < 9.0e15;
}

std::int64_t Number::as_int() const {
  if (!is_integer()) throw_precondition("expected an integer, got " + to_string());
  if (exact) return static_cast<std::int64_t>(numerator(*exact));
  return static_cast<std::int64_t>(value);
}

HighFloat Number::high() const {
  if (exact) {
    return HighFloat(numerator(*exact)) / HighFloat(denominator(*exact));
  }
  return HighFloat(value);
}

std::string Number::to_string() const {
  if (exact) {
    if (denominator(*exact) == 1) return numerator(*exact).str();
    return numerator(*exact).str() + "/" + denominator(*exact).str();
  }
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

namespace {

bool all_digits(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

// Leading zeros are stripped: cpp_int reads "025" as octal.
BigInt parse_big(const std::string& s) {
  auto nz = s.find_first_not_of('0');
  return nz == std::string::npos ? BigInt(0) : BigInt(s.substr(nz));
}

}  // namespace

Number parse_number(const std::string& raw) {
  std::string text = raw;
  if (text.empty()) throw_parse("empty number");
  if (auto slash = text.find('/'); slash != std::string::npos) {
    std::string num = text.substr(0, slash);
    std::string den = text.substr(slash + 1);
    bool neg = !num.empty() && (num[0] == '-' || num[0] == '+');
    std::string digits = neg ? num.substr(1) : num;
    if (!all_digits(digits) || !all_digits(den)) throw_parse("malformed rational '" + raw + "'");
    BigInt d = parse_big(den);
    if (d == 0) throw_parse("zero denominator in '" + raw + "'");
    BigInt n = parse_big(digits);
    if (num[0] == '-') n = -n;
    return Number::from_rational(Rational(n, d));
  }
  std::string body = text;
  bool negative = false;
  if (body[0] == '-' || body[0] == '+') {
    negative = body[0] == '-';
    body = body.substr(1);
  }
  auto dot = body.find('.');
  std::string ip = dot == std::string::npos ? body : body.substr(0, dot);
  std::string fp = dot == std::string::npos ? "" : body.substr(dot + 1);
  bool plain = (ip.empty() || all_digits(ip)) && (fp.empty() || all_digits(fp)) &&
               !(ip.empty() && fp.empty());
  if (plain) {
    BigInt n = parse_big((ip.empty() ? "0" : ip) + fp);
    BigInt d = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(fp.size()));
    if (negative) n = -n;
    return Number::from_rational(Rational(n, d));
  }
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw_parse("malformed number '" + raw + "'");
  }
  return Number::from_double(v);
}

double harmonic(std::int64_t n) {
  if (n < 0) throw_precondition("harmonic number of negative index");
  if (n <= 64) {
    CompensatedSum s;
    for (std::int64_t i = n; i >= 1; --i) s.add(1.0 / static_cast<double>(i));
    return s.value();
  }
  long double x = static_cast<long double>(n);
  long double inv2 = 1.0L / (x * x);
  long double series = 1.0L / (2.0L * x) -
                       inv2 * (1.0L / 12.0L - inv2 * (1.0L / 120.0L - inv2 * (1.0L / 252.0L - inv2 / 240.0L)));
  return static_cast<double>(std::log(x) + static_cast<long double>(kEulerGamma) + series);
}

HighFloat harmonic_high(std::int64_t n) {
  if (n < 0) throw_precondition("harmonic number of negative index");
  if (n <= 4000) {
    HighFloat s = 0;
    for (std::int64_t i = n; i >= 1; --i) s += HighFloat(1) / i;
    return s;
  }
  // H_n = ln n + gamma + 1/(2n) - sum_k B_{2k}/(2k n^{2k}).
  static const std::array<std::pair<int, int>, 8> bern = {
      {{1, 6}, {-1, 30}, {1, 42}, {-1, 30}, {5, 66}, {-691, 2730}, {7, 6}, {-3617, 510}}};
  HighFloat x = n;
  HighFloat s = log(x) + boost::math::constants::euler<HighFloat>() + 1 / (2 * x);
  HighFloat inv2 = 1 / (x * x);
  HighFloat pw = inv2;
  for (std::size_t k = 0; k < bern.size(); ++k) {
    HighFloat b = HighFloat(bern[k].first) / bern[k].second;
    s -= b / (2 * static_cast<int>(k + 1)) * pw;
    pw *= inv2;
  }
  return s;
}

Rational harmonic_exact(std::int64_t n) {
  if (n < 0) throw_precondition("harmonic number of negative index");
  Rational s = 0;
  for (std::int64_t i = 1; i <= n; ++i) s += Rational(1, i);
  return s;
}

double choose(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (std::int64_t j = 0; j < k; ++j) {
    c = c * static_cast<double>(n - j) / static_cast<double>(j + 1);
  }
  return c;
}

double log_choose(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return -INFINITY;
  std::int64_t kk = std::min(k, n - k);
  if (kk <= 32) {
    double s = 0.0;
    for (std::int64_t j = 0; j < kk; ++j) {
      s += std::log(static_cast<double>(n - j) / static_cast<double>(j + 1));
    }
    return s;
  }
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

long double power_sum(long double s, std::int64_t a, std::int64_t m) {
  if (m < a) return 0.0L;
  if (a < 1) throw_precondition("power_sum requires a >= 1");
  constexpr std::int64_t kDirect = 2000;
  long double direct = 0.0L;
  std::int64_t k = a;
  for (; k <= m && (k < kDirect || m - k < 64); ++k) {
    direct += std::pow(static_cast<long double>(k), s);
  }
  if (k > m) return direct;

  // Euler-Maclaurin on [k, m].
  long double lo = static_cast<long double>(k);
  long double hi = static_cast<long double>(m);
  long double u = s + 1.0L;
  long double integral;
  long double lr = std::log(hi / lo);
  if (std::abs(u * lr) < 1e-12L) {
    integral = std::pow(lo, u) * lr * (1.0L + u * lr / 2.0L);
  } else {
    integral = std::pow(lo, u) * std::expm1(u * lr) / u;
  }
  long double sum = integral + (std::pow(lo, s) + std::pow(hi, s)) / 2.0L;
  static const long double bern[] = {1.0L / 6, -1.0L / 30, 1.0L / 42, -1.0L / 30, 5.0L / 66,
                                     -691.0L / 2730};
  long double fact = 1.0L;  // (2j)!
  long double falling = s;  // s (s-1) ... (s-2j+2)
  for (int j = 1; j <= 6; ++j) {
    fact *= static_cast<long double>((2 * j - 1) * (2 * j));
    int order = 2 * j - 1;
    long double dhi = falling * std::pow(hi, s - order);
    long double dlo = falling * std::pow(lo, s - order);
    sum += bern[j - 1] / fact * (dhi - dlo);
    falling *= (s - order) * (s - order - 1);
  }
  return direct + sum;
}

GoldenResult golden_section_maximize(const std::function<double(double)>& f, double a, double b,
                                     double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < 200 && (b - a) > tol; ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  if (fc >= fd) return {c, fc, b - a};
  return {d, fd, b - a};
}

}  // namespace gwbp
