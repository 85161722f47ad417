#include "gwbp/dist.hpp"

#include "gwbp/error.hpp"

#include <boost/math/distributions/poisson.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace gwbp {

namespace detail {

struct DistData {
  DistributionSpec spec;
  std::int64_t smin = 1;
  std::optional<std::int64_t> smax;

  // Finite-support families other than pruned.
  std::vector<std::pair<std::int64_t, double>> atoms;
  std::vector<std::pair<std::int64_t, Rational>> exact_atoms;
  std::vector<double> tail_after;  // P(xi > atoms[i].k)

  // Shifted families.
  double lambda = 0.0;
  double q = 0.0;
  std::vector<double> tail_table;  // T(m), m = 0, 1, ...

  // Heavy-tail based families: weights (r0-1)/(k(k-1)) from r0.
  int r0 = 0;
  std::optional<PrunedParams> pruned;
  double extra_low = 0.0;   // alpha A at r0
  double extra_high = 0.0;  // (1-alpha) A at 2 r0 + 1
};

}  // namespace detail

using detail::DistData;

std::string family_name(Family f) {
  switch (f) {
    case Family::regular: return "regular";
    case Family::two_point: return "twopoint";
    case Family::shifted_poisson: return "poisson";
    case Family::shifted_geometric: return "geometric";
    case Family::heavy_tail: return "heavy";
    case Family::pruned: return "pruned";
    case Family::explicit_pmf: return "pmf";
  }
  return "?";
}

DistributionSpec DistributionSpec::regular(std::int64_t b) {
  DistributionSpec s;
  s.family = Family::regular;
  s.b = Number::from_int(b);
  return s;
}

DistributionSpec DistributionSpec::two_point(std::int64_t b, std::int64_t a) {
  return two_point(Number::from_int(b), a);
}

DistributionSpec DistributionSpec::two_point(Number b, std::int64_t a) {
  DistributionSpec s;
  s.family = Family::two_point;
  s.b = std::move(b);
  s.a = a;
  return s;
}

DistributionSpec DistributionSpec::shifted_poisson(Number b) {
  DistributionSpec s;
  s.family = Family::shifted_poisson;
  s.b = std::move(b);
  return s;
}

DistributionSpec DistributionSpec::shifted_geometric(Number b) {
  DistributionSpec s;
  s.family = Family::shifted_geometric;
  s.b = std::move(b);
  return s;
}

DistributionSpec DistributionSpec::heavy_tail(int r) {
  DistributionSpec s;
  s.family = Family::heavy_tail;
  s.r = r;
  return s;
}

DistributionSpec DistributionSpec::pruned(int r, Number b) {
  DistributionSpec s;
  s.family = Family::pruned;
  s.r = r;
  s.b = std::move(b);
  return s;
}

DistributionSpec DistributionSpec::explicit_pmf(std::vector<PmfEntry> entries) {
  DistributionSpec s;
  s.family = Family::explicit_pmf;
  s.pmf = std::move(entries);
  return s;
}

std::string DistributionSpec::to_string() const {
  std::string out = family_name(family) + ":";
  switch (family) {
    case Family::regular:
    case Family::shifted_poisson:
    case Family::shifted_geometric:
      out += "b=" + b.to_string();
      break;
    case Family::two_point:
      out += "b=" + b.to_string() + ",a=" + std::to_string(a);
      break;
    case Family::heavy_tail:
      out += "r=" + std::to_string(r);
      break;
    case Family::pruned:
      out += "r=" + std::to_string(r) + ",b=" + b.to_string();
      break;
    case Family::explicit_pmf:
      for (std::size_t i = 0; i < pmf.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(pmf[i].k) + "=" + pmf[i].probability.to_string();
      }
      break;
  }
  return out;
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  auto b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

std::int64_t parse_int_param(const std::string& key, const Number& n) {
  if (!n.is_integer()) throw_parse("parameter '" + key + "' must be an integer");
  return n.as_int();
}

}  // namespace

DistributionSpec parse_distribution_spec(std::string_view text) {
  std::string s = lower(text);
  auto colon = s.find(':');
  if (colon == std::string::npos) throw_parse("distribution spec needs 'family:params', got '" + s + "'");
  std::string fam = trim(s.substr(0, colon));
  std::string rest = s.substr(colon + 1);

  std::vector<std::pair<std::string, std::string>> params;
  std::size_t pos = 0;
  while (pos <= rest.size()) {
    auto comma = rest.find(',', pos);
    std::string item = trim(rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
    if (item.empty()) throw_parse("empty parameter in '" + s + "'");
    auto eq = item.find('=');
    if (eq == std::string::npos) throw_parse("parameter '" + item + "' needs key=value");
    params.emplace_back(trim(item.substr(0, eq)), trim(item.substr(eq + 1)));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }

  if (fam == "pmf" || fam == "explicit") {
    std::vector<PmfEntry> entries;
    for (auto& [k, v] : params) {
      Number key = parse_number(k);
      entries.push_back({parse_int_param("support point", key), parse_number(v)});
    }
    return DistributionSpec::explicit_pmf(std::move(entries));
  }

  std::map<std::string, Number> kv;
  for (auto& [k, v] : params) {
    if (kv.count(k)) throw_parse("duplicate parameter '" + k + "'");
    kv[k] = parse_number(v);
  }
  auto take = [&](const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw_parse("family '" + fam + "' requires parameter '" + key + "'");
    Number n = it->second;
    kv.erase(it);
    return n;
  };
  DistributionSpec spec;
  if (fam == "regular") {
    spec = DistributionSpec::regular(parse_int_param("b", take("b")));
  } else if (fam == "twopoint" || fam == "two_point") {
    Number b = take("b");
    spec = DistributionSpec::two_point(b, parse_int_param("a", take("a")));
  } else if (fam == "poisson" || fam == "shifted_poisson") {
    spec = DistributionSpec::shifted_poisson(take("b"));
  } else if (fam == "geometric" || fam == "shifted_geometric") {
    spec = DistributionSpec::shifted_geometric(take("b"));
  } else if (fam == "heavy" || fam == "heavy_tail") {
    spec = DistributionSpec::heavy_tail(static_cast<int>(parse_int_param("r", take("r"))));
  } else if (fam == "pruned") {
    int r = static_cast<int>(parse_int_param("r", take("r")));
    spec = DistributionSpec::pruned(r, take("b"));
  } else {
    throw_parse("unknown distribution family '" + fam + "'");
  }
  if (!kv.empty()) throw_parse("unexpected parameter '" + kv.begin()->first + "' for family '" + fam + "'");
  return spec;
}

OffspringDistribution::OffspringDistribution(std::shared_ptr<const DistData> data)
    : data_(std::move(data)) {}

const DistributionSpec& OffspringDistribution::spec() const { return data_->spec; }
Family OffspringDistribution::family() const { return data_->spec.family; }
std::int64_t OffspringDistribution::support_min() const { return data_->smin; }
std::optional<std::int64_t> OffspringDistribution::support_max() const { return data_->smax; }
const std::vector<std::pair<std::int64_t, double>>& OffspringDistribution::atoms() const {
  return data_->atoms;
}
bool OffspringDistribution::is_heavy_based() const { return data_->r0 > 0; }
const PrunedParams* OffspringDistribution::pruned() const {
  return data_->pruned ? &*data_->pruned : nullptr;
}

double OffspringDistribution::pmf(std::int64_t k) const {
  const DistData& d = *data_;
  if (k < d.smin || (d.smax && k > *d.smax)) return 0.0;
  switch (d.spec.family) {
    case Family::shifted_poisson:
      return boost::math::pdf(boost::math::poisson_distribution<double>(d.lambda),
                              static_cast<double>(k - 2));
    case Family::shifted_geometric:
      return (1.0 - d.q) * std::pow(d.q, static_cast<double>(k - 2));
    case Family::heavy_tail:
    case Family::pruned: {
      double kk = static_cast<double>(k);
      double w = (d.r0 - 1) / (kk * (kk - 1.0));
      if (k == d.r0) w += d.extra_low;
      if (k == 2 * d.r0 + 1) w += d.extra_high;
      return w;
    }
    default: {
      auto it = std::lower_bound(d.atoms.begin(), d.atoms.end(), std::make_pair(k, -1.0));
      if (it != d.atoms.end() && it->first == k) return it->second;
      return 0.0;
    }
  }
}

std::optional<Rational> OffspringDistribution::pmf_exact(std::int64_t k) const {
  const DistData& d = *data_;
  if (d.spec.family == Family::heavy_tail) {
    if (k < d.r0) return Rational(0);
    return Rational(BigInt(d.r0 - 1), BigInt(k) * BigInt(k - 1));
  }
  if (d.exact_atoms.empty()) return std::nullopt;
  for (auto& [kk, p] : d.exact_atoms)
    if (kk == k) return p;
  return Rational(0);
}

double OffspringDistribution::tail(std::int64_t m) const {
  const DistData& d = *data_;
  if (m < d.smin) return 1.0;
  switch (d.spec.family) {
    case Family::shifted_poisson:
      if (m < static_cast<std::int64_t>(d.tail_table.size())) return d.tail_table[m];
      return boost::math::gamma_p(static_cast<double>(m - 1), d.lambda);
    case Family::shifted_geometric:
      return std::pow(d.q, static_cast<double>(m - 1));
    case Family::heavy_tail:
      return static_cast<double>(d.r0 - 1) / static_cast<double>(m);
    case Family::pruned: {
      const PrunedParams& pp = *d.pruned;
      if (m >= pp.k1) return 0.0;
      double mm = static_cast<double>(m);
      double k1 = static_cast<double>(pp.k1);
      if (m >= 2 * d.r0 + 1) return (d.r0 - 1) * (k1 - mm) / (mm * k1);
      return (d.r0 - 1) / mm - d.extra_low;
    }
    default: {
      auto it = std::upper_bound(d.atoms.begin(), d.atoms.end(), std::make_pair(m, static_cast<double>(INFINITY)));
      if (it == d.atoms.begin()) return 1.0;
      return d.tail_after[static_cast<std::size_t>(it - d.atoms.begin()) - 1];
    }
  }
}

double OffspringDistribution::mass_below(std::int64_t s) const {
  if (s <= data_->smin) return 0.0;
  if (!data_->atoms.empty()) {
    CompensatedSum sum;
    for (auto& [k, p] : data_->atoms)
      if (k < s) sum.add(p);
    return sum.value();
  }
  if (s - data_->smin <= 100000) {
    CompensatedSum sum;
    for (std::int64_t k = data_->smin; k < s; ++k) sum.add(pmf(k));
    return sum.value();
  }
  return 1.0 - tail(s - 1);
}

std::int64_t OffspringDistribution::cutoff_for_tail(double eps) const {
  const DistData& d = *data_;
  if (d.smax && d.spec.family != Family::pruned) {
    for (std::size_t i = 0; i < d.atoms.size(); ++i)
      if (d.tail_after[i] <= eps) return d.atoms[i].first;
    return *d.smax;
  }
  switch (d.spec.family) {
    case Family::heavy_tail: {
      double k = std::ceil((d.r0 - 1) / eps);
      if (k > 9.0e18) throw_precondition("tail target too small for heavy-tail cutoff");
      std::int64_t K = std::max<std::int64_t>(d.r0, static_cast<std::int64_t>(k));
      while (tail(K) > eps) ++K;
      return K;
    }
    case Family::pruned: {
      std::int64_t lo = d.smin, hi = d.pruned->k1;
      while (lo < hi) {
        std::int64_t mid = lo + (hi - lo) / 2;
        if (tail(mid) <= eps) hi = mid; else lo = mid + 1;
      }
      return lo;
    }
    default: {
      std::int64_t m = d.smin;
      while (tail(m) > eps) {
        ++m;
        if (m > 2000000000) throw_internal("tail cutoff search did not terminate");
      }
      return m;
    }
  }
}

std::int64_t OffspringDistribution::quantile(double v) const {
  const DistData& d = *data_;
  if (!(v > 0.0)) v = std::numeric_limits<double>::min();
  if (v > 1.0) v = 1.0;
  switch (d.spec.family) {
    case Family::heavy_tail: {
      double y = std::floor((d.r0 - 1) / v) + 1.0;
      if (y > 9.0e18) return std::numeric_limits<std::int64_t>::max() / 2;
      return std::max<std::int64_t>(d.r0, static_cast<std::int64_t>(y));
    }
    case Family::shifted_geometric: {
      // q^(m-1) < v  <=>  m - 1 > log v / log q.
      double t = std::log(v) / std::log(d.q);
      std::int64_t m = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(t)) + 2);
      while (m > 1 && tail(m - 1) < v) --m;
      while (tail(m) >= v) ++m;
      return std::max<std::int64_t>(m, d.smin);
    }
    case Family::shifted_poisson: {
      auto& tt = d.tail_table;
      auto it = std::partition_point(tt.begin(), tt.end(), [v](double t) { return t >= v; });
      std::int64_t m = static_cast<std::int64_t>(it - tt.begin());
      while (tail(m) >= v) ++m;
      return std::max<std::int64_t>(m, d.smin);
    }
    case Family::pruned: {
      std::int64_t lo = d.smin, hi = d.pruned->k1;
      while (lo < hi) {
        std::int64_t mid = lo + (hi - lo) / 2;
        if (tail(mid) < v) hi = mid; else lo = mid + 1;
      }
      return lo;
    }
    default: {
      for (std::size_t i = 0; i < d.atoms.size(); ++i)
        if (d.tail_after[i] < v) return d.atoms[i].first;
      return d.atoms.back().first;
    }
  }
}

namespace {

void fill_atoms(DistData& d, std::vector<std::pair<std::int64_t, Rational>> exact,
                std::vector<std::pair<std::int64_t, double>> approx) {
  if (!exact.empty()) {
    approx.clear();
    for (auto& [k, p] : exact) approx.emplace_back(k, static_cast<double>(p));
  }
  d.exact_atoms = std::move(exact);
  d.atoms.clear();
  for (auto& a : approx)
    if (a.second > 0.0) d.atoms.push_back(a);
  d.tail_after.assign(d.atoms.size(), 0.0);
  if (!d.exact_atoms.empty()) {
    Rational acc = 0;
    std::size_t j = d.atoms.size();
    for (auto it = d.exact_atoms.rbegin(); it != d.exact_atoms.rend(); ++it) {
      if (it->second == 0) continue;
      --j;
      d.tail_after[j] = static_cast<double>(acc);
      acc += it->second;
    }
  } else {
    CompensatedSum acc;
    for (std::size_t j = d.atoms.size(); j-- > 0;) {
      d.tail_after[j] = acc.value();
      acc.add(d.atoms[j].second);
    }
  }
  d.smin = d.atoms.front().first;
  d.smax = d.atoms.back().first;
}

HighFloat heavy_partial_mean(int r, std::int64_t m) {
  // sum_{k=r}^{m} k (r-1)/(k(k-1)) = (r-1)(H_{m-1} - H_{r-2}).
  return HighFloat(r - 1) * (harmonic_high(m - 1) - harmonic_high(r - 2));
}

// Whether (r-1)(H_{m-1} - H_{r-2}) <= b, with an exact fallback near ties.
bool heavy_mean_within(int r, std::int64_t m, const Number& b) {
  HighFloat diff = heavy_partial_mean(r, m) - b.high();
  if (abs(diff) > HighFloat("1e-40")) return diff <= 0;
  if (m > 200000) throw_internal("cannot resolve pruning cutoff at m=" + std::to_string(m));
  Rational exact_b = b.exact ? *b.exact : Rational(b.value);
  Rational lhs = Rational(r - 1) * (harmonic_exact(m - 1) - harmonic_exact(r - 2));
  return lhs <= exact_b;
}

}  // namespace

double pruning_threshold(int r) { return (r - 1) * std::log(4.0 * std::exp(1.0) * r); }

OffspringDistribution prune_eta(int r, const Number& b) {
  require(r >= 2, "pruning requires r >= 2");
  require(std::isfinite(b.value) && b.value >= pruning_threshold(r),
          "pruning requires b >= (r-1) log(4 e r) = " + std::to_string(pruning_threshold(r)));

  double guess = std::exp(b.value / (r - 1) + harmonic(r - 2) - kEulerGamma) + 1.0;
  if (guess > 4.0e18) throw_precondition("pruned support exceeds 64-bit range");
  std::int64_t k0 = std::max<std::int64_t>(r, static_cast<std::int64_t>(guess));
  while (k0 > r && !heavy_mean_within(r, k0, b)) --k0;
  while (heavy_mean_within(r, k0 + 1, b)) ++k0;

  PrunedParams pp;
  pp.r = r;
  pp.k0 = k0;
  pp.k1 = k0 - 2 * r;
  if (pp.k1 <= 2 * r) throw_internal("pruned cutoff k1 <= 2r");
  pp.b = b.high();
  pp.A = HighFloat(r - 1) / pp.k1;
  pp.unallocated_mean = pp.b - heavy_partial_mean(r, pp.k1);
  pp.alpha = (HighFloat(2 * r + 1) - pp.unallocated_mean / pp.A) / (r + 1);
  if (!(pp.alpha > 0 && pp.alpha < 1)) {
    throw_internal("pruning produced alpha outside (0,1): " + pp.alpha.str(17));
  }

  auto d = std::make_shared<DistData>();
  d->spec = DistributionSpec::pruned(r, b);
  d->r0 = r;
  d->smin = r;
  d->smax = pp.k1;
  d->extra_low = static_cast<double>(pp.alpha * pp.A);
  d->extra_high = static_cast<double>((1 - pp.alpha) * pp.A);
  d->pruned = pp;
  return OffspringDistribution(d);
}

OffspringDistribution make_distribution(const DistributionSpec& spec) {
  auto d = std::make_shared<DistData>();
  d->spec = spec;
  switch (spec.family) {
    case Family::regular: {
      require(spec.b.is_integer() && spec.b.as_int() >= 1, "regular requires an integer b >= 1");
      fill_atoms(*d, {{spec.b.as_int(), Rational(1)}}, {});
      break;
    }
    case Family::two_point: {
      require(spec.b.value > 2.0, "two_point requires b > 2");
      require(static_cast<double>(spec.a) >= spec.b.value, "two_point requires a >= b");
      if (spec.b.exact) {
        Rational b = *spec.b.exact;
        require(Rational(spec.a) >= b, "two_point requires a >= b");
        Rational p2 = (Rational(spec.a) - b) / Rational(spec.a - 2);
        fill_atoms(*d, {{2, p2}, {spec.a, 1 - p2}}, {});
      } else {
        double p2 = (spec.a - spec.b.value) / (spec.a - 2.0);
        fill_atoms(*d, {}, {{2, p2}, {spec.a, (spec.b.value - 2.0) / (spec.a - 2.0)}});
      }
      break;
    }
    case Family::shifted_poisson: {
      require(spec.b.value > 2.0 && std::isfinite(spec.b.value), "shifted_poisson requires b > 2");
      d->lambda = spec.b.value - 2.0;
      d->smin = 2;
      d->tail_table = {1.0, 1.0};
      for (std::int64_t m = 2;; ++m) {
        double t = boost::math::gamma_p(static_cast<double>(m - 1), d->lambda);
        d->tail_table.push_back(t);
        if (t < 1e-30 && static_cast<double>(m) > d->lambda) break;
      }
      break;
    }
    case Family::shifted_geometric: {
      require(spec.b.value > 2.0 && std::isfinite(spec.b.value), "shifted_geometric requires b > 2");
      if (spec.b.exact) {
        Rational b = *spec.b.exact;
        d->q = static_cast<double>((b - 2) / (b - 1));
      } else {
        d->q = (spec.b.value - 2.0) / (spec.b.value - 1.0);
      }
      d->smin = 2;
      break;
    }
    case Family::heavy_tail: {
      require(spec.r >= 2, "heavy_tail requires r >= 2");
      d->r0 = spec.r;
      d->smin = spec.r;
      break;
    }
    case Family::pruned:
      return prune_eta(spec.r, spec.b);
    case Family::explicit_pmf: {
      require(!spec.pmf.empty(), "explicit pmf needs at least one support point");
      std::vector<PmfEntry> entries = spec.pmf;
      std::sort(entries.begin(), entries.end(), [](auto& x, auto& y) { return x.k < y.k; });
      bool all_exact = true;
      CompensatedSum total;
      for (std::size_t i = 0; i < entries.size(); ++i) {
        require(entries[i].k >= 1, "support points must be >= 1 (mass at " +
                                       std::to_string(entries[i].k) + ")");
        require(entries[i].probability.value >= 0.0, "probabilities must be non-negative");
        if (i && entries[i].k == entries[i - 1].k) {
          throw_precondition("duplicate support point " + std::to_string(entries[i].k));
        }
        all_exact = all_exact && entries[i].probability.exact.has_value();
        total.add(entries[i].probability.value);
      }
      require(std::abs(total.value() - 1.0) <= 1e-12, "probabilities must sum to 1");
      require(total.value() > 0.0, "probabilities must sum to 1");
      std::vector<std::pair<std::int64_t, Rational>> exact;
      std::vector<std::pair<std::int64_t, double>> approx;
      for (auto& e : entries) {
        approx.emplace_back(e.k, e.probability.value);
        if (all_exact) exact.emplace_back(e.k, *e.probability.exact);
      }
      fill_atoms(*d, std::move(exact), std::move(approx));
      break;
    }
  }
  return OffspringDistribution(d);
}

namespace {

constexpr double kSeriesRelTol = 1e-17;

// E f(xi) for the shifted (infinite, light-tailed) families.
template <class F>
double light_series(const OffspringDistribution& d, F f, bool f_nonincreasing) {
  CompensatedSum s;
  std::int64_t k = d.support_min();
  for (;; ++k) {
    double pk = d.pmf(k);
    double t = pk * f(k);
    s.add(t);
    double bound;
    if (f_nonincreasing) {
      bound = f(k + 1) * d.tail(k);
    } else {
      double pn = d.pmf(k + 1);
      double tn = pn * f(k + 1);
      double rho = t > 0.0 ? tn / t : INFINITY;
      bound = (pn <= pk && rho < 1.0) ? tn / (1.0 - rho) : INFINITY;
    }
    if (bound <= kSeriesRelTol * std::abs(s.value()) || d.tail(k) == 0.0) break;
    if (k > 100000000) throw_internal("moment series did not converge");
  }
  return s.value();
}

template <class F>
double atom_sum(const OffspringDistribution& d, F f) {
  CompensatedSum s;
  for (auto& [k, p] : d.atoms()) s.add(p * f(k));
  return s.value();
}

// E f(xi) for heavy-based families with f decreasing fast enough that the
// sum beyond kMax is negligible at double precision.
template <class F>
double heavy_decreasing_sum(const OffspringDistribution& d, F f, std::int64_t k_max) {
  std::int64_t top = k_max;
  if (d.support_max()) top = std::min(top, *d.support_max());
  CompensatedSum s;
  for (std::int64_t k = top; k >= d.support_min(); --k) s.add(d.pmf(k) * f(k));
  return s.value();
}

bool light(const OffspringDistribution& d) {
  return d.family() == Family::shifted_poisson || d.family() == Family::shifted_geometric;
}

}  // namespace

Moment mean(const OffspringDistribution& d) {
  switch (d.family()) {
    case Family::heavy_tail: return Moment::inf();
    case Family::shifted_poisson:
    case Family::shifted_geometric: return Moment::finite(d.spec().b.value);
    case Family::pruned: {
      const PrunedParams& pp = *d.pruned();
      HighFloat m = heavy_partial_mean(pp.r, pp.k1) + pp.alpha * pp.A * pp.r +
                    (1 - pp.alpha) * pp.A * (2 * pp.r + 1);
      return Moment::finite(static_cast<double>(m));
    }
    default:
      return Moment::finite(atom_sum(d, [](std::int64_t k) { return static_cast<double>(k); }));
  }
}

Moment second_factorial_moment(const OffspringDistribution& d) {
  double b = d.spec().b.value;
  switch (d.family()) {
    case Family::heavy_tail: return Moment::inf();
    case Family::shifted_poisson: return Moment::finite(b * b - 2.0);
    case Family::shifted_geometric: return Moment::finite(2.0 * (b - 1.0) * (b - 1.0));
    case Family::pruned: {
      const PrunedParams& pp = *d.pruned();
      int r = pp.r;
      HighFloat m = HighFloat(r - 1) * (pp.k1 - r + 1) + pp.alpha * pp.A * r * (r - 1) +
                    (1 - pp.alpha) * pp.A * (2 * r + 1) * (2 * r);
      return Moment::finite(static_cast<double>(m));
    }
    default:
      return Moment::finite(atom_sum(d, [](std::int64_t k) {
        return static_cast<double>(k) * static_cast<double>(k - 1);
      }));
  }
}

Moment alpha_moment(const OffspringDistribution& d, double alpha) {
  require(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0, 1]");
  auto f = [alpha](std::int64_t k) { return std::pow(static_cast<double>(k), 1.0 + alpha); };
  if (d.family() == Family::heavy_tail) return Moment::inf();
  if (light(d)) return Moment::finite(light_series(d, f, false));
  if (d.family() == Family::pruned) {
    const PrunedParams& pp = *d.pruned();
    int r = pp.r;
    constexpr std::int64_t kDirect = 1000000;
    std::int64_t top = std::min(pp.k1, kDirect);
    long double s = 0.0L;
    for (std::int64_t k = top; k >= r; --k) {
      long double kk = static_cast<long double>(k);
      s += std::pow(kk, static_cast<long double>(alpha)) / (kk - 1.0L);
    }
    if (pp.k1 > top) {
      for (int j = 0; j <= 4; ++j) s += power_sum(alpha - 1.0 - j, top + 1, pp.k1);
    }
    long double total = (r - 1) * s;
    total += static_cast<long double>(pp.alpha * pp.A) * std::pow(static_cast<long double>(r), 1.0L + alpha);
    total += static_cast<long double>((1 - pp.alpha) * pp.A) *
             std::pow(static_cast<long double>(2 * r + 1), 1.0L + alpha);
    return Moment::finite(static_cast<double>(total));
  }
  return Moment::finite(atom_sum(d, f));
}

double harmonic_tail_moment(const OffspringDistribution& d, int r) {
  require(r >= 2, "harmonic tail moment requires r >= 2");
  require(d.support_min() >= r, "support below r");
  auto f = [r](std::int64_t k) { return harmonic(k - r); };
  if (light(d)) return light_series(d, f, false);
  if (d.is_heavy_based()) {
    int r0 = d.pruned() ? d.pruned()->r : d.spec().r;
    // sum_{k=r0}^{m} (r0-1)/(k(k-1)) H_{k-r}, summed by parts.
    double head = harmonic(r0 - r) / (r0 - 1);
    double base = harmonic(r0 - 1) - harmonic(r0 - r);
    if (!d.pruned()) return (r0 - 1) * (head + base / (r - 1));
    const PrunedParams& pp = *d.pruned();
    std::int64_t m = pp.k1;
    double gap = 0.0;  // H_{m-r} - H_{m-1}
    for (std::int64_t j = m - r + 1; j <= m - 1; ++j) gap -= 1.0 / static_cast<double>(j);
    double body = (r0 - 1) * (head + (gap + base) / (r - 1) - harmonic(m - r) / static_cast<double>(m));
    return body + static_cast<double>(pp.alpha * pp.A) * harmonic(r0 - r) +
           static_cast<double>((1 - pp.alpha) * pp.A) * harmonic(2 * r0 + 1 - r);
  }
  return atom_sum(d, f);
}

double fort_upper_moment(const OffspringDistribution& d) {
  require(d.support_min() >= 2, "fort moment requires support >= 2");
  auto f = [](std::int64_t k) {
    double kk = static_cast<double>(k);
    return 1.0 / ((kk - 1.0) * (2.0 * kk - 3.0));
  };
  if (light(d)) return light_series(d, f, true);
  if (d.is_heavy_based()) return heavy_decreasing_sum(d, f, 400000);
  return atom_sum(d, f);
}

double inverse_square_moment(const OffspringDistribution& d) {
  auto f = [](std::int64_t k) {
    double kk = static_cast<double>(k);
    return 4.0 / (kk * kk);
  };
  if (light(d)) return light_series(d, f, true);
  if (d.is_heavy_based()) return heavy_decreasing_sum(d, f, 400000);
  return atom_sum(d, f);
}

TruncatedDistribution::TruncatedDistribution(OffspringDistribution base, std::int64_t cutoff,
                                             TailMode mode)
    : base_(std::move(base)), cutoff_(cutoff), mode_(mode) {
  discarded_ = base_.tail(cutoff_);
  retained_ = 1.0 - discarded_;
  require(retained_ > 0.0, "truncation cutoff retains no mass");
}

double TruncatedDistribution::weight(std::int64_t k) const {
  if (k > cutoff_) return 0.0;
  double p = base_.pmf(k);
  return mode_ == TailMode::renormalized ? p / retained_ : p;
}

}  // namespace gwbp
