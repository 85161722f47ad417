#include "gwbp/constructions.hpp"

#include "gwbp/binomial.hpp"
#include "gwbp/error.hpp"

#include <cmath>
#include <limits>

namespace gwbp {

std::int64_t LayeredTreeSpec::total_depth() const {
  std::int64_t t = 0;
  for (int n : n_seq) t += n;
  for (int m : m_seq) t += m;
  return t;
}

std::int64_t LayeredTreeSpec::children_at(std::int64_t level) const {
  std::int64_t offset = 0;
  for (std::size_t i = 0; i < std::max(n_seq.size(), m_seq.size()); ++i) {
    if (i < n_seq.size()) {
      if (level < offset + n_seq[i]) return level == offset ? d + 1 : d;
      offset += n_seq[i];
    }
    if (i < m_seq.size()) {
      if (level < offset + m_seq[i]) return level == offset ? b + 1 : b;
      offset += m_seq[i];
    }
  }
  throw_precondition("level " + std::to_string(level) + " lies beyond the layered blocks");
}

namespace {

void check_spec(const LayeredTreeSpec& s) {
  require(s.d >= 1 && s.b >= 1, "layered tree needs d, b >= 1");
  for (int n : s.n_seq) require(n >= 1, "block depths must be positive");
  for (int m : s.m_seq) require(m >= 1, "block depths must be positive");
  require(s.m_seq.size() <= s.n_seq.size() && s.n_seq.size() <= s.m_seq.size() + 1,
          "blocks must alternate starting with a d-block");
}

}  // namespace

SampledTree build_layered_tree(const LayeredTreeSpec& spec, int depth_cap, std::int64_t budget) {
  check_spec(spec);
  require(depth_cap >= 0 && depth_cap <= spec.total_depth(), "depth cap exceeds the layered blocks");
  require(budget >= 1, "budget must be >= 1");
  SampledTree t;
  t.depth_cap = depth_cap;
  t.budget = budget;
  auto add = [&](std::int64_t parent, int dep) {
    t.child_count.push_back(0);
    t.first_child.push_back(0);
    t.parent.push_back(parent);
    t.depth.push_back(dep);
  };
  add(-1, 0);
  for (std::int64_t v = 0; v < t.size(); ++v) {
    if (t.depth[v] >= depth_cap) continue;
    std::int64_t k = spec.children_at(t.depth[v]);
    if (t.size() + k > budget) {
      t.truncated = true;
      break;
    }
    t.first_child[v] = t.size();
    t.child_count[v] = k;
    for (std::int64_t j = 0; j < k; ++j) add(v, t.depth[v] + 1);
  }
  return t;
}

LevelGrowth level_growth(const LayeredTreeSpec& spec, int levels) {
  check_spec(spec);
  require(levels >= 0 && levels <= spec.total_depth(), "levels exceed the layered blocks");
  LevelGrowth g;
  g.sizes.push_back(1);
  g.root_growth.push_back(1.0);
  for (int t = 0; t < levels; ++t) {
    g.sizes.push_back(g.sizes.back() * spec.children_at(t));
    // log of a big integer through its decimal length keeps huge sizes finite.
    std::string digits = g.sizes.back().str();
    std::size_t keep = std::min<std::size_t>(digits.size(), 17);
    double mant = std::stod(digits.substr(0, keep));
    double log_size = std::log(mant) + static_cast<double>(digits.size() - keep) * std::log(10.0);
    g.root_growth.push_back(std::exp(log_size / (t + 1)));
  }
  return g;
}

BigInt block_end_level_size(const LayeredTreeSpec& spec, int ell) {
  check_spec(spec);
  require(ell >= 0 && static_cast<std::size_t>(ell) <= spec.m_seq.size(), "block index out of range");
  BigInt n = 1;
  for (int i = 0; i < ell; ++i) {
    n *= BigInt(spec.d + 1) * boost::multiprecision::pow(BigInt(spec.d), spec.n_seq[i] - 1);
    n *= BigInt(spec.b + 1) * boost::multiprecision::pow(BigInt(spec.b), spec.m_seq[i] - 1);
  }
  return n;
}

double root_healthy_probability(std::int64_t d, int r, double p, int n) {
  require(d >= 1 && r >= 1, "requires d, r >= 1");
  require(p >= 0.0 && p <= 1.0, "p must lie in [0,1]");
  require(n >= 0, "n must be >= 0");
  if (n == 0) return 1.0 - p;
  double u = 1.0 - p;
  for (int t = 1; t < n; ++t) u = (1.0 - p) * binomial_lower_tail(d, 1.0 - u, u, r - 1);
  return (1.0 - p) * binomial_lower_tail(d + 1, 1.0 - u, u, r - 1);
}

std::vector<double> root_infection_curve(std::int64_t d, int r, double p, const std::vector<int>& n_list) {
  std::vector<double> out;
  out.reserve(n_list.size());
  for (int n : n_list) out.push_back(1.0 - root_healthy_probability(d, r, p, n));
  return out;
}

bool verify_no_fixed_point(std::int64_t d, int r, double p, const VerifyOptions& opts) {
  require(r >= 1 && d >= r, "verify_no_fixed_point requires d >= r >= 1");
  require(p > 0.0 && p < 1.0, "p must lie in (0,1)");
  require(opts.grid >= 1, "grid must be positive");
  // With y = 1 - x the claim reads F(y) < y on (0, 1], where
  // F(y) = P(Bin(d, y(1-p)) >= j), j = d - r + 1, is increasing in y.
  const std::int64_t j = d - r + 1;
  auto F = [&](double y) {
    double pi = y * (1.0 - p);
    return binomial_lower_tail(d, 1.0 - pi, pi, r - 1);
  };
  if (j == 1) {
    // F(y) = 1 - (1 - y(1-p))^d < d (1-p) y, with slope d (1-p) at 0.
    return static_cast<double>(d) * (1.0 - p) <= 1.0;
  }
  // Union bound F(y) <= C(d, j) ((1-p) y)^j settles small y.
  double log_c = log_choose(d, j) + static_cast<double>(j) * std::log1p(-p);
  double y0 = std::exp(-log_c / static_cast<double>(j - 1));
  double lo = std::min(1.0, y0) / 2.0;

  // Interval [a, b] is safe when F(b) < a, since F(y) <= F(b) < a <= y.
  auto check = [&](auto&& self, double a, double b, int depth) -> bool {
    double fb = F(b);
    if (fb < a) return true;
    if (fb >= b) return false;
    if (depth >= opts.max_refine) return false;
    double mid = 0.5 * (a + b);
    return self(self, a, mid, depth + 1) && self(self, mid, b, depth + 1);
  };
  const std::int64_t n = opts.grid;
  for (std::int64_t i = 0; i < n; ++i) {
    double a = lo + (1.0 - lo) * static_cast<double>(i) / static_cast<double>(n);
    double b = i + 1 == n ? 1.0 : lo + (1.0 - lo) * static_cast<double>(i + 1) / static_cast<double>(n);
    if (!check(check, a, b, 0)) return false;
  }
  return true;
}

LayeredDesign design_layered_spec(int r, std::int64_t b, double p, int levels) {
  require(r >= 2, "r must be >= 2");
  require(b >= 1, "b must be >= 1");
  require(p > 0.0 && p < 1.0, "p must lie in (0,1)");
  require(levels >= 1, "levels must be >= 1");
  LayeredDesign out;
  LayeredTreeSpec& s = out.spec;
  s.b = b;
  s.d = static_cast<std::int64_t>(std::floor(std::max(r / p, static_cast<double>(b)))) + 1;
  const double log_d = std::log(static_cast<double>(s.d));
  const double log_b = std::log(static_cast<double>(b));

  double log_n = 0.0;    // log N_ell
  std::int64_t sum_n = 0;
  std::int64_t depth = 0;  // t_ell
  for (int ell = 1; ell <= levels; ++ell) {
    double big_n = std::exp(log_n);
    double target = log_n > 700.0 ? std::log(2.0) * std::exp(-log_n) : -std::expm1(-std::log(2.0) / big_n);
    if (!(target > 1e-300)) {
      throw_precondition("level " + std::to_string(ell) + " needs a block failure probability below double range");
    }
    double u = 1.0 - p;
    int n = 1;
    double healthy = (1.0 - p) * binomial_lower_tail(s.d + 1, 1.0 - u, u, r - 1);
    while (healthy > target) {
      if (n >= 10000000) throw_internal("block depth search did not terminate");
      u = (1.0 - p) * binomial_lower_tail(s.d, 1.0 - u, u, r - 1);
      ++n;
      healthy = (1.0 - p) * binomial_lower_tail(s.d + 1, 1.0 - u, u, r - 1);
    }
    sum_n += n;
    double shrink = std::log1p(std::ldexp(1.0, -ell));
    double need = static_cast<double>(sum_n) * std::log(static_cast<double>(s.d) / b) / shrink -
                  static_cast<double>(depth + n);
    double m_real = std::max(static_cast<double>(ell) * ell, std::ceil(need));
    if (m_real > std::numeric_limits<int>::max() / 2) throw_precondition("block depth overflow");
    int m = static_cast<int>(m_real);
    while (static_cast<double>(sum_n) * std::log(static_cast<double>(s.d) / b) >
           shrink * static_cast<double>(depth + n + m)) {
      ++m;
    }

    LayeredLevel lv;
    lv.n = n;
    lv.m = m;
    lv.log_vertices = log_n;
    lv.healthy = healthy;
    lv.all_infected = healthy > 0.0 ? std::exp(-std::exp(log_n + std::log(-std::log1p(-healthy)))) : 1.0;
    out.levels.push_back(lv);
    s.n_seq.push_back(n);
    s.m_seq.push_back(m);
    log_n += std::log(static_cast<double>(s.d + 1)) + (n - 1) * log_d + std::log(static_cast<double>(b + 1)) +
             (m - 1) * log_b;
    depth += n + m;
  }
  return out;
}

}  // namespace gwbp
