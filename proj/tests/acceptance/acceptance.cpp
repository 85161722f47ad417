// Acceptance checks. Each criterion prints one PASS or FAIL line with the
// measured quantity next to its tolerance; the exit status is the number of
// failed criteria.

#include "gwbp/binomial.hpp"
#include "gwbp/bounds.hpp"
#include "gwbp/constructions.hpp"
#include "gwbp/critical.hpp"
#include "gwbp/gfunc.hpp"
#include "gwbp/simtree.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/digamma.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace gwbp;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int id, bool ok, const std::string& what) {
  std::printf("%s  criterion %2d  %s\n", ok ? "PASS" : "FAIL", id, what.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

template <class... A>
std::string fmt(const char* f, A... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

OffspringDistribution dist(const std::string& text) { return make_distribution(parse_distribution_spec(text)); }

// Closed forms evaluated in 50-digit arithmetic, independent of the library.
double regular_two(int b) {
  HighFloat bb = b;
  return static_cast<double>(1 - pow(bb - 1, 2 * b - 3) / (pow(bb, b - 1) * pow(bb - 2, b - 2)));
}

double poisson_closed(double b) {
  HighFloat bb = b;
  HighFloat s = sqrt((bb + 3) * (bb - 1));
  return static_cast<double>(1 - (bb - 2) * exp((bb + 1 - s) / 2) / (s - 2));
}

void criterion1() {
  auto t0 = Clock::now();
  double worst = 0;
  for (int b = 3; b <= 15; ++b) {
    double pc = pc_exact(make_distribution(DistributionSpec::regular(b)), 2).pc;
    worst = std::max(worst, std::abs(pc - regular_two(b)));
  }
  double t = seconds_since(t0);
  report(1, worst <= 1e-10 && t < 1.0,
         fmt("regular(b), r=2, b=3..15: max|pc - closed form| = %.3g (tol 1e-10), %.3f s (limit 1 s)", worst, t));
}

void criterion2() {
  double worst = 0;
  for (int b = 2; b <= 10; ++b) {
    double pc = pc_exact(make_distribution(DistributionSpec::regular(b)), b).pc;
    worst = std::max(worst, std::abs(pc - (1.0 - 1.0 / b)));
  }
  report(2, worst <= 1e-10, fmt("regular(b), r=b, b=2..10: max|pc - (1 - 1/b)| = %.3g (tol 1e-10)", worst));
}

void criterion3() {
  double worst = 0;
  for (int b : {3, 4, 5, 10, 20}) {
    double pc = pc_exact(make_distribution(DistributionSpec::shifted_geometric(Number::from_int(b))), 2).pc;
    double want = 1.0 / ((2.0 * b - 3) * (2.0 * b - 3));
    worst = std::max(worst, std::abs(pc - want));
  }
  report(3, worst <= 1e-10, fmt("shifted geometric, b in {3,4,5,10,20}: max|pc - 1/(2b-3)^2| = %.3g (tol 1e-10)", worst));
}

void criterion4() {
  double worst_closed = 0;
  for (int b = 3; b <= 20; ++b) {
    double pc = pc_exact(make_distribution(DistributionSpec::shifted_poisson(Number::from_int(b))), 2).pc;
    worst_closed = std::max(worst_closed, std::abs(pc - poisson_closed(b)));
  }
  double worst_ratio = 0;
  for (int b = 10; b <= 100; ++b) {
    double pc = pc_exact(make_distribution(DistributionSpec::shifted_poisson(Number::from_int(b))), 2).pc;
    double bb = b;
    double dev = std::abs(pc - (1 / (2 * bb * bb) + 1 / (3 * bb * bb * bb)));
    worst_ratio = std::max(worst_ratio, dev / (5 / (bb * bb * bb * bb)));
  }
  report(4, worst_closed <= 1e-8 && worst_ratio <= 1.0,
         fmt("shifted Poisson: b=3..20 max|pc - closed form| = %.3g (tol 1e-8); b=10..100 max "
             "|pc - 1/(2b^2) - 1/(3b^3)| / (5/b^4) = %.3f (limit 1)",
             worst_closed, worst_ratio));
}

void criterion5() {
  double worst = 0;
  int n = 0;
  for (int b = 3; b <= 8; ++b) {
    for (int a = 2 * b - 1; a <= 3 * b; ++a) {
      double pc = pc_exact(make_distribution(DistributionSpec::two_point(b, a)), 2).pc;
      double want = 1.0 - (a - 2.0) / (2.0 * (a - b));
      worst = std::max(worst, std::abs(pc - want));
      ++n;
    }
  }
  report(5, worst <= 1e-9,
         fmt("two-point, b=3..8, a=2b-1..3b (%d laws): max|pc - (1 - (a-2)/(2(a-b)))| = %.3g (tol 1e-9)", n, worst));
}

void criterion6() {
  bool ok = true;
  std::string detail;
  for (int r = 2; r <= 4; ++r) {
    OffspringDistribution d = make_distribution(DistributionSpec::heavy_tail(r));
    std::int64_t K = d.cutoff_for_tail(1e-8);
    double tail = d.tail(K);
    // Direct sum of pmf(k) g_k^r(x) over k <= K. For x < 1 the kernel decays
    // like x^k k^{r-1}, so the sum stops once the terms are negligible.
    double worst = 0;
    for (int i = 0; i <= 1000; ++i) {
      double x = i / 1000.0;
      long double s = 0;
      if (i == 1000) {
        s = 1.0L - tail;
      } else {
        for (std::int64_t k = r; k <= K; ++k) {
          double term = d.pmf(k) * g(k, r, x);
          s += term;
          if (k > 2 * r && term < 1e-30) break;
        }
      }
      worst = std::max(worst, std::abs(static_cast<double>(s) - 1.0));
    }
    GOptions opts;
    opts.tail_target = 1e-8;
    GEvalContext ctx(d, r, opts);
    double worst_ctx = 0;
    for (int i = 0; i <= 1000; ++i) worst_ctx = std::max(worst_ctx, std::abs(G(ctx, i / 1000.0).value - 1.0));
    double pc = pc_exact(d, r).pc;
    bool here = worst <= r * tail && worst_ctx <= r * tail && pc <= 1e-6;
    ok = ok && here;
    detail += fmt(" r=%d: K=%lld, max|G-1| = %.3g (direct) %.3g (context) vs r*tail = %.3g, pc = %.3g;", r,
                  static_cast<long long>(K), worst, worst_ctx, r * tail, pc);
  }
  report(6, ok, "heavy tail:" + detail + " (pc limit 1e-6)");
}

double pruned_mean_oracle(const PrunedParams& pp) {
  // sum_{k=r}^{k1} (r-1)/(k-1) + extra mass alpha A at r and (1-alpha) A at
  // 2r+1, with H_n = psi(n+1) + gamma.
  using boost::math::digamma;
  HighFloat r = pp.r;
  HighFloat h_top = digamma(HighFloat(pp.k1)) - digamma(HighFloat(pp.r - 1));
  return static_cast<double>((r - 1) * h_top + pp.alpha * pp.A * r + (1 - pp.alpha) * pp.A * (2 * r + 1));
}

void criterion7() {
  bool ok = true;
  std::string detail;
  for (double b : {15.0, 20.0, 25.0}) {
    OffspringDistribution eta = prune_eta(2, b);
    double lb = lb_branching_exact(eta, 2).value;
    CriticalResult c = pc_exact(eta, 2);
    double ub = 4 * std::exp(1.0) * std::exp(-b);
    double m_lib = mean(eta).value;
    double m_oracle = pruned_mean_oracle(*eta.pruned());
    double m_sum = NAN;
    if (b <= 20) {
      // Direct summation of k pmf(k) over the whole support.
      long double s = 0;
      for (std::int64_t k = *eta.support_max(); k >= 2; --k) s += static_cast<long double>(k) * eta.pmf(k);
      m_sum = static_cast<double>(s);
    }
    bool here = lb <= c.pc + c.error && c.pc <= ub && std::abs(m_lib - b) <= 1e-10 &&
                std::abs(m_oracle - b) <= 1e-10 && (std::isnan(m_sum) || std::abs(m_sum - b) <= 1e-10);
    ok = ok && here;
    detail += fmt(" b=%g: %.3g <= pc %.3g <= %.3g, |mean-b| = %.2g (lib) %.2g (digamma)", b, lb, c.pc, ub,
                  std::abs(m_lib - b), std::abs(m_oracle - b));
    if (!std::isnan(m_sum)) detail += fmt(" %.2g (sum)", std::abs(m_sum - b));
    detail += ";";
  }
  report(7, ok, "pruned r=2:" + detail + " (mean tol 1e-10)");
}

void criterion8() {
  auto t0 = Clock::now();
  std::vector<std::pair<std::string, int>> grid;
  for (int b = 2; b <= 20; ++b)
    for (int r = 2; r <= std::min(b, 4); ++r) grid.push_back({"regular:b=" + std::to_string(b), r});
  for (int b = 3; b <= 20; ++b) {
    grid.push_back({"poisson:b=" + std::to_string(b), 2});
    grid.push_back({"geometric:b=" + std::to_string(b), 2});
  }
  for (int b = 3; b <= 8; ++b)
    for (int a = b; a <= 3 * b; ++a) grid.push_back({"twopoint:b=" + std::to_string(b) + ",a=" + std::to_string(a), 2});
  for (int b = 15; b <= 25; ++b) grid.push_back({"pruned:r=2,b=" + std::to_string(b), 2});
  int violations = 0, bounds = 0;
  std::string first;
  for (auto& [text, r] : grid) {
    BoundsReport rep = bounds_report(dist(text), r);
    for (auto& e : rep.entries) bounds += e.valid && !e.vacuous;
    auto v = rep.violations(1e-8);
    if (!v.empty() && first.empty()) first = text + " " + v[0];
    violations += static_cast<int>(v.size());
  }
  double t = seconds_since(t0);
  report(8, violations == 0 && t < 60.0,
         fmt("bound sandwich over %zu laws (%d valid bounds): %d violations at tol 1e-8%s, %.1f s (limit 60 s)",
             grid.size(), bounds, violations, first.empty() ? "" : (" first: " + first).c_str(), t));
}

void criterion9() {
  std::mt19937_64 gen(20261014);
  const char* specs[] = {"regular:b=2", "regular:b=3", "poisson:b=3", "geometric:b=3", "twopoint:b=3,a=7",
                         "heavy:r=2",   "pruned:r=2,b=5", "pmf:1=0.2,2=0.4,4=0.4"};
  std::vector<OffspringDistribution> laws;
  for (const char* s : specs) laws.push_back(dist(s));
  int mismatches = 0, done = 0;
  std::int64_t vertices = 0;
  while (done < 10000) {
    const OffspringDistribution& d = laws[gen() % laws.size()];
    int depth = static_cast<int>(gen() % 7);
    SampledTree t = sample_tree(d, depth, 200000, gen(), 0);
    if (t.truncated) continue;
    double p = std::uniform_real_distribution<double>(0.0, 1.0)(gen);
    InfectionMark m = random_marks(t, p, gen());
    int r = 2 + static_cast<int>(gen() % 3);
    bool safe = root_fort_status(t, m, r);
    bool infected = run_bootstrap(t, m, r).infected[0] != 0;
    mismatches += safe == infected;
    vertices += t.size();
    ++done;
  }
  report(9, mismatches == 0,
         fmt("bootstrap closure vs fort recursion on %d random instances (%lld vertices, depth <= 6): %d mismatches",
             done, static_cast<long long>(vertices), mismatches));
}

void criterion10() {
  struct Config {
    const char* spec;
    int r;
    double p;
    int n;
  };
  const Config configs[] = {
      {"regular:b=3", 2, 0.2, 5},       {"regular:b=3", 2, 0.08, 6},       {"regular:b=4", 3, 0.3, 4},
      {"regular:b=5", 2, 0.03, 4},      {"poisson:b=3", 2, 0.1, 5},        {"poisson:b=4", 2, 0.04, 4},
      {"poisson:b=5", 2, 0.2, 4},       {"geometric:b=3", 2, 0.1, 5},      {"geometric:b=4", 2, 0.05, 4},
      {"geometric:b=3", 2, 0.3, 6},     {"twopoint:b=4,a=9", 2, 0.3, 4},   {"twopoint:b=3,a=5", 2, 0.15, 5},
      {"twopoint:b=4,a=7", 2, 0.25, 4}, {"heavy:r=2", 2, 0.2, 3},          {"heavy:r=3", 3, 0.3, 3},
      {"pruned:r=2,b=5", 2, 0.1, 3},    {"pmf:2=0.5,4=0.5", 2, 0.1, 5},    {"pmf:3=0.6,6=0.4", 3, 0.2, 4},
      {"regular:b=6", 4, 0.4, 3},       {"pmf:2=0.3,3=0.3,8=0.4", 2, 0.15, 4},
  };
  auto t0 = Clock::now();
  int outside = 0, idx = 0;
  double worst_z = 0;
  std::int64_t truncated = 0;
  for (const Config& c : configs) {
    OffspringDistribution d = dist(c.spec);
    SimEstimate e = estimate_qn(d, c.r, c.p, c.n, 100000, 7000 + idx++);
    double exact = q_iterate(d, c.r, c.p, c.n).q.back();
    double z = e.standard_error > 0 ? (e.estimate - exact) / e.standard_error : (e.estimate == exact ? 0 : INFINITY);
    worst_z = std::max(worst_z, std::abs(z));
    outside += std::abs(z) > 3;
    truncated += e.truncated;
  }
  double t = seconds_since(t0);
  report(10, outside <= 1 && t < 300.0,
         fmt("Monte Carlo vs exact recursion, 20 configurations, N=1e5: %d outside 3 SE (limit 1), max |z| = %.2f, "
             "%lld truncated, %.1f s (limit 300 s)",
             outside, worst_z, static_cast<long long>(truncated), t));
}

void criterion11() {
  bool ok = true;
  std::string detail;
  for (auto [d, r] : std::vector<std::pair<int, int>>{{4, 2}, {10, 2}, {9, 3}, {30, 3}}) {
    double p = static_cast<double>(r) / d;
    bool v = verify_no_fixed_point(d, r, p);
    double pc = pc_exact(make_distribution(DistributionSpec::regular(d)), r).pc;
    ok = ok && v && pc <= p;
    detail += fmt(" (d=%d,r=%d): verified=%s, pc=%.4g <= %.4g;", d, r, v ? "true" : "false", pc, p);
  }
  report(11, ok, "no fixed point at p = r/d:" + detail);
}

void criterion12() {
  std::vector<std::string> failed;
  auto grid = [](int n) {
    std::vector<double> xs;
    for (int i = 0; i <= n; ++i) xs.push_back(static_cast<double>(i) / n);
    return xs;
  };
  auto check = [&](const char* name, bool ok) {
    if (!ok) failed.push_back(name);
  };

  bool grr = true;
  for (int r = 2; r <= 6; ++r)
    for (double x : grid(200)) {
      double s = 0;
      for (int i = 0; i < r; ++i) s += std::pow(1 - x, i);
      grr = grr && std::abs(g(r, r, x) - s) <= 1e-12;
    }
  check("g_r^r sum", grr);

  bool rrec = true, krec = true, dom = true;
  for (std::int64_t k = 2; k <= 50; ++k)
    for (int r = 2; r <= 5 && r < k; ++r)
      for (double x : grid(50)) {
        rrec = rrec && std::abs(g(k, r + 1, x) - g(k, r, x) - choose(k, r) * std::pow(x, k - r - 1) * std::pow(1 - x, r)) <= 1e-12;
        krec = krec && std::abs(g(k + 1, r, x) - g(k, r, x) + choose(k, r - 1) * std::pow(x, k - r) * std::pow(1 - x, r)) <= 1e-12;
        dom = dom && g(k, r, x) <= g(r, r, x) + 1e-15;
      }
  for (const char* text : {"poisson:b=4", "geometric:b=3", "heavy:r=2", "twopoint:b=4,a=9"}) {
    GEvalContext ctx(dist(text), 2);
    for (double x : grid(100)) dom = dom && G(ctx, x).value <= g(2, 2, x) + ctx.error_bound() + 1e-12;
  }
  check("r-recursion", rrec);
  check("k-recursion", krec);
  check("g_k^r <= g_r^r", dom);

  bool diff = true;
  for (std::int64_t k : {2, 5, 12, 40})
    for (int r = 1; r <= 4 && r <= k; ++r)
      for (int i = 1; i < 50; ++i) {
        double x = i / 50.0, hstep = 1e-6;
        auto F = [&](double y) { return binomial_lower_tail(k, 1 - y, y, r - 1); };
        double fd = (F(x + hstep) - F(x - hstep)) / (2 * hstep);
        diff = diff && std::abs(fd - k * binomial_pmf(k - 1, 1 - x, x, r - 1)) <= 1e-6;
      }
  check("binomial tail derivative", diff);

  bool beta = true;
  using Quad = boost::math::quadrature::gauss<double, 20>;
  for (int r = 2; r <= 4; ++r)
    for (std::int64_t k = r; k <= 20; ++k) {
      double v = Quad::integrate([&](double x) { return (g(r, r, x) - g(k, r, x)) / ((1 - x) * (1 - x)); }, 0.0, 1.0);
      double hk = 0;
      for (std::int64_t i = 1; i <= k - r; ++i) hk += 1.0 / i;
      beta = beta && std::abs(v - (static_cast<double>(k - r) / (r - 1) + hk)) <= 1e-6;
    }
  check("beta integral", beta);

  bool gautschi = true;
  for (int n = 1; n <= 50; ++n)
    for (int i = 1; i <= 9; ++i) {
      double s = i / 10.0, ratio = std::exp(std::lgamma(n + s) - std::lgamma(n + 1.0));
      gautschi = gautschi && std::pow(1.0 / (n + 1), 1 - s) <= ratio * (1 + 1e-14) &&
                 ratio <= std::pow(1.0 / n, 1 - s) * (1 + 1e-14);
    }
  check("Gautschi", gautschi);

  bool p2 = true;
  for (const char* text : {"regular:b=2", "regular:b=3", "regular:b=10", "poisson:b=3", "poisson:b=8", "geometric:b=3",
                           "geometric:b=6", "twopoint:b=4,a=9", "pmf:2=0.5,4=0.5"}) {
    OffspringDistribution d = dist(text);
    double e2 = second_factorial_moment(d).value;
    GEvalContext ctx(d, 2);
    for (double x : grid(500)) {
      double v = 2 - x - (e2 - 2) / 2 * (1 - x) * (1 - x);
      p2 = p2 && v <= G(ctx, x).value + ctx.error_bound() + 1e-12;
    }
  }
  check("P_2 <= G", p2);

  std::string msg = "identities (g_r^r sum, r-recursion, k-recursion, g_k^r <= g_r^r, binomial tail derivative, "
                    "beta integral, Gautschi, P_2 <= G): ";
  if (failed.empty()) {
    msg += "all hold";
  } else {
    msg += "failed:";
    for (auto& f : failed) msg += " " + f + ";";
  }
  report(12, failed.empty(), msg);
}

}  // namespace

int main() {
  std::vector<std::function<void()>> all = {criterion1, criterion2, criterion3,  criterion4,  criterion5,  criterion6,
                                            criterion7, criterion8, criterion9, criterion10, criterion11, criterion12};
  for (auto& c : all) {
    try {
      c();
    } catch (const std::exception& e) {
      std::printf("FAIL  criterion     threw: %s\n", e.what());
      ++failures;
    }
  }
  std::printf("%d of %zu criteria failed\n", failures, all.size());
  return failures == 0 ? 0 : 1;
}
