#include "gwbp/bounds.hpp"

#include "gwbp/error.hpp"
#include "gwbp/gfunc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace gwbp {

namespace {

BoundEntry make(std::string name, BoundKind kind, double raw, std::string source) {
  BoundEntry e;
  e.name = std::move(name);
  e.kind = kind;
  e.raw = raw;
  e.value = std::clamp(raw, 0.0, 1.0);
  e.source = std::move(source);
  return e;
}

BoundEntry vacuous(std::string name, BoundKind kind, std::string source) {
  BoundEntry e = make(std::move(name), kind, kind == BoundKind::lower ? 0.0 : 1.0, std::move(source));
  e.vacuous = true;
  return e;
}

// log of (k-1)^(2k-3) / (k^(k-1) (k-2)^(k-2)), the reciprocal of max g_k^2.
double log_fort_coefficient(std::int64_t k) {
  double kk = static_cast<double>(k);
  double v = (kk - 1.0) * std::log1p(-1.0 / kk);
  if (k > 2) v += (kk - 2.0) * std::log1p(1.0 / (kk - 2.0));
  return v;
}

std::string fmt_alpha(double a) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", a);
  return buf;
}

}  // namespace

BoundEntry lb_branching_exact(const OffspringDistribution& d, int r) {
  const char* src = "exp(-(E xi - 1)/(r-1) - E H_{xi-r})";
  require(d.support_min() >= r, "support below r");
  Moment m = mean(d);
  if (m.infinite) return vacuous("lb_branching_exact", BoundKind::lower, src);
  double v = std::exp(-(m.value - 1.0) / (r - 1) - harmonic_tail_moment(d, r));
  return make("lb_branching_exact", BoundKind::lower, v, src);
}

BoundEntry lb_branching_simplified(double b, int r) {
  require(r >= 2, "r must be >= 2");
  require(b >= r, "simplified branching bound requires b >= r");
  double v = std::exp(-(r - 2.0) / (r - 1.0) - b / (r - 1.0)) / b;
  return make("lb_branching_simplified", BoundKind::lower, v, "e^{-(r-2)/(r-1)} e^{-b/(r-1)} / b");
}

BoundEntry ub_pruned(int r, double b) {
  require(r >= 2, "r must be >= 2");
  double v = 2.0 * std::exp(1.0) * r * (r - 1) * std::exp(-b / (r - 1));
  BoundEntry e = make("ub_pruned", BoundKind::upper, v, "2 e r (r-1) e^{-b/(r-1)}");
  e.valid = b > pruning_threshold(r);
  return e;
}

AlphaConstants alpha_moment_constants(int r, double alpha) {
  require(r >= 2, "r must be >= 2");
  require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
  AlphaConstants c{};
  if (r == 2) {
    c.c_prime = std::pow(1.0 / (2.0 * (1.0 + alpha)), 1.0 / alpha);
    c.c_double_prime = std::pow((1.0 - alpha) / (4.0 * alpha * (1.0 + alpha)), 1.0 / alpha);
  } else {
    double y = std::pow(1.0 / (2.0 * (r + alpha - 1.0)), 1.0 / (r + alpha - 2.0));
    double hv = 1.0 - alpha * (y - 2.0 * std::pow(y, r - 1.0 + alpha));
    c.c_prime = std::pow(hv / (2.0 * (1.0 + alpha)), 1.0 / alpha);
    c.c_double_prime = (r - 2.0) * std::pow(hv / (6.0 * alpha * (1.0 + alpha)), 1.0 / alpha);
  }
  c.c = (r - 1.0) / r * std::min(c.c_prime, c.c_double_prime);
  return c;
}

BoundEntry lb_alpha_moment(const OffspringDistribution& d, int r, double alpha) {
  std::string name = "lb_alpha_moment(alpha=" + fmt_alpha(alpha) + ")";
  const char* src = "c_{r,alpha} E(xi^{1+alpha})^{-1/alpha}";
  AlphaConstants c = alpha_moment_constants(r, alpha);
  Moment m = alpha_moment(d, alpha);
  if (m.infinite) return vacuous(name, BoundKind::lower, src);
  return make(name, BoundKind::lower, c.c * std::pow(m.value, -1.0 / alpha), src);
}

BoundEntry lb_fort(const OffspringDistribution& d) {
  require(d.support_min() >= 2, "fort bound requires support >= 2");
  double best = -INFINITY;
  auto consider = [&](std::int64_t k, double p) {
    if (p <= 0.0) return;
    best = std::max(best, 1.0 - std::exp(log_fort_coefficient(k)) / p);
  };
  if (!d.atoms().empty()) {
    for (auto& [k, p] : d.atoms()) consider(k, p);
  } else {
    // The coefficient grows with k and P(xi = k) <= T(k-1), so later terms
    // cannot beat the best once 1 - coeff(k)/T(k-1) falls below it.
    for (std::int64_t k = d.support_min();; ++k) {
      double t = d.tail(k - 1);
      if (t <= 0.0 || 1.0 - std::exp(log_fort_coefficient(k)) / t < best) break;
      consider(k, d.pmf(k));
    }
  }
  if (best == -INFINITY) throw_precondition("empty support");
  return make("lb_fort", BoundKind::lower, best,
              "max_k 1 - (k-1)^{2k-3} / (k^{k-1} (k-2)^{k-2} P(xi=k))");
}

BoundEntry ub_fort(const OffspringDistribution& d) {
  return make("ub_fort", BoundKind::upper, fort_upper_moment(d), "E(1/((xi-1)(2 xi-3)))");
}

BoundEntry ub_fort_inverse_square(const OffspringDistribution& d) {
  require(d.support_min() >= 2, "fort bound requires support >= 2");
  return make("ub_fort_inverse_square", BoundKind::upper, inverse_square_moment(d), "E(4/xi^2)");
}

BoundEntry lb_second_moment(const OffspringDistribution& d) {
  require(d.support_min() >= 2, "second moment bound requires support >= 2");
  Moment m = second_factorial_moment(d);
  if (m.infinite) return vacuous("lb_second_moment", BoundKind::lower, "1/(2 E(xi)_2 - 3)");
  // The minorant 2 - x - ((E(xi)_2 - 2)/2)(1-x)^2 peaks inside [0,1] only
  // when E(xi)_2 >= 3; otherwise its maximum on [0,1] is at x = 0.
  if (m.value >= 3.0) {
    return make("lb_second_moment", BoundKind::lower, 1.0 / (2.0 * m.value - 3.0), "1/(2 E(xi)_2 - 3)");
  }
  return make("lb_second_moment", BoundKind::lower, 1.0 - 1.0 / (3.0 - m.value / 2.0),
              "1 - 1/(3 - E(xi)_2/2)");
}

BoundEntry lb_second_moment_weak(const OffspringDistribution& d) {
  require(d.support_min() >= 2, "second moment bound requires support >= 2");
  Moment m2 = second_factorial_moment(d);
  if (m2.infinite) return vacuous("lb_second_moment_weak", BoundKind::lower, "1/(2 E xi^2)");
  double ex2 = m2.value + mean(d).value;
  return make("lb_second_moment_weak", BoundKind::lower, 1.0 / (2.0 * ex2), "1/(2 E xi^2)");
}

BoundEntry ub_regular_rd(std::int64_t d_reg, int r) {
  require(r >= 2 && d_reg >= r, "ub_regular_rd requires d >= r >= 2");
  return make("ub_regular_rd", BoundKind::upper, static_cast<double>(r) / static_cast<double>(d_reg), "r/d");
}

double shape_constant(std::int64_t k, int r) {
  require(k >= r && r >= 2, "shape constant requires k >= r >= 2");
  GEvalContext ctx(make_distribution(DistributionSpec::regular(k)), r);
  MaxResult m = max_G(ctx);
  return m.excess * std::pow(static_cast<double>(k), static_cast<double>(r) / (r - 1));
}

std::vector<std::string> BoundsReport::violations(double tol) const {
  std::vector<std::string> out;
  if (!reference) return out;
  double slack = tol + reference->error;
  for (auto& e : entries) {
    if (!e.valid || e.vacuous) continue;
    if (e.kind == BoundKind::lower && e.raw > reference->pc + slack) out.push_back(e.name);
    if (e.kind == BoundKind::upper && e.raw < reference->pc - slack) out.push_back(e.name);
  }
  return out;
}

BoundsReport bounds_report(const OffspringDistribution& d, int r, const BoundsOptions& opts) {
  BoundsReport rep;
  rep.spec = d.spec().to_string();
  rep.r = r;
  GEvalContext ctx(d, r, opts.g);
  rep.reference = pc_exact(ctx);
  if (ctx.pc_is_one()) return rep;

  auto& out = rep.entries;
  out.push_back(lb_branching_exact(d, r));
  Moment m = mean(d);
  if (!m.infinite && m.value >= r) out.push_back(lb_branching_simplified(m.value, r));
  for (double a : opts.alphas) out.push_back(lb_alpha_moment(d, r, a));
  if (r == 2) {
    out.push_back(lb_fort(d));
    out.push_back(lb_second_moment(d));
    out.push_back(lb_second_moment_weak(d));
    out.push_back(ub_fort(d));
    out.push_back(ub_fort_inverse_square(d));
  }
  if (d.family() == Family::regular) out.push_back(ub_regular_rd(d.spec().b.as_int(), r));
  if (d.family() == Family::pruned && d.pruned()->r == r) out.push_back(ub_pruned(r, d.spec().b.value));
  BoundEntry excess = make("ub_max_excess", BoundKind::upper, rep.reference->M - 1.0, "M - 1");
  out.push_back(excess);
  return rep;
}

}  // namespace gwbp
