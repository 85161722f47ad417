#include "gwbp/critical.hpp"

#include "gwbp/error.hpp"

#include <cmath>
#include <limits>

namespace gwbp {

std::string method_name(PcMethod m) {
  switch (m) {
    case PcMethod::mass_below_r: return "mass_below_r";
    case PcMethod::maximization: return "maximization";
    case PcMethod::closed_form: return "closed_form";
  }
  return "?";
}

CriticalResult pc_exact(const GEvalContext& ctx) {
  CriticalResult res;
  if (ctx.pc_is_one()) {
    res.pc = 1.0;
    res.x_star = std::numeric_limits<double>::quiet_NaN();
    res.M = INFINITY;
    res.method = PcMethod::mass_below_r;
    res.error = 0.0;
    return res;
  }
  MaxResult m = max_G(ctx);
  res.method = PcMethod::maximization;
  res.x_star = m.x_star;
  res.M = m.M;
  // 1 - 1/M written through the excess keeps small p_c accurate.
  res.pc = m.excess / (1.0 + m.excess);
  res.error = m.error / (m.M * m.M) + 4.0 * std::numeric_limits<double>::epsilon() * res.pc;
  return res;
}

CriticalResult pc_exact(const OffspringDistribution& d, int r, const GOptions& opts) {
  require(r >= 2, "r must be >= 2");
  return pc_exact(GEvalContext(d, r, opts));
}

namespace {

CriticalResult closed(double pc, double x_star, double M) {
  CriticalResult c;
  c.pc = pc;
  c.x_star = x_star;
  c.M = M;
  c.method = PcMethod::closed_form;
  c.error = 4.0 * std::numeric_limits<double>::epsilon();
  return c;
}

}  // namespace

std::optional<CriticalResult> pc_closed_form(const DistributionSpec& spec, int r) {
  if (r < 2) return std::nullopt;
  double b = spec.b.value;
  switch (spec.family) {
    case Family::regular: {
      if (!spec.b.is_integer()) return std::nullopt;
      std::int64_t bi = spec.b.as_int();
      if (bi == r) return closed(1.0 - 1.0 / b, 0.0, b);
      if (r == 2 && bi > 2) {
        HighFloat hb(bi);
        HighFloat hl = (2 * hb - 3) * log(hb - 1) - (hb - 1) * log(hb) - (hb - 2) * log(hb - 2);
        double l = static_cast<double>(hl);
        double pc = static_cast<double>(-expm1(hl));
        double x = b * (b - 2) / ((b - 1) * (b - 1));
        return closed(pc, x, std::exp(-l));
      }
      return std::nullopt;
    }
    case Family::shifted_poisson: {
      if (r != 2 || b < 7.0 / 3.0) return std::nullopt;
      HighFloat hb = spec.b.high();
      HighFloat hs = sqrt((hb + 3) * (hb - 1));
      HighFloat hl = log(hb - 2) + (hb + 1 - hs) / 2 - log(hs - 2);
      double x = static_cast<double>((hb - 5 + hs) / (2 * (hb - 2)));
      double l = static_cast<double>(hl);
      return closed(static_cast<double>(-expm1(hl)), x, std::exp(-l));
    }
    case Family::shifted_geometric: {
      if (r != 2 || b < 2.5) return std::nullopt;
      double m = (2 * b - 3) * (2 * b - 3) / (4 * (b - 1) * (b - 2));
      double x = (2 * b - 5) * (b - 1) / ((b - 2) * (2 * b - 3));
      return closed(1.0 / ((2 * b - 3) * (2 * b - 3)), x, m);
    }
    case Family::two_point: {
      if (r != 2) return std::nullopt;
      double a = static_cast<double>(spec.a);
      if (spec.b.exact) {
        Rational bq = *spec.b.exact;
        Rational aq(spec.a);
        if (aq < 2 * bq - 1 || bq <= 2 || aq < bq) return std::nullopt;
        Rational pc = 1 - (aq - 2) / (2 * (aq - bq));
        Rational m = 2 * (aq - bq) / (aq - 2);
        return closed(static_cast<double>(pc), 0.0, static_cast<double>(m));
      }
      if (a < 2 * b - 1 || b <= 2) return std::nullopt;
      return closed(1.0 - (a - 2) / (2 * (a - b)), 0.0, 2 * (a - b) / (a - 2));
    }
    default:
      return std::nullopt;
  }
}

QTrace q_iterate(const GEvalContext& ctx, double p, int n) {
  require(p >= 0.0 && p <= 1.0, "p must lie in [0,1]");
  require(n >= 0, "n must be >= 0");
  QTrace t;
  t.p = p;
  t.r = ctx.r();
  t.q.reserve(static_cast<std::size_t>(n) + 1);
  t.q.push_back(1.0 - p);
  for (int i = 0; i < n; ++i) {
    double prev = t.q.back();
    double next = ctx.fort_map(p, prev, ctx.r());
    if (next > prev + 1e-12) {
      throw_internal("fort recursion increased: q_" + std::to_string(i + 1) + " > q_" + std::to_string(i));
    }
    t.q.push_back(std::min(next, prev));
  }
  t.limit_estimate = t.q.back();
  t.converged = n > 0 && std::abs(t.q[n] - t.q[n - 1]) < 1e-15;
  return t;
}

QTrace q_iterate(const OffspringDistribution& d, int r, double p, int n) {
  return q_iterate(GEvalContext(d, r), p, n);
}

QLimit q_limit(const GEvalContext& ctx, double p, double tol, std::int64_t max_iter) {
  require(p >= 0.0 && p <= 1.0, "p must lie in [0,1]");
  require(tol > 0.0, "tol must be positive");
  QLimit res;
  double q = 1.0 - p;
  double prev_step = INFINITY;
  std::int64_t t = 0;
  for (; t < max_iter; ++t) {
    double next = std::min(q, ctx.fort_map(p, q, ctx.r()));
    double step = q - next;
    q = next;
    // With linear convergence at rate rho the distance to the limit is about
    // step * rho / (1 - rho), which can exceed a small step by far.
    double rho = prev_step > 0.0 ? step / prev_step : 0.0;
    double remainder = rho < 1.0 ? step * rho / (1.0 - rho) : INFINITY;
    prev_step = step;
    if (step == 0.0 || (step < tol && remainder < tol)) {
      res.converged = true;
      ++t;
      break;
    }
  }
  res.iterations = t;
  res.estimate = q;
  // The iteration decreases to the largest fixed point, so q bounds it above.
  res.lower = 0.0;
  res.upper = q;
  return res;
}

QLimit q_limit(const OffspringDistribution& d, int r, double p, double tol, std::int64_t max_iter) {
  return q_limit(GEvalContext(d, r), p, tol, max_iter);
}

double pc_regular_asymptotic(std::int64_t b, int r) {
  require(r >= 2 && b >= r, "pc_regular_asymptotic requires b >= r >= 2");
  double l = (std::lgamma(static_cast<double>(r)) - r * std::log(static_cast<double>(b))) / (r - 1);
  return (1.0 - 1.0 / r) * std::exp(l);
}

}  // namespace gwbp
