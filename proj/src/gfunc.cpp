#include "gwbp/gfunc.hpp"

#include "gwbp/binomial.hpp"
#include "gwbp/error.hpp"
#include "gwbp/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gwbp {

namespace detail {

double kernel(std::int64_t k, int r, double x) {
  if (x <= 0.0) return k == r ? static_cast<double>(r) : 0.0;
  if (x >= 1.0) return 1.0;
  double y = 1.0 - x;
  std::int64_t top = std::min<std::int64_t>(r - 1, k);
  CompensatedSum s;
  if (k <= 500) {
    for (std::int64_t i = 0; i <= top; ++i) {
      s.add(choose(k, i) * std::pow(x, static_cast<double>(k - i - 1)) *
            std::pow(y, static_cast<double>(i)));
    }
  } else {
    double lx = std::log(x);
    double ly = std::log1p(-x);
    for (std::int64_t i = 0; i <= top; ++i) {
      s.add(std::exp(log_choose(k, i) + static_cast<double>(k - i - 1) * lx +
                     static_cast<double>(i) * ly));
    }
  }
  return s.value();
}

double heavy_kernel_tail(int s, std::int64_t m, double x) {
  if (s < 2 || m < s - 1) throw_precondition("heavy_kernel_tail requires s >= 2 and m >= s-1");
  double mm = static_cast<double>(m);
  double t;
  if (x <= 0.0) {
    t = m == 1 ? 1.0 : 0.0;
  } else if (m > 500) {
    t = std::exp((mm - 1.0) * std::log(x)) / mm;
  } else {
    t = std::pow(x, mm - 1.0) / mm;
  }
  for (int j = 2; j < s; ++j) {
    t = (static_cast<double>(j) / (j - 1)) * t + ((1.0 - x) / (j - 1)) * kernel(m - 1, j - 1, x);
  }
  return t;
}

}  // namespace detail

double g(std::int64_t k, int r, double x) {
  require(r >= 2, "g requires r >= 2");
  require(k >= r, "g requires k >= r");
  require(x >= 0.0 && x <= 1.0, "g requires x in [0,1]");
  return detail::kernel(k, r, x);
}

GEvalContext::GEvalContext(OffspringDistribution d, int r, GOptions opts)
    : dist_(std::move(d)), r_(r), opts_(opts) {
  require(r >= 2, "r must be >= 2");
  require(opts_.grid_step > 0.0 && opts_.grid_step <= 0.5, "grid step must lie in (0, 0.5]");
  require(opts_.tail_target > 0.0, "tail target must be positive");
  pc_one_ = dist_.mass_below(r) > 0.0;

  auto place = [&](std::int64_t k, double w) {
    if (w <= 0.0) return;
    (k < r ? below_ : terms_).emplace_back(k, w);
  };

  if (dist_.is_heavy_based()) {
    analytic_ = true;
    const PrunedParams* pp = dist_.pruned();
    r0_ = pp ? pp->r : dist_.spec().r;
    lo_ = std::max<std::int64_t>(r0_, r);
    if (pp) {
      hi_ = pp->k1;
      tail_ = 0.0;
    } else {
      hi_ = std::max(lo_, dist_.cutoff_for_tail(opts_.tail_target));
      tail_ = dist_.tail(hi_);
    }
    cutoff_ = hi_;
    for (std::int64_t k = r0_; k < lo_; ++k) {
      double kk = static_cast<double>(k);
      place(k, (r0_ - 1) / (kk * (kk - 1.0)));
    }
    if (pp) {
      place(r0_, static_cast<double>(pp->alpha * pp->A));
      place(2 * r0_ + 1, static_cast<double>((1 - pp->alpha) * pp->A));
    }
  } else if (dist_.support_max()) {
    for (auto& [k, p] : dist_.atoms()) place(k, p);
    cutoff_ = *dist_.support_max();
    tail_ = 0.0;
  } else {
    cutoff_ = dist_.cutoff_for_tail(opts_.tail_target);
    for (std::int64_t k = dist_.support_min(); k <= cutoff_; ++k) place(k, dist_.pmf(k));
    tail_ = dist_.tail(cutoff_);
  }
  std::sort(below_.begin(), below_.end());
  std::sort(terms_.begin(), terms_.end());
  eps_ = r * tail_;
}

double GEvalContext::analytic_sum(int s, double x) const {
  if (s >= 2) {
    double c = static_cast<double>(r0_ - 1) / (s - 1);
    CompensatedSum f;
    for (std::int64_t k = s; k < lo_; ++k) {
      double kk = static_cast<double>(k);
      f.add((s - 1) / (kk * (kk - 1.0)) * detail::kernel(k, s, x));
    }
    f.add(detail::heavy_kernel_tail(s, hi_, x));
    return c * (1.0 - f.value());
  }
  // s == 1: sum (r0-1) x^(k-1)/(k(k-1)) through its closed-form total.
  if (x <= 0.0) return 0.0;
  double full = x >= 1.0 ? 1.0 : 1.0 + (1.0 - x) * std::log1p(-x) / x;
  CompensatedSum head;
  head.add(full);
  for (std::int64_t k = 2; k < lo_; ++k) {
    double kk = static_cast<double>(k);
    head.add(-std::pow(x, kk - 1.0) / (kk * (kk - 1.0)));
  }
  double hh = static_cast<double>(hi_);
  double rest = std::exp(hh * std::log(x)) * (x >= 1.0 ? 1.0 / hh : std::min(1.0 / hh, 1.0 / (hh * hh * (1.0 - x))));
  head.add(-rest);
  return (r0_ - 1) * head.value();
}

double GEvalContext::analytic_excess(double x) const {
  // c (1 - F - T) - 1 = (c - 1) - c (F + T).
  int s = r_;
  double c = static_cast<double>(r0_ - 1) / (s - 1);
  CompensatedSum f;
  for (std::int64_t k = s; k < lo_; ++k) {
    double kk = static_cast<double>(k);
    f.add((s - 1) / (kk * (kk - 1.0)) * detail::kernel(k, s, x));
  }
  f.add(detail::heavy_kernel_tail(s, hi_, x));
  return (c - 1.0) - c * f.value();
}

double GEvalContext::excess(double x) const {
  CompensatedSum s;
  for (auto& [k, w] : terms_) s.add(w * detail::kernel(k, r_, x));
  if (analytic_) {
    s.add(analytic_excess(x));
  } else {
    s.add(-1.0);
  }
  return s.value();
}

double GEvalContext::fort_map(double p, double x, int s) const {
  if (p >= 1.0) return 0.0;
  CompensatedSum sum;
  double px = 1.0 - x;
  for (auto* list : {&below_, &terms_}) {
    for (auto& [k, w] : *list) sum.add(w * binomial_lower_tail(k, px, x, s - 1));
  }
  if (analytic_ && x > 0.0) sum.add(x * analytic_sum(s, x));
  return (1.0 - p) * sum.value();
}

GValue G(const GEvalContext& ctx, double x) {
  require(x >= 0.0 && x <= 1.0, "G requires x in [0,1]");
  return {ctx.value(x), ctx.error_bound()};
}

double h(const GEvalContext& ctx, double p, double x) {
  require(p >= 0.0 && p <= 1.0, "h requires p in [0,1]");
  require(x >= 0.0 && x <= 1.0, "h requires x in [0,1]");
  return ctx.fort_map(p, x, ctx.r());
}

double h_with_threshold(const GEvalContext& ctx, double p, double x, int s) {
  require(s >= 1 && s <= ctx.r(), "threshold s must lie in [1, r]");
  require(p >= 0.0 && p <= 1.0, "h requires p in [0,1]");
  require(x >= 0.0 && x <= 1.0, "h requires x in [0,1]");
  return ctx.fort_map(p, x, s);
}

MaxResult max_G(const GEvalContext& ctx) {
  const GOptions& o = ctx.options();
  const std::int64_t n = std::max<std::int64_t>(2, static_cast<std::int64_t>(std::llround(1.0 / o.grid_step)));
  std::vector<double> xs(n + 1), es(n + 1);
  for (std::int64_t i = 0; i <= n; ++i) {
    xs[i] = i == n ? 1.0 : static_cast<double>(i) / static_cast<double>(n);
    es[i] = ctx.excess(xs[i]);
  }

  std::vector<std::int64_t> peaks;
  for (std::int64_t i = 0; i <= n; ++i) {
    bool left = i == 0 || es[i] >= es[i - 1];
    bool right = i == n || es[i] >= es[i + 1];
    if (left && right) peaks.push_back(i);
  }
  std::stable_sort(peaks.begin(), peaks.end(), [&](auto a, auto b) { return es[a] > es[b]; });
  if (peaks.size() > static_cast<std::size_t>(o.max_brackets)) peaks.resize(o.max_brackets);

  struct Candidate {
    double x, e, width;
  };
  std::vector<Candidate> cands;
  cands.push_back({0.0, es[0], 0.0});
  cands.push_back({1.0, es[n], 0.0});
  auto f = [&ctx](double x) { return ctx.excess(x); };
  for (auto i : peaks) {
    double a = xs[std::max<std::int64_t>(0, i - 1)];
    double b = xs[std::min(n, i + 1)];
    GoldenResult gr = golden_section_maximize(f, a, b, o.bracket_tol);
    cands.push_back({gr.x, gr.value, gr.width});
    cands.push_back({xs[i], es[i], 0.0});
  }

  double best = -INFINITY;
  for (auto& c : cands) best = std::max(best, c.e);
  // Smallest x within rounding of the best value.
  double tie = 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(best));
  const Candidate* pick = nullptr;
  for (auto& c : cands) {
    if (c.e >= best - tie && (!pick || c.x < pick->x)) pick = &c;
  }

  MaxResult res;
  res.x_star = pick->x;
  // The true G(1) is 1; only truncation can push the maximum below it.
  res.excess = ctx.pc_is_one() ? pick->e : std::max(0.0, pick->e);
  res.M = 1.0 + res.excess;
  res.bracket_width = pick->width;
  res.error = ctx.error_bound() + 1e-14 * res.M;
  return res;
}

}  // namespace gwbp
