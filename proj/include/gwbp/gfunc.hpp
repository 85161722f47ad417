#pragma once

#include "gwbp/dist.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace gwbp {

// g_k^r(x) = P(Bin(k, 1-x) <= r-1) / x, with the polynomial limit at x = 0.
double g(std::int64_t k, int r, double x);

namespace detail {
// g_k^r for any r >= 1 (g_k^1(x) = x^(k-1)).
double kernel(std::int64_t k, int r, double x);
// sum_{k>m} (s-1)/(k(k-1)) g_k^s(x) for s >= 2, m >= s - 1.
double heavy_kernel_tail(int s, std::int64_t m, double x);
}  // namespace detail

struct GOptions {
  // Tail mass at which infinite light-tailed supports are cut.
  double tail_target = 1e-14;
  double grid_step = 1e-3;
  double bracket_tol = 1e-12;
  // Golden-section refinements per maximization, best grid values first.
  int max_brackets = 64;
};

struct GValue {
  double value;
  double error;
};

// Evaluation context for G_xi^r over the law truncated at cutoff(). Heavy
// tail based laws are summed through closed-form tail sums of g, so their
// huge supports are never enumerated.
class GEvalContext {
 public:
  GEvalContext(OffspringDistribution d, int r, GOptions opts = {});

  const OffspringDistribution& distribution() const { return dist_; }
  int r() const { return r_; }
  std::int64_t cutoff() const { return cutoff_; }
  // Bound on |G_true - G_computed|.
  double error_bound() const { return eps_; }
  double tail_mass() const { return tail_; }
  bool pc_is_one() const { return pc_one_; }
  const GOptions& options() const { return opts_; }

  // G(x) - 1, evaluated so that values near zero keep relative accuracy.
  double excess(double x) const;
  double value(double x) const { return 1.0 + excess(x); }
  // (1-p) * sum_k w_k P(Bin(k, 1-x) <= s-1).
  double fort_map(double p, double x, int s) const;

 private:
  // sum_{k=lo}^{hi} (r0-1)/(k(k-1)) g_k^s(x), and the same minus its
  // total mass when s == r.
  double analytic_sum(int s, double x) const;
  double analytic_excess(double x) const;

  OffspringDistribution dist_;
  int r_;
  GOptions opts_;
  std::int64_t cutoff_ = 0;
  double eps_ = 0.0;
  double tail_ = 0.0;
  bool pc_one_ = false;
  // Atoms enumerated explicitly, with k < r first.
  std::vector<std::pair<std::int64_t, double>> below_;
  std::vector<std::pair<std::int64_t, double>> terms_;
  // Mass of all enumerated atoms plus the analytic block.
  double total_mass_ = 0.0;
  bool analytic_ = false;
  int r0_ = 0;
  std::int64_t lo_ = 0;
  std::int64_t hi_ = 0;
};

GValue G(const GEvalContext& ctx, double x);
double h(const GEvalContext& ctx, double p, double x);
double h_with_threshold(const GEvalContext& ctx, double p, double x, int s);

struct MaxResult {
  double x_star = 0.0;
  double M = 1.0;
  // M - 1 computed directly.
  double excess = 0.0;
  double bracket_width = 0.0;
  double error = 0.0;
};

MaxResult max_G(const GEvalContext& ctx);

}  // namespace gwbp
