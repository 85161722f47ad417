#pragma once

#include "gwbp/critical.hpp"
#include "gwbp/dist.hpp"

#include <optional>
#include <string>
#include <vector>

namespace gwbp {

enum class BoundKind { lower, upper };

struct BoundEntry {
  std::string name;
  BoundKind kind = BoundKind::lower;
  // Clamped to [0, 1].
  double value = 0.0;
  double raw = 0.0;
  bool valid = true;
  // Set when an infinite moment makes the bound trivial.
  bool vacuous = false;
  // Formula the value comes from.
  std::string source;
};

struct BoundsReport {
  std::string spec;
  int r = 0;
  std::vector<BoundEntry> entries;
  std::optional<CriticalResult> reference;

  // Names of valid bounds contradicting the reference beyond tol.
  std::vector<std::string> violations(double tol = 1e-8) const;
};

BoundEntry lb_branching_exact(const OffspringDistribution& d, int r);
BoundEntry lb_branching_simplified(double b, int r);
BoundEntry ub_pruned(int r, double b);
BoundEntry lb_alpha_moment(const OffspringDistribution& d, int r, double alpha);
BoundEntry lb_fort(const OffspringDistribution& d);
BoundEntry ub_fort(const OffspringDistribution& d);
BoundEntry ub_fort_inverse_square(const OffspringDistribution& d);
BoundEntry lb_second_moment(const OffspringDistribution& d);
BoundEntry lb_second_moment_weak(const OffspringDistribution& d);
BoundEntry ub_regular_rd(std::int64_t d_reg, int r);

struct AlphaConstants {
  double c_prime;
  double c_double_prime;
  // ((r-1)/r) min(c', c'').
  double c;
};

AlphaConstants alpha_moment_constants(int r, double alpha);

// (max_x g_k^r(x) - 1) k^(r/(r-1)).
double shape_constant(std::int64_t k, int r);

struct BoundsOptions {
  std::vector<double> alphas = {0.25, 0.5, 0.75};
  GOptions g;
};

BoundsReport bounds_report(const OffspringDistribution& d, int r, const BoundsOptions& opts = {});

}  // namespace gwbp
