#pragma once

#include "gwbp/dist.hpp"
#include "gwbp/gfunc.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gwbp {

enum class PcMethod { mass_below_r, maximization, closed_form };

std::string method_name(PcMethod m);

struct CriticalResult {
  double pc = 1.0;
  // Maximizer of G; NaN when p_c = 1 because of mass below r.
  double x_star = 0.0;
  // Maximum of G; +inf when p_c = 1 because of mass below r.
  double M = 1.0;
  PcMethod method = PcMethod::maximization;
  double error = 0.0;
};

CriticalResult pc_exact(const OffspringDistribution& d, int r, const GOptions& opts = {});
CriticalResult pc_exact(const GEvalContext& ctx);

std::optional<CriticalResult> pc_closed_form(const DistributionSpec& spec, int r);

struct QTrace {
  double p = 0.0;
  int r = 0;
  std::vector<double> q;
  bool converged = false;
  double limit_estimate = 0.0;
};

QTrace q_iterate(const OffspringDistribution& d, int r, double p, int n);
QTrace q_iterate(const GEvalContext& ctx, double p, int n);

struct QLimit {
  double estimate = 0.0;
  // Interval guaranteed to contain the limit of the monotone iteration.
  double lower = 0.0;
  double upper = 1.0;
  bool converged = false;
  std::int64_t iterations = 0;
};

QLimit q_limit(const OffspringDistribution& d, int r, double p, double tol,
               std::int64_t max_iter = 1000000);
QLimit q_limit(const GEvalContext& ctx, double p, double tol, std::int64_t max_iter = 1000000);

// (1 - 1/r) ((r-1)! / b^r)^(1/(r-1)).
double pc_regular_asymptotic(std::int64_t b, int r);

}  // namespace gwbp
