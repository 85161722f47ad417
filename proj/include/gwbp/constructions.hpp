#pragma once

#include "gwbp/numeric.hpp"
#include "gwbp/simtree.hpp"

#include <cstdint>
#include <vector>

namespace gwbp {

// Alternating blocks: d-ary blocks of depth n_seq[i] followed by b-ary
// blocks of depth m_seq[i]. The first vertex level of every block has one
// extra child.
struct LayeredTreeSpec {
  std::int64_t d = 0;
  std::int64_t b = 0;
  std::vector<int> n_seq;
  std::vector<int> m_seq;

  // Total depth sum_i (n_i + m_i).
  std::int64_t total_depth() const;
  // Children of each vertex at level t.
  std::int64_t children_at(std::int64_t level) const;
};

SampledTree build_layered_tree(const LayeredTreeSpec& spec, int depth_cap,
                               std::int64_t budget = 10000000);

struct LevelGrowth {
  std::vector<BigInt> sizes;     // |L_n|, n = 0..L
  std::vector<double> root_growth;  // |L_n|^(1/n), n = 1..L (index 0 unused)
};

LevelGrowth level_growth(const LayeredTreeSpec& spec, int levels);

// prod_{i<ell} (d+1) d^{n_i-1} (b+1) b^{m_i-1}: the size of level
// t_ell = sum_{i<ell} (n_i + m_i).
BigInt block_end_level_size(const LayeredTreeSpec& spec, int ell);

// Probability that the root of T_d^n stays healthy (complement of the curve).
double root_healthy_probability(std::int64_t d, int r, double p, int n);
std::vector<double> root_infection_curve(std::int64_t d, int r, double p, const std::vector<int>& n_list);

struct VerifyOptions {
  std::int64_t grid = 100000;
  int max_refine = 60;
};

// Whether P(Bin(d, (1-x)(1-p)) >= d-r+1) < 1-x holds for every x in [0,1).
bool verify_no_fixed_point(std::int64_t d, int r, double p, const VerifyOptions& opts = {});

struct LayeredLevel {
  int n = 0;
  int m = 0;
  double log_vertices = 0.0;   // log N_ell, N_ell = |L_{t_ell}|
  double healthy = 0.0;        // root-healthy probability of a T_d^{n_ell} block
  double all_infected = 0.0;   // lower bound (1 - healthy)^{N_ell}
};

struct LayeredDesign {
  LayeredTreeSpec spec;
  std::vector<LayeredLevel> levels;
};

// Chooses d > max(r/p, b), then for each level the least n_ell with
// (1 - healthy)^{N_ell} >= 1/2 and the least m_ell >= ell^2 with
// (d/b)^{sum n / t_{ell+1}} <= 1 + 2^{-ell}.
LayeredDesign design_layered_spec(int r, std::int64_t b, double p, int levels);

}  // namespace gwbp
