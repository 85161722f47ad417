#pragma once

#include "gwbp/dist.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace gwbp {

// Rooted finite tree in breadth-first order. Children of vertex v occupy
// indices [first_child[v], first_child[v] + child_count[v]).
struct SampledTree {
  std::vector<std::int64_t> child_count;
  std::vector<std::int64_t> first_child;
  std::vector<std::int64_t> parent;
  std::vector<int> depth;
  // Per-vertex uniform used to threshold infection marks; empty for
  // deterministic trees.
  std::vector<double> mark_uniform;
  int depth_cap = 0;
  std::int64_t budget = 0;
  bool truncated = false;
  std::uint64_t seed = 0;
  std::uint64_t replicate = 0;

  std::int64_t size() const { return static_cast<std::int64_t>(child_count.size()); }
};

struct InfectionMark {
  std::vector<std::uint8_t> infected;
  double p = 0.0;
  std::uint64_t seed = 0;
};

// Random draws of a vertex: child count uniform and mark uniform.
struct VertexDraw {
  double child_uniform;  // in (0, 1]
  double mark_uniform;   // in [0, 1)
};

VertexDraw vertex_draw(std::uint64_t seed, std::uint64_t replicate, std::uint64_t key);
std::uint64_t child_key(std::uint64_t parent_key, std::int64_t index);
constexpr std::uint64_t kRootKey = 0;

// Generates T^n in breadth-first order. Vertices and marks are drawn from the
// same per-vertex stream as the lazy estimator, so both see the same tree.
SampledTree sample_tree(const OffspringDistribution& d, int depth, std::int64_t budget,
                        std::uint64_t seed, std::uint64_t replicate = 0);

// Marks infected[v] = mark_uniform[v] < p (common random numbers across p).
InfectionMark marks_from_tree(const SampledTree& t, double p);
// Independent Bernoulli(p) marks from a separate stream.
InfectionMark random_marks(const SampledTree& t, double p, std::uint64_t seed);

struct BootstrapResult {
  std::vector<std::uint8_t> infected;
  std::int64_t rounds = 0;
};

BootstrapResult run_bootstrap(const SampledTree& t, const InfectionMark& m, int r);

// Whether the root lies in an initially healthy (r-1)-fort of t.
bool root_fort_status(const SampledTree& t, const InfectionMark& m, int r);

struct SimOptions {
  std::int64_t budget = 10000000;
  // 0 means one worker per hardware thread.
  unsigned workers = 0;
};

struct SimEstimate {
  double estimate = 0.0;
  // Replicates that finished within budget.
  std::int64_t replicates = 0;
  std::int64_t truncated = 0;
  std::int64_t successes = 0;
  double standard_error = 0.0;
  std::uint64_t seed = 0;
};

// Root-safety of one replicate by lazy depth-first generation;
// nullopt when the budget ran out.
std::optional<bool> replicate_root_safe(const OffspringDistribution& d, int r, double p, int n,
                                        std::uint64_t seed, std::uint64_t replicate,
                                        std::int64_t budget);

SimEstimate estimate_qn(const OffspringDistribution& d, int r, double p, int n, std::int64_t replicates,
                        std::uint64_t seed, const SimOptions& opts = {});

}  // namespace gwbp
