#include "gwbp/simtree.hpp"

#include "gwbp/error.hpp"
#include "gwbp/philox.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace gwbp {

namespace {
constexpr std::uint64_t kMarkStream = 0x6d61726b73ULL;
}

VertexDraw vertex_draw(std::uint64_t seed, std::uint64_t replicate, std::uint64_t key) {
  UniformPair u = philox_uniforms(seed, replicate, key);
  return {1.0 - u.first, u.second};
}

std::uint64_t child_key(std::uint64_t parent_key, std::int64_t index) {
  return splitmix64(parent_key + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(index + 1));
}

SampledTree sample_tree(const OffspringDistribution& d, int depth, std::int64_t budget,
                        std::uint64_t seed, std::uint64_t replicate) {
  require(depth >= 0, "depth must be >= 0");
  require(budget >= 1, "budget must be >= 1");
  SampledTree t;
  t.depth_cap = depth;
  t.budget = budget;
  t.seed = seed;
  t.replicate = replicate;
  std::vector<std::uint64_t> keys;
  auto add = [&](std::uint64_t key, std::int64_t parent, int dep) {
    keys.push_back(key);
    t.child_count.push_back(0);
    t.first_child.push_back(0);
    t.parent.push_back(parent);
    t.depth.push_back(dep);
    t.mark_uniform.push_back(vertex_draw(seed, replicate, key).mark_uniform);
  };
  add(kRootKey, -1, 0);
  for (std::int64_t v = 0; v < t.size(); ++v) {
    if (t.depth[v] >= depth) continue;
    std::int64_t k = d.quantile(vertex_draw(seed, replicate, keys[v]).child_uniform);
    if (t.size() + k > budget) {
      t.truncated = true;
      break;
    }
    t.first_child[v] = t.size();
    t.child_count[v] = k;
    for (std::int64_t j = 0; j < k; ++j) add(child_key(keys[v], j), v, t.depth[v] + 1);
  }
  return t;
}

InfectionMark marks_from_tree(const SampledTree& t, double p) {
  require(p >= 0.0 && p <= 1.0, "p must lie in [0,1]");
  require(static_cast<std::int64_t>(t.mark_uniform.size()) == t.size(), "tree carries no mark uniforms");
  InfectionMark m;
  m.p = p;
  m.seed = t.seed;
  m.infected.resize(t.mark_uniform.size());
  for (std::size_t v = 0; v < t.mark_uniform.size(); ++v) m.infected[v] = t.mark_uniform[v] < p;
  return m;
}

InfectionMark random_marks(const SampledTree& t, double p, std::uint64_t seed) {
  require(p >= 0.0 && p <= 1.0, "p must lie in [0,1]");
  InfectionMark m;
  m.p = p;
  m.seed = seed;
  m.infected.resize(static_cast<std::size_t>(t.size()));
  for (std::int64_t v = 0; v < t.size(); ++v) {
    m.infected[v] = philox_uniforms(seed, kMarkStream, static_cast<std::uint64_t>(v)).first < p;
  }
  return m;
}

BootstrapResult run_bootstrap(const SampledTree& t, const InfectionMark& m, int r) {
  require(static_cast<std::int64_t>(m.infected.size()) == t.size(), "marks must cover all vertices");
  require(r >= 1, "r must be >= 1");
  const std::int64_t n = t.size();
  BootstrapResult res;
  res.infected = m.infected;
  std::vector<int> count(static_cast<std::size_t>(n), 0);
  std::vector<std::int64_t> frontier;
  for (std::int64_t v = 0; v < n; ++v)
    if (res.infected[v]) frontier.push_back(v);

  std::vector<std::int64_t> next;
  auto touch = [&](std::int64_t u) {
    if (res.infected[u]) return;
    if (++count[u] == r) next.push_back(u);
  };
  while (!frontier.empty()) {
    next.clear();
    for (std::int64_t v : frontier) {
      if (t.parent[v] >= 0) touch(t.parent[v]);
      for (std::int64_t c = t.first_child[v]; c < t.first_child[v] + t.child_count[v]; ++c) touch(c);
    }
    if (next.empty()) break;
    for (std::int64_t u : next) res.infected[u] = 1;
    ++res.rounds;
    frontier.swap(next);
  }
  return res;
}

bool root_fort_status(const SampledTree& t, const InfectionMark& m, int r) {
  require(static_cast<std::int64_t>(m.infected.size()) == t.size(), "marks must cover all vertices");
  std::vector<std::uint8_t> safe(static_cast<std::size_t>(t.size()));
  for (std::int64_t v = t.size() - 1; v >= 0; --v) {
    if (m.infected[v]) continue;
    std::int64_t unsafe = 0;
    for (std::int64_t c = t.first_child[v]; c < t.first_child[v] + t.child_count[v]; ++c) unsafe += !safe[c];
    safe[v] = unsafe <= r - 1;
  }
  return safe[0];
}

namespace {

struct LazyWalker {
  const OffspringDistribution& d;
  int r;
  double p;
  int n;
  std::uint64_t seed;
  std::uint64_t replicate;
  std::int64_t budget;
  std::int64_t visited = 0;
  bool truncated = false;

  bool safe(std::uint64_t key, int depth) {
    if (++visited > budget) {
      truncated = true;
      return false;
    }
    VertexDraw draw = vertex_draw(seed, replicate, key);
    if (draw.mark_uniform < p) return false;
    if (depth == n) return true;
    std::int64_t k = d.quantile(draw.child_uniform);
    std::int64_t unsafe = 0;
    for (std::int64_t j = 0; j < k; ++j) {
      // Settled once r children fail or too few remain to reach r.
      if (unsafe + (k - j) < r) return true;
      if (!safe(child_key(key, j), depth + 1)) {
        if (truncated) return false;
        if (++unsafe >= r) return false;
      }
    }
    return true;
  }
};

}  // namespace

std::optional<bool> replicate_root_safe(const OffspringDistribution& d, int r, double p, int n,
                                        std::uint64_t seed, std::uint64_t replicate,
                                        std::int64_t budget) {
  LazyWalker w{d, r, p, n, seed, replicate, budget};
  bool s = w.safe(kRootKey, 0);
  if (w.truncated) return std::nullopt;
  return s;
}

SimEstimate estimate_qn(const OffspringDistribution& d, int r, double p, int n, std::int64_t replicates,
                        std::uint64_t seed, const SimOptions& opts) {
  require(p >= 0.0 && p <= 1.0, "p must lie in [0,1]");
  require(replicates >= 1, "replicates must be >= 1");
  require(n >= 0, "n must be >= 0");
  require(r >= 1, "r must be >= 1");
  require(opts.budget >= 1, "budget must be >= 1");
  unsigned workers = opts.workers ? opts.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::int64_t>(workers, replicates));

  struct Tally {
    std::int64_t ok = 0, safe = 0, truncated = 0;
  };
  std::vector<Tally> tallies(workers);
  auto run = [&](unsigned w) {
    std::int64_t lo = replicates * w / workers;
    std::int64_t hi = replicates * (w + 1) / workers;
    Tally& t = tallies[w];
    for (std::int64_t i = lo; i < hi; ++i) {
      auto s = replicate_root_safe(d, r, p, n, seed, static_cast<std::uint64_t>(i), opts.budget);
      if (!s) {
        ++t.truncated;
        continue;
      }
      ++t.ok;
      t.safe += *s;
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& th : pool) th.join();
  }
  SimEstimate est;
  est.seed = seed;
  for (auto& t : tallies) {
    est.replicates += t.ok;
    est.successes += t.safe;
    est.truncated += t.truncated;
  }
  if (est.replicates == 0) {
    est.estimate = std::nan("");
    est.standard_error = std::nan("");
    return est;
  }
  double q = static_cast<double>(est.successes) / static_cast<double>(est.replicates);
  est.estimate = q;
  est.standard_error = std::sqrt(q * (1.0 - q) / static_cast<double>(est.replicates));
  return est;
}

}  // namespace gwbp
