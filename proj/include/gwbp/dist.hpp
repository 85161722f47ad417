#pragma once

#include "gwbp/numeric.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gwbp {

enum class Family {
  regular,
  two_point,
  shifted_poisson,
  shifted_geometric,
  heavy_tail,
  pruned,
  explicit_pmf,
};

std::string family_name(Family f);

struct PmfEntry {
  std::int64_t k = 0;
  Number probability;
};

struct DistributionSpec {
  Family family = Family::regular;
  // Mean parameter b for regular, two_point, shifted families and pruned.
  Number b;
  // Large support point of two_point.
  std::int64_t a = 0;
  // Tail exponent parameter of heavy_tail and pruned.
  int r = 0;
  std::vector<PmfEntry> pmf;

  static DistributionSpec regular(std::int64_t b);
  static DistributionSpec two_point(std::int64_t b, std::int64_t a);
  static DistributionSpec two_point(Number b, std::int64_t a);
  static DistributionSpec shifted_poisson(Number b);
  static DistributionSpec shifted_geometric(Number b);
  static DistributionSpec heavy_tail(int r);
  static DistributionSpec pruned(int r, Number b);
  static DistributionSpec explicit_pmf(std::vector<PmfEntry> entries);

  // Canonical text form accepted by parse_distribution_spec.
  std::string to_string() const;
};

// Grammar: family ":" key "=" value ("," key "=" value)*, case-insensitive.
DistributionSpec parse_distribution_spec(std::string_view text);

// Parameters of the pruned heavy-tail law.
struct PrunedParams {
  int r = 0;
  std::int64_t k0 = 0;
  std::int64_t k1 = 0;
  HighFloat b;
  HighFloat A;
  HighFloat alpha;
  // b minus the mean carried by the heavy-tail weights on [r, k1].
  HighFloat unallocated_mean;
};

// Extended-real moment: finite value or +infinity.
struct Moment {
  double value = 0.0;
  bool infinite = false;

  static Moment finite(double v) { return {v, false}; }
  static Moment inf() { return {0.0, true}; }
};

namespace detail {
struct DistData;
}

class OffspringDistribution {
 public:
  const DistributionSpec& spec() const;
  Family family() const;

  double pmf(std::int64_t k) const;
  // Exact pmf where the family has rational probabilities.
  std::optional<Rational> pmf_exact(std::int64_t k) const;
  // T(m) = P(xi > m).
  double tail(std::int64_t m) const;
  std::int64_t support_min() const;
  std::optional<std::int64_t> support_max() const;
  // P(xi < s).
  double mass_below(std::int64_t s) const;

  // Atoms (k, pmf(k)) in increasing k for finite-support families other
  // than pruned; empty otherwise.
  const std::vector<std::pair<std::int64_t, double>>& atoms() const;

  // Smallest K >= support_min with T(K) <= eps.
  std::int64_t cutoff_for_tail(double eps) const;

  // Smallest m >= support_min with T(m) < v, for v in (0, 1]. Drawing v
  // uniformly from (0, 1] yields a sample of the law.
  std::int64_t quantile(double v) const;

  // Parameters of heavy-tail based families: the lower support point and
  // tail parameter r0 with weights (r0-1)/(k(k-1)).
  bool is_heavy_based() const;
  const PrunedParams* pruned() const;

 private:
  friend OffspringDistribution make_distribution(const DistributionSpec& spec);
  friend OffspringDistribution prune_eta(int r, const Number& b);
  explicit OffspringDistribution(std::shared_ptr<const detail::DistData> data);

  std::shared_ptr<const detail::DistData> data_;
};

OffspringDistribution make_distribution(const DistributionSpec& spec);

// eta_{r,b}: the heavy-tail law truncated at k1 with mass reassigned at r
// and 2r+1 so that the mean equals b.
OffspringDistribution prune_eta(int r, const Number& b);
inline OffspringDistribution prune_eta(int r, double b) { return prune_eta(r, Number::from_double(b)); }

// Validity threshold (r-1) log(4 e r) for pruning.
double pruning_threshold(int r);

Moment mean(const OffspringDistribution& d);
Moment second_factorial_moment(const OffspringDistribution& d);
// E(xi^(1+alpha)), alpha in (0, 1].
Moment alpha_moment(const OffspringDistribution& d, double alpha);
// E(H_{xi-r}).
double harmonic_tail_moment(const OffspringDistribution& d, int r);
// E(1 / ((xi-1)(2 xi-3))).
double fort_upper_moment(const OffspringDistribution& d);
// E(4 / xi^2).
double inverse_square_moment(const OffspringDistribution& d);

enum class TailMode { unnormalized, renormalized };

class TruncatedDistribution {
 public:
  TruncatedDistribution(OffspringDistribution base, std::int64_t cutoff,
                        TailMode mode = TailMode::unnormalized);

  const OffspringDistribution& base() const { return base_; }
  std::int64_t cutoff() const { return cutoff_; }
  double retained_mass() const { return retained_; }
  double discarded_mass() const { return discarded_; }
  TailMode mode() const { return mode_; }
  double weight(std::int64_t k) const;

 private:
  OffspringDistribution base_;
  std::int64_t cutoff_;
  TailMode mode_;
  double retained_;
  double discarded_;
};

}  // namespace gwbp
