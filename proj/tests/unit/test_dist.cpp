#include "gwbp/dist.hpp"
#include "gwbp/error.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace gwbp;

namespace {

OffspringDistribution dist(const std::string& text) { return make_distribution(parse_distribution_spec(text)); }

std::vector<std::string> family_grid() {
  return {"regular:b=2",      "regular:b=7",     "twopoint:b=4,a=9", "twopoint:b=7/2,a=11",
          "poisson:b=3",      "poisson:b=12.5",  "geometric:b=3",    "geometric:b=20",
          "heavy:r=2",        "heavy:r=4",       "pruned:r=2,b=5",   "pruned:r=3,b=12",
          "pmf:2=0.5,4=0.5",  "pmf:1=1/3,5=2/3"};
}

// k * f(k) summed until the tail mass drops below 1e-15.
struct BruteMoments {
  double mean = 0, fact2 = 0, second = 0;
};

BruteMoments brute(const OffspringDistribution& d) {
  BruteMoments m;
  std::int64_t top = d.cutoff_for_tail(1e-16);
  for (std::int64_t k = top; k >= d.support_min(); --k) {
    double f = d.pmf(k), kk = static_cast<double>(k);
    m.mean += kk * f;
    m.fact2 += kk * (kk - 1) * f;
    m.second += kk * kk * f;
  }
  return m;
}

}  // namespace

TEST_CASE("make_distribution examples") {
  OffspringDistribution reg = make_distribution(DistributionSpec::regular(3));
  CHECK(reg.pmf(3) == 1.0);
  CHECK(reg.pmf(2) == 0.0);
  CHECK(reg.pmf(4) == 0.0);

  OffspringDistribution tp = make_distribution(DistributionSpec::two_point(4, 9));
  CHECK(*tp.pmf_exact(2) == Rational(5, 7));
  CHECK(*tp.pmf_exact(9) == Rational(2, 7));
  CHECK(tp.pmf(5) == 0.0);

  OffspringDistribution heavy = make_distribution(DistributionSpec::heavy_tail(2));
  CHECK(heavy.pmf(2) == doctest::Approx(0.5));
  CHECK(heavy.pmf(3) == doctest::Approx(1.0 / 6));
  CHECK(heavy.pmf(4) == doctest::Approx(1.0 / 12));
  CHECK(heavy.pmf(1) == 0.0);
}

TEST_CASE("invalid specs are rejected") {
  CHECK_THROWS_AS(dist("pmf:0=0.5,3=0.5"), Error);
  CHECK_THROWS_AS(dist("pmf:2=-0.5,3=1.5"), Error);
  CHECK_THROWS_AS(dist("pmf:2=0.5,3=0.4"), Error);
  CHECK_THROWS_AS(dist("twopoint:b=9,a=4"), Error);
  CHECK_THROWS_AS(dist("twopoint:b=2,a=4"), Error);
  CHECK_THROWS_AS(dist("poisson:b=2"), Error);
  CHECK_THROWS_AS(dist("geometric:b=1.5"), Error);
  CHECK_THROWS_AS(dist("heavy:r=1"), Error);
  CHECK_THROWS_AS(parse_distribution_spec("cauchy:b=3"), Error);
  CHECK_THROWS_AS(parse_distribution_spec("regular"), Error);
  CHECK_THROWS_AS(parse_distribution_spec("regular:b=3,c=1"), Error);
  try {
    dist("pmf:0=0.5,3=0.5");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::precondition);
  }
  try {
    parse_distribution_spec("regular:bb");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::parse);
  }
}

TEST_CASE("spec strings parse case-insensitively and round-trip") {
  for (const std::string& text : family_grid()) {
    DistributionSpec s = parse_distribution_spec(text);
    DistributionSpec t = parse_distribution_spec(s.to_string());
    CHECK(t.to_string() == s.to_string());
  }
  CHECK(parse_distribution_spec("REGULAR:B=5").to_string() == parse_distribution_spec("regular:b=5").to_string());
  CHECK(parse_distribution_spec("TwoPoint:b=4,A=9").a == 9);
  CHECK(*parse_distribution_spec("poisson:b=13/2").b.exact == Rational(13, 2));
}

TEST_CASE("mean examples") {
  CHECK(mean(make_distribution(DistributionSpec::regular(5))).value == 5.0);
  Moment g = mean(dist("geometric:b=4"));
  CHECK_FALSE(g.infinite);
  CHECK(g.value == doctest::Approx(4.0).epsilon(1e-13));
  CHECK(mean(dist("heavy:r=2")).infinite);
  CHECK(mean(dist("poisson:b=6")).value == doctest::Approx(6.0).epsilon(1e-13));
  CHECK(mean(dist("twopoint:b=4,a=9")).value == doctest::Approx(4.0).epsilon(1e-15));
}

TEST_CASE("second factorial moment examples") {
  CHECK(second_factorial_moment(dist("regular:b=3")).value == 6.0);
  for (double b : {3.0, 4.5, 10.0, 20.0}) {
    std::string bs = std::to_string(b);
    CHECK(second_factorial_moment(dist("poisson:b=" + bs)).value == doctest::Approx(b * b - 2).epsilon(1e-12));
    CHECK(second_factorial_moment(dist("geometric:b=" + bs)).value ==
          doctest::Approx(2 * (b - 1) * (b - 1)).epsilon(1e-12));
  }
  CHECK(second_factorial_moment(dist("heavy:r=3")).infinite);
}

TEST_CASE("alpha moment examples") {
  CHECK(alpha_moment(dist("regular:b=4"), 1.0).value == doctest::Approx(16.0));
  CHECK(alpha_moment(dist("regular:b=5"), 0.5).value == doctest::Approx(std::pow(5.0, 1.5)));
  CHECK(alpha_moment(dist("pmf:2=0.5,4=0.5"), 1.0).value == doctest::Approx(10.0));
  CHECK(alpha_moment(dist("heavy:r=2"), 0.5).infinite);
  CHECK(alpha_moment(dist("heavy:r=2"), 0.01).infinite);
  CHECK_THROWS_AS(alpha_moment(dist("regular:b=4"), 0.0), Error);
  CHECK_THROWS_AS(alpha_moment(dist("regular:b=4"), 1.5), Error);
}

TEST_CASE("heavy_tail partial sums of k^alpha pmf grow without bound") {
  // The k-th summand of E(xi^{1.5}) is ~ k^{-0.5}, so doubling the range
  // multiplies the partial sum by about sqrt(2).
  OffspringDistribution d = dist("heavy:r=2");
  auto partial = [&](std::int64_t m) {
    double s = 0;
    for (std::int64_t k = 2; k <= m; ++k) s += std::pow(static_cast<double>(k), 1.5) * d.pmf(k);
    return s;
  };
  double a = partial(100000), b = partial(200000);
  CHECK(b / a > 1.35);
}

TEST_CASE("harmonic tail moment examples") {
  CHECK(harmonic_tail_moment(dist("regular:b=3"), 2) == doctest::Approx(1.0));
  for (int r = 2; r <= 6; ++r) CHECK(harmonic_tail_moment(make_distribution(DistributionSpec::regular(r)), r) == 0.0);
  CHECK(harmonic_tail_moment(dist("pmf:2=0.5,4=0.5"), 2) == doctest::Approx(0.75));
  CHECK_THROWS_AS(harmonic_tail_moment(dist("regular:b=3"), 4), Error);
  // Brute force for a light-tailed family.
  OffspringDistribution po = dist("poisson:b=5");
  double ref = 0;
  for (std::int64_t k = po.cutoff_for_tail(1e-18); k >= 2; --k) ref += harmonic(k - 2) * po.pmf(k);
  CHECK(harmonic_tail_moment(po, 2) == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("fort upper moment examples") {
  CHECK(fort_upper_moment(dist("regular:b=2")) == doctest::Approx(1.0));
  CHECK(fort_upper_moment(dist("regular:b=3")) == doctest::Approx(1.0 / 6));
  // Partial sum to K plus the tail bound sum_{k>K} 2 k^-4 <= 2/(3 K^3).
  double partial = 0;
  const std::int64_t K = 20000;
  for (std::int64_t k = K; k >= 2; --k) {
    double kk = static_cast<double>(k);
    partial += 1.0 / (kk * (kk - 1) * (kk - 1) * (2 * kk - 3));
  }
  double got = fort_upper_moment(dist("heavy:r=2"));
  CHECK(got >= partial - 1e-15);
  CHECK(got <= partial + 2.0 / (3.0 * std::pow(static_cast<double>(K), 3)) + 1e-15);
  CHECK(got == doctest::Approx(0.5367917479782943886).epsilon(1e-13));
  CHECK_THROWS_AS(fort_upper_moment(dist("pmf:1=0.5,3=0.5")), Error);
}

TEST_CASE("pmf plus tail sums to one on every family") {
  for (const std::string& text : family_grid()) {
    CAPTURE(text);
    OffspringDistribution d = dist(text);
    double cum = 0;
    for (std::int64_t m = 1; m <= 200; ++m) {
      cum += d.pmf(m);
      CHECK(std::abs(cum + d.tail(m) - 1.0) <= 1e-12);
      CHECK(d.pmf(m) >= 0.0);
    }
    CHECK(d.tail(d.support_min() - 1) == doctest::Approx(1.0));
  }
}

TEST_CASE("heavy_tail closed-form tail") {
  for (int r = 2; r <= 5; ++r) {
    OffspringDistribution d = make_distribution(DistributionSpec::heavy_tail(r));
    Rational cum = 0;
    for (std::int64_t m = r; m <= 300; ++m) {
      cum += *d.pmf_exact(m);
      CHECK(cum == 1 - Rational(r - 1, m));
      CHECK(d.tail(m) == doctest::Approx(static_cast<double>(r - 1) / static_cast<double>(m)));
    }
    CHECK(d.tail(1000000000) == doctest::Approx((r - 1) * 1e-9));
  }
}

TEST_CASE("moments match brute-force summation") {
  for (const std::string& text :
       {"poisson:b=3", "poisson:b=9.5", "geometric:b=3", "geometric:b=12", "twopoint:b=7/2,a=11", "regular:b=9",
        "pmf:2=0.25,3=0.5,10=0.25", "pruned:r=2,b=5"}) {
    CAPTURE(text);
    OffspringDistribution d = dist(text);
    BruteMoments b = brute(d);
    CHECK(mean(d).value == doctest::Approx(b.mean).epsilon(1e-9));
    CHECK(second_factorial_moment(d).value == doctest::Approx(b.fact2).epsilon(1e-9));
    CHECK(alpha_moment(d, 1.0).value == doctest::Approx(b.second).epsilon(1e-9));
  }
}

TEST_CASE("prune_eta parameters against the harmonic-sum definition") {
  struct Case {
    int r;
    double b;
    std::int64_t k0, k1;
    double alpha;
  };
  for (const Case& c : {Case{2, 5, 83, 79, 0.095121012231935162848}, Case{2, 15, 1835421, 1835417, 0.23142817767096932258},
                        Case{2, 20, 272400600, 272400596, 0.14686408438060752326},
                        Case{3, 12, 616, 610, 0.20284571250940744533}}) {
    CAPTURE(c.b);
    OffspringDistribution d = prune_eta(c.r, c.b);
    const PrunedParams* pp = d.pruned();
    REQUIRE(pp != nullptr);
    CHECK(pp->k0 == c.k0);
    CHECK(pp->k1 == c.k1);
    CHECK(pp->k1 == pp->k0 - 2 * c.r);
    CHECK(static_cast<double>(pp->A) == doctest::Approx(static_cast<double>(c.r - 1) / static_cast<double>(c.k1)));
    CHECK(static_cast<double>(pp->alpha) == doctest::Approx(c.alpha).epsilon(1e-12));
    CHECK(pp->alpha > 0);
    CHECK(pp->alpha < 1);
    CHECK(d.support_min() == c.r);
    CHECK(*d.support_max() == c.k1);
    CHECK(d.pmf(c.k1 + 1) == 0.0);
    CHECK(d.tail(c.k1) == 0.0);
    CHECK(mean(d).value == doctest::Approx(c.b).epsilon(1e-12));
  }
  // k0 maximality: the next harmonic partial sum exceeds b.
  OffspringDistribution d = prune_eta(2, 5.0);
  CHECK(harmonic_exact(82) <= 5);
  CHECK(harmonic_exact(83) > 5);
  (void)d;
}

TEST_CASE("prune_eta sums to one and has mean b by direct summation") {
  for (double b : {5.0, 7.5, 10.0, 15.0}) {
    CAPTURE(b);
    for (int r : {2, 3}) {
      if (b < pruning_threshold(r)) continue;
      OffspringDistribution d = prune_eta(r, b);
      long double mass = 0, m = 0;
      for (std::int64_t k = *d.support_max(); k >= r; --k) {
        long double f = d.pmf(k);
        mass += f;
        m += static_cast<long double>(k) * f;
      }
      CHECK(std::abs(static_cast<double>(mass) - 1.0) <= 1e-12);
      CHECK(std::abs(static_cast<double>(m) - b) <= 1e-10);
    }
  }
}

TEST_CASE("prune_eta validity threshold") {
  CHECK(pruning_threshold(2) == doctest::Approx(std::log(8 * std::exp(1.0))));
  CHECK_THROWS_AS(prune_eta(2, pruning_threshold(2) - 0.1), Error);
  CHECK_NOTHROW(prune_eta(2, pruning_threshold(2) + 0.1));
  CHECK_THROWS_AS(prune_eta(1, 10.0), Error);
}

TEST_CASE("quantile inverts the tail") {
  for (const std::string& text : family_grid()) {
    CAPTURE(text);
    OffspringDistribution d = dist(text);
    CHECK(d.quantile(1.0) == d.support_min());
    std::int64_t prev = d.support_min();
    for (double v : {0.9, 0.5, 0.1, 1e-3, 1e-6}) {
      std::int64_t m = d.quantile(v);
      CHECK(m >= prev);
      CHECK(d.tail(m) < v);
      if (m > d.support_min()) CHECK(d.tail(m - 1) >= v);
      prev = m;
    }
  }
}

TEST_CASE("truncated distribution bookkeeping") {
  OffspringDistribution po = dist("poisson:b=6");
  TruncatedDistribution t(po, 15);
  CHECK(t.discarded_mass() == po.tail(15));
  CHECK(t.retained_mass() + t.discarded_mass() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(t.mode() == TailMode::unnormalized);
  CHECK(t.weight(5) == po.pmf(5));
  CHECK(t.weight(16) == 0.0);
  TruncatedDistribution n(po, 15, TailMode::renormalized);
  CHECK(n.weight(5) == doctest::Approx(po.pmf(5) / n.retained_mass()));
  OffspringDistribution heavy = dist("heavy:r=2");
  TruncatedDistribution h(heavy, 1000);
  CHECK(h.discarded_mass() == heavy.tail(1000));
  CHECK(h.discarded_mass() == doctest::Approx(1e-3));
}
