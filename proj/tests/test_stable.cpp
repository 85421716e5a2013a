#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <numbers>
#include <vector>

#include "sfe/rng.hpp"
#include "sfe/stable.hpp"
#include "sfe/stats.hpp"

using namespace sfe;

TEST_CASE("c_alpha closed form and continuity") {
  CHECK(c_alpha(1.0) == doctest::Approx(2.0 / std::numbers::pi).epsilon(1e-14));
  // formula evaluated independently: 0.5 / (Gamma(1.5) cos(pi/4))
  CHECK(c_alpha(0.5) == doctest::Approx(0.797884560802865).epsilon(1e-12));
  CHECK(c_alpha(0.5) ==
        doctest::Approx(0.5 / (std::tgamma(1.5) * std::cos(std::numbers::pi / 4)))
            .epsilon(1e-14));
  // limits: alpha -> 0+ gives 1
  CHECK(c_alpha(1e-9) == doctest::Approx(1.0).epsilon(1e-6));
  // continuity across the alpha=1 branch
  CHECK(std::abs(c_alpha(1.0 - 1e-6) - 2.0 / std::numbers::pi) < 1e-4);
  CHECK(std::abs(c_alpha(1.0 + 1e-6) - 2.0 / std::numbers::pi) < 1e-4);
  CHECK_THROWS_AS(c_alpha(0.0), std::invalid_argument);
  CHECK_THROWS_AS(c_alpha(2.0), std::invalid_argument);
}

TEST_CASE("frechet_cdf basic values") {
  CHECK(frechet_cdf(1.0, 1.7, 1.0) == doctest::Approx(std::exp(-1.0)));
  CHECK(frechet_cdf(3.5, 0.6, 3.5) == doctest::Approx(std::exp(-1.0)));
  CHECK(frechet_cdf(2.0, 1.0, 1.0) == doctest::Approx(std::exp(-0.5)));
  CHECK(frechet_cdf(2.0, 1.0, 1.0) > frechet_cdf(1.0, 1.0, 1.0));
  CHECK_THROWS_AS(frechet_cdf(0.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("one-sided stable Laplace transform") {
  auto rng = RngStream::seeded(101);
  const std::size_t n = 1000000;
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s1 += std::exp(-sample_one_sided_stable(0.7, 1.0, rng));
    s2 += std::exp(-2.0 * sample_one_sided_stable(0.5, 1.0, rng));
  }
  CHECK(std::abs(s1 / n - std::exp(-1.0)) < 0.01);
  CHECK(std::abs(s2 / n - std::exp(-std::sqrt(2.0))) < 0.01);
}

TEST_CASE("one-sided stable self-similarity in law") {
  auto rng = RngStream::seeded(202);
  const double beta = 0.6;
  std::vector<double> a(100000), b(100000);
  for (auto& x : a) x = sample_one_sided_stable(beta, 2.0, rng);
  for (auto& x : b) x = std::pow(2.0, 1.0 / beta) * sample_one_sided_stable(beta, 1.0, rng);
  CHECK(ks_statistic_two_sample(a, b) < 0.01);
}

TEST_CASE("poisson weights: arrival laws and signs") {
  auto rng = RngStream::seeded(303);
  const std::size_t reps = 1000000;
  double mean_g1 = 0.0;
  std::size_t plus = 0;
  std::vector<double> g1_frechet;
  g1_frechet.reserve(100000);
  for (std::size_t i = 0; i < reps; ++i) {
    auto stream = rng.child(i);
    PoissonWeightSeq s = poisson_weights(1, stream);
    mean_g1 += s.gamma(0);
    if (s.sign(0) == 1) ++plus;
    if (i < 100000) g1_frechet.push_back(std::pow(s.gamma(0), -1.0 / 1.5));
  }
  CHECK(std::abs(mean_g1 / reps - 1.0) < 0.01);
  CHECK(std::abs(static_cast<double>(plus) / reps - 0.5) < 0.005);
  // Gamma_1^{-1/alpha} is Frechet(alpha)
  const double d =
      ks_statistic(g1_frechet, [](double x) { return frechet_cdf(x, 1.5, 1.0); });
  CHECK(d < 0.01);
}

TEST_CASE("poisson weights: iid exponential increments, prefix stable") {
  auto rng = RngStream::seeded(404);
  PoissonWeightSeq s = poisson_weights(64, rng);
  std::vector<double> gaps;
  gaps.push_back(s.gamma(0));
  for (std::size_t j = 1; j < s.size(); ++j) gaps.push_back(s.gamma(j) - s.gamma(j - 1));
  for (double g : gaps) CHECK(g > 0.0);

  auto rng_b = RngStream::seeded(404);
  PoissonWeightSeq t = poisson_weights(8, rng_b);
  t.extend(64, rng_b);
  for (std::size_t j = 0; j < 64; ++j) {
    CHECK(t.gamma(j) == s.gamma(j));
    CHECK(t.sign(j) == s.sign(j));
  }

  // pooled increments against the exponential CDF
  std::vector<double> pool;
  auto rng_c = RngStream::seeded(505);
  for (std::size_t r = 0; r < 3000; ++r) {
    auto stream = rng_c.child(r);
    PoissonWeightSeq q = poisson_weights(32, stream);
    pool.push_back(q.gamma(0));
    for (std::size_t j = 1; j < q.size(); ++j) pool.push_back(q.gamma(j) - q.gamma(j - 1));
  }
  const double d = ks_statistic(pool, [](double x) { return 1.0 - std::exp(-x); });
  CHECK(d < 0.01);
}

TEST_CASE("thinning: positive-sign arrivals halved match a fresh sequence") {
  // {Gamma_j : eps_j = 1} * (1/2) has the law of a fresh unit-rate sequence
  auto rng = RngStream::seeded(606);
  std::vector<double> thinned_first, fresh_first, thinned_gap, fresh_gap;
  for (std::size_t r = 0; r < 20000; ++r) {
    auto sa = rng.child(2 * r);
    auto sb = rng.child(2 * r + 1);
    PoissonWeightSeq s = poisson_weights(64, sa);
    std::vector<double> kept;
    for (std::size_t j = 0; j < s.size(); ++j)
      if (s.sign(j) == 1) kept.push_back(0.5 * s.gamma(j));
    if (kept.size() >= 2) {
      thinned_first.push_back(kept[0]);
      thinned_gap.push_back(kept[1] - kept[0]);
    }
    PoissonWeightSeq f = poisson_weights(2, sb);
    fresh_first.push_back(f.gamma(0));
    fresh_gap.push_back(f.gamma(1) - f.gamma(0));
  }
  CHECK(ks_statistic_two_sample(thinned_first, fresh_first) < 0.015);
  CHECK(ks_statistic_two_sample(thinned_gap, fresh_gap) < 0.015);
}

TEST_CASE("identical seeds reproduce identical streams") {
  auto a = RngStream::seeded(7, {1, 2});
  auto b = RngStream::seeded(7, {1, 2});
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  auto c = RngStream::seeded(7, {1, 3});
  bool differs = false;
  auto a2 = RngStream::seeded(7, {1, 2});
  for (int i = 0; i < 100; ++i) differs |= (a2.next_u64() != c.next_u64());
  CHECK(differs);
}
