#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "sfe/field.hpp"
#include "sfe/rng.hpp"
#include "sfe/stable.hpp"
#include "sfe/stats.hpp"

using namespace sfe;

namespace {

FieldSample make_single_atom_field(int sign, double weight,
                                   std::vector<std::uint64_t> box,
                                   std::vector<std::vector<std::uint64_t>> zero_sets) {
  FieldAtom a;
  a.sign = sign;
  a.weight = weight;
  a.zero_sets = std::move(zero_sets);
  std::vector<ReturnTimeLaw> laws(box.size(), ReturnTimeLaw::sibuya(0.5));
  std::vector<std::uint64_t> n = box;
  const double bn = normalizer_bn(laws, n, 1.0);
  return FieldSample(std::move(laws), std::move(n), 1.0, bn, c_alpha(1.0), {a});
}

}  // namespace

TEST_CASE("n=0 box: X_0 is the plain LePage sum") {
  std::vector<ReturnTimeLaw> laws = {ReturnTimeLaw::sibuya(0.5)};
  std::vector<std::uint64_t> n = {0};
  auto f = sample_field(laws, n, 1.2, 16, RngStream::seeded(60));
  CHECK(f.bn() == doctest::Approx(1.0));
  double expected = 0.0;
  for (const auto& a : f.atoms()) {
    REQUIRE(a.zero_sets[0].size() == 1);
    CHECK(a.zero_sets[0][0] == 0);
    expected += a.sign * a.weight;
  }
  expected *= std::pow(c_alpha(1.2), 1.0 / 1.2);
  const std::int64_t zero[1] = {0};
  CHECK(f.value_at(zero) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("atoms are prefix-stable in ell") {
  std::vector<ReturnTimeLaw> laws = {ReturnTimeLaw::sibuya(0.6),
                                     ReturnTimeLaw::pareto(0.7)};
  std::vector<std::uint64_t> n = {100, 100};
  auto f8 = sample_field(laws, n, 1.5, 8, RngStream::seeded(61));
  auto f16 = sample_field(laws, n, 1.5, 16, RngStream::seeded(61));
  for (std::size_t j = 0; j < 8; ++j) {
    CHECK(f8.atoms()[j].sign == f16.atoms()[j].sign);
    CHECK(f8.atoms()[j].weight == f16.atoms()[j].weight);
    CHECK(f8.atoms()[j].zero_sets == f16.atoms()[j].zero_sets);
  }
}

TEST_CASE("single positive atom: sup over the unit box is its weight") {
  auto f = make_single_atom_field(+1, 0.8, {50}, {{3, 17, 40}});
  CHECK(f.sup_measure(RealBox::unit(1)) ==
        doctest::Approx(f.scale() * 0.8).epsilon(1e-14));
}

TEST_CASE("single negative atom: off-support zeros win the max") {
  auto f = make_single_atom_field(-1, 0.8, {50}, {{3, 17, 40}});
  CHECK(f.sup_measure(RealBox::unit(1)) == 0.0);
  // but the absolute sup sees it
  CHECK(f.abs_sup_measure(RealBox::unit(1)) ==
        doctest::Approx(f.scale() * 0.8).epsilon(1e-14));
}

TEST_CASE("fully covered box with one negative atom keeps the negative max") {
  auto f = make_single_atom_field(-1, 0.8, {2}, {{0, 1, 2}});
  CHECK(f.sup_measure(RealBox::unit(1)) ==
        doctest::Approx(-f.scale() * 0.8).epsilon(1e-14));
}

TEST_CASE("empty lattice intersection raises an explicit error") {
  std::vector<ReturnTimeLaw> laws = {ReturnTimeLaw::sibuya(0.5),
                                     ReturnTimeLaw::sibuya(0.5)};
  std::vector<std::uint64_t> n = {9, 9};
  auto f = sample_field(laws, n, 1.0, 4, RngStream::seeded(62));
  CHECK_THROWS_AS(f.sup_measure(RealBox::closed({0.31, 0.31}, {0.32, 0.32})),
                  std::domain_error);
  CHECK_THROWS_AS(f.abs_sup_measure(RealBox::closed({0.31, 0.31}, {0.32, 0.32})),
                  std::domain_error);
}

TEST_CASE("P(X_0 = 0) for ell=1 follows from the first-zero weights") {
  const std::vector<ReturnTimeLaw> laws = {ReturnTimeLaw::sibuya(0.5),
                                           ReturnTimeLaw::sibuya(0.5)};
  const std::vector<std::uint64_t> n = {9, 9};
  // oracle: 1 - prod_i (first-zero weight of 0) / bn_i^alpha
  const auto w = first_zero_weights(laws[0], 9);
  long double s = 0.0L;
  for (double x : w) s += x;
  const double p_cover = static_cast<double>((1.0L / s) * (1.0L / s));
  const double p_zero_oracle = 1.0 - p_cover;

  auto rng = RngStream::seeded(63);
  const std::size_t reps = 20000;
  std::size_t zeros = 0;
  const std::int64_t origin[2] = {0, 0};
  for (std::size_t r = 0; r < reps; ++r) {
    auto f = sample_field(laws, n, 1.0, 1, rng.child(r));
    if (f.value_at(origin) == 0.0) ++zeros;
  }
  const double freq = static_cast<double>(zeros) / reps;
  CHECK(std::abs(freq - p_zero_oracle) <
        4.0 * std::sqrt(p_zero_oracle * (1 - p_zero_oracle) / reps));
}

TEST_CASE("sparse evaluation equals the dense scan exactly") {
  const std::vector<ReturnTimeLaw> laws = {ReturnTimeLaw::sibuya(0.6),
                                           ReturnTimeLaw::sibuya(0.6)};
  const std::vector<std::uint64_t> n = {50, 50};
  auto rng = RngStream::seeded(64);
  for (int seed = 0; seed < 100; ++seed) {
    auto f = sample_field(laws, n, 1.5, 8, rng.child(seed));
    const RealBox full = RealBox::unit(2);
    CHECK(f.sup_measure(full) == dense_sup_measure(f, full));
    CHECK(f.abs_sup_measure(full) == dense_abs_sup_measure(f, full));
    // a random sub-box, open faces included
    const double a0 = rng.uniform01() * 0.5, a1 = rng.uniform01() * 0.5;
    RealBox sub = RealBox::closed({a0, a1}, {a0 + 0.45, a1 + 0.45});
    sub.lo_open[0] = true;
    sub.hi_open[1] = true;
    CHECK(f.sup_measure(sub) == dense_sup_measure(f, sub));
    CHECK(f.abs_sup_measure(sub) == dense_abs_sup_measure(f, sub));
  }
}

TEST_CASE("values recomputable from atoms; off-support points are zero") {
  const std::vector<ReturnTimeLaw> laws = {ReturnTimeLaw::sibuya(0.5),
                                           ReturnTimeLaw::sibuya(0.5)};
  const std::vector<std::uint64_t> n = {9, 9};
  auto f = sample_field(laws, n, 1.0, 4, RngStream::seeded(65));
  std::size_t nonzero = 0;
  f.for_each_nonzero(1 << 20, [&](std::span<const std::int64_t> k, double v) {
    CHECK(f.value_at(k) == v);
    ++nonzero;
  });
  CHECK(nonzero > 0);
  // scan the whole small box: value_at must be zero off every atom support
  std::size_t zeros = 0;
  for (std::int64_t i = 0; i <= 9; ++i)
    for (std::int64_t j = 0; j <= 9; ++j) {
      const std::int64_t k[2] = {i, j};
      bool covered = false;
      for (const auto& a : f.atoms()) {
        const bool in0 = std::binary_search(a.zero_sets[0].begin(),
                                            a.zero_sets[0].end(),
                                            static_cast<std::uint64_t>(i));
        const bool in1 = std::binary_search(a.zero_sets[1].begin(),
                                            a.zero_sets[1].end(),
                                            static_cast<std::uint64_t>(j));
        covered = covered || (in0 && in1);
      }
      if (!covered) {
        CHECK(f.value_at(k) == 0.0);
        ++zeros;
      }
    }
  CHECK(zeros + nonzero == 100);
}

TEST_CASE("partial maxima: t=1 equals the closed unit box, monotone in t") {
  const std::vector<ReturnTimeLaw> laws = {ReturnTimeLaw::sibuya(0.7),
                                           ReturnTimeLaw::sibuya(0.7)};
  const std::vector<std::uint64_t> n = {60, 60};
  auto rng = RngStream::seeded(66);
  for (int rep = 0; rep < 25; ++rep) {
    auto f = sample_field(laws, n, 1.0, 8, rng.child(rep));
    std::vector<std::vector<double>> grid = {{1.0, 1.0}};
    CHECK(f.partial_maxima(grid)[0] == f.sup_measure(RealBox::unit(2)));
    // random ordered pairs
    for (int q = 0; q < 8; ++q) {
      const double t0 = rng.uniform01(), t1 = rng.uniform01();
      const double u0 = t0 + (1.0 - t0) * rng.uniform01();
      const double u1 = t1 + (1.0 - t1) * rng.uniform01();
      std::vector<std::vector<double>> pair = {{t0, t1}, {u0, u1}};
      auto m = f.partial_maxima(pair);
      CHECK(m[0] <= m[1]);
    }
    // dense oracle on a small corner
    std::vector<std::vector<double>> corner = {{0.3, 0.45}};
    CHECK(f.partial_maxima(corner)[0] ==
          dense_sup_measure(f, RealBox::zero_to(corner[0])));
  }
}

TEST_CASE("sub-box reads are identically distributed (shift invariance)") {
  const std::vector<ReturnTimeLaw> laws = {ReturnTimeLaw::sibuya(0.6)};
  const std::vector<std::uint64_t> n = {2000};
  std::vector<ConditionedZeroSetSampler> samplers;
  samplers.emplace_back(laws[0], 2000);
  auto rng = RngStream::seeded(67);
  const std::size_t reps = 400;
  std::vector<double> max_lo, max_hi, cf_lo, cf_hi;
  for (std::size_t r = 0; r < reps; ++r) {
    auto f = sample_field(samplers, 1.0, 32, rng.child(r));
    max_lo.push_back(f.sup_measure(RealBox::closed({0.0}, {0.025})));
    max_hi.push_back(f.sup_measure(RealBox::closed({0.5}, {0.525})));
    const std::int64_t k0[1] = {10};
    const std::int64_t k1[1] = {1010};
    cf_lo.push_back(std::cos(f.value_at(k0)));
    cf_hi.push_back(std::cos(f.value_at(k1)));
  }
  const double d = ks_statistic_two_sample(max_lo, max_hi);
  CHECK(ks_pvalue_two_sample(d, reps, reps) > 0.01);
  const MeanSE lo = mean_se(cf_lo), hi = mean_se(cf_hi);
  CHECK(std::abs(lo.mean - hi.mean) < 4.0 * std::hypot(lo.se, hi.se));
}

TEST_CASE("truncation tail: P(max tail sum > 0.1) small and shrinking in ell") {
  // tail field built from atoms (ell, 2ell]; the diagnostic bounds the
  // normalized remainder max_k |sum_{j>ell} ...|
  const std::vector<ReturnTimeLaw> laws = {ReturnTimeLaw::sibuya(0.5),
                                           ReturnTimeLaw::sibuya(0.5)};
  const std::vector<std::uint64_t> n = {200, 200};
  auto rng = RngStream::seeded(68);
  const std::size_t reps = 200;
  std::vector<double> exceed_freq;
  for (std::size_t ell : {16, 32, 64}) {
    std::size_t exceed = 0;
    for (std::size_t r = 0; r < reps; ++r) {
      auto f = sample_field(laws, n, 1.0, 2 * ell, rng.child(r));
      std::vector<FieldAtom> tail(f.atoms().begin() + ell, f.atoms().end());
      FieldSample tail_field(laws, n, f.alpha(), f.bn(), f.calpha(), tail);
      const double m = tail_field.abs_sup_measure(RealBox::unit(2)) / tail_field.scale();
      if (m > 0.1) ++exceed;
    }
    exceed_freq.push_back(static_cast<double>(exceed) / reps);
  }
  CHECK(exceed_freq[2] <= 0.01);
  CHECK(exceed_freq[2] <= exceed_freq[1] + 1e-12);
  CHECK(exceed_freq[1] <= exceed_freq[0] + 1e-12);
}

TEST_CASE("sparse dump guard") {
  const std::vector<ReturnTimeLaw> laws = {ReturnTimeLaw::sibuya(0.5),
                                           ReturnTimeLaw::sibuya(0.5)};
  const std::vector<std::uint64_t> n = {9, 9};
  auto f = sample_field(laws, n, 1.0, 4, RngStream::seeded(69));
  CHECK_THROWS_AS(f.for_each_nonzero(1, [](auto, double) {}), std::runtime_error);
}
