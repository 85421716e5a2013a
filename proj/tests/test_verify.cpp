#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "sfe/field.hpp"
#include "sfe/io.hpp"
#include "sfe/stats.hpp"
#include "sfe/verify.hpp"

using namespace sfe;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.alpha = 1.0;
  cfg.betas = {0.4, 0.4};
  cfg.law = "sibuya";
  cfg.n_ladder = {500, 2000};
  cfg.field_ell = 32;
  cfg.limit_ell = 8;
  cfg.delta = 1e-3;
  cfg.replicates = 200;
  cfg.seed = 4242;
  // loose thresholds: 200 replicates sit near the KS noise floor; the
  // spec-level tolerances are exercised by the acceptance suite
  cfg.thresholds.ks_closed_form = 0.2;
  cfg.thresholds.ks_two_sample = 0.25;
  cfg.thresholds.hill_rel_err = 0.3;
  return cfg;
}

}  // namespace

TEST_CASE("config validation") {
  ExperimentConfig cfg = small_config();
  CHECK_NOTHROW(cfg.validate());
  cfg.replicates = 50;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = small_config();
  cfg.n_ladder = {2000, 500};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = small_config();
  cfg.law = "zeta";
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  // round trip through JSON
  cfg = small_config();
  auto j = cfg.to_json();
  auto back = ExperimentConfig::from_json(j);
  CHECK(back.to_json() == j);
  CHECK(config_hash(j) == config_hash(back.to_json()));
}

TEST_CASE("ensemble runner: serial and parallel agree bit-for-bit") {
  auto fn = [](std::size_t r, RngStream rng) {
    double acc = static_cast<double>(r);
    for (int i = 0; i < 100; ++i) acc += rng.uniform01();
    return acc;
  };
  auto serial = run_ensemble(64, 99, 7, false, fn);
  auto parallel = run_ensemble(64, 99, 7, true, fn);
  CHECK(serial == parallel);
}

TEST_CASE("supmeasure convergence: structure and determinism") {
  ExperimentConfig cfg = small_config();
  auto res = test_supmeasure_convergence(cfg);
  CHECK(res.test == "supmeasure_convergence");
  CHECK(!res.partial);
  // one KS row per rung plus the trend and rectangle rows
  std::size_t ks_rows = 0;
  for (const auto& r : res.rows)
    if (r.statistic == "ks_distance") ++ks_rows;
  CHECK(ks_rows >= cfg.n_ladder.size() + 3);
  CHECK(res.pass);

  auto res2 = test_supmeasure_convergence(cfg);
  CHECK(res.to_json().dump() == res2.to_json().dump());
  ExperimentConfig serial_cfg = cfg;
  serial_cfg.parallel = false;
  auto res3 = test_supmeasure_convergence(serial_cfg);
  for (std::size_t i = 0; i < res.rows.size(); ++i)
    CHECK(res.rows[i].value == res3.rows[i].value);
}

TEST_CASE("identical generators give uniform-ish KS p-values") {
  ExperimentConfig cfg = small_config();
  std::vector<ConditionedZeroSetSampler> samplers;
  for (double b : cfg.betas) samplers.emplace_back(cfg.make_law(b), 500);
  auto fn = [&](std::size_t, RngStream rng) {
    auto f = sample_field(samplers, cfg.alpha, cfg.field_ell, rng);
    return f.sup_measure(RealBox::unit(2)) / f.bn();
  };
  auto a = run_ensemble(300, 1, 11, true, fn);
  auto b = run_ensemble(300, 1, 12, true, fn);
  const double d = ks_statistic_two_sample(a, b);
  CHECK(ks_pvalue_two_sample(d, a.size(), b.size()) > 0.01);
}

TEST_CASE("abs convergence dominates the signed one pathwise") {
  ExperimentConfig cfg = small_config();
  std::vector<ConditionedZeroSetSampler> samplers;
  for (double b : cfg.betas) samplers.emplace_back(cfg.make_law(b), 500);
  for (std::size_t r = 0; r < 50; ++r) {
    auto f = sample_field(samplers, cfg.alpha, cfg.field_ell,
                          RngStream::seeded(5, {r}));
    CHECK(f.abs_sup_measure(RealBox::unit(2)) >=
          f.sup_measure(RealBox::unit(2)) - 1e-14);
  }
}

TEST_CASE("partial maxima fdd runs and is monotone") {
  ExperimentConfig cfg = small_config();
  cfg.n_ladder = {500};
  auto res = test_partial_maxima_fdd(cfg);
  bool found_field_mono = false;
  for (const auto& r : res.rows)
    if (r.statistic == "monotonicity_violations") {
      CHECK(r.value == 0.0);
      found_field_mono = true;
    }
  CHECK(found_field_mono);
}

TEST_CASE("dichotomy smoke: m=1 always intersects, trends monotone") {
  ExperimentConfig cfg = small_config();
  cfg.betas = {0.7, 0.7};
  cfg.dichotomy_replicates = 120;
  cfg.dichotomy_window = 2048;
  cfg.dichotomy_rungs = {8, 16};
  auto res = test_intersection_dichotomy(cfg);
  double m1_freq = -1.0;
  for (const auto& r : res.rows)
    if (r.subject.starts_with("m=1 ") && r.statistic == "intersection_frequency")
      m1_freq = r.value;
  CHECK(m1_freq == 1.0);
  for (const auto& r : res.rows)
    if (r.statistic == "freq_nonincreasing_in_delta") CHECK(r.value == 1.0);
  // determinism across thread counts
  ExperimentConfig serial_cfg = cfg;
  serial_cfg.parallel = false;
  auto res2 = test_intersection_dichotomy(serial_cfg);
  for (std::size_t i = 0; i < res.rows.size(); ++i)
    CHECK(res.rows[i].value == res2.rows[i].value);
}

TEST_CASE("marginal sas at reduced size passes for alpha=1") {
  ExperimentConfig cfg = small_config();
  cfg.marginal_replicates = 20000;
  auto res = test_marginal_sas(cfg);
  CHECK(res.pass);
  auto res2 = test_marginal_sas(cfg);
  CHECK(res.to_json() == res2.to_json());
}
