#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "sfe/box.hpp"
#include "sfe/return_laws.hpp"
#include "sfe/rng.hpp"

namespace sfe {

inline constexpr const char* kVersion = "0.1.0";

// Set by the CLI's signal handler; ensemble loops drain quickly once it is
// raised and results are written with a "partial" flag.
std::atomic<bool>& abort_flag();

struct Thresholds {
  double ks_closed_form = 0.05;   // one side is an exact CDF
  double ks_two_sample = 0.08;    // both sides Monte Carlo
  double ks_shift_law = 0.02;
  double freq_high = 0.95;
  double freq_low = 0.05;
  double frechet_reject = 0.03;   // min attainable KS of a Frechet fit
  double cf_sigmas = 3.0;         // CF check: |bias| < cf_sigmas * SE
  double hill_rel_err = 0.10;
  double pvalue_floor = 0.01;
};

struct ExperimentConfig {
  double alpha = 1.0;
  std::vector<double> betas = {0.4, 0.4};
  std::string law = "sibuya";
  std::vector<std::uint64_t> n_ladder = {1000, 10000, 100000};
  std::size_t field_ell = 64;
  std::size_t limit_ell = 16;
  double delta = 1e-4;
  std::size_t replicates = 1000;
  std::uint64_t seed = 42;
  bool couple_ladder = true;
  bool parallel = true;

  std::size_t marginal_ell = 256;
  std::size_t marginal_replicates = 100000;
  std::vector<double> marginal_thetas = {0.5, 1.0, 2.0};

  std::size_t dichotomy_replicates = 400;
  std::uint64_t dichotomy_window = 65536;   // in shift-scale units
  std::vector<int> dichotomy_rungs = {32, 64, 128};  // cells per shift scale

  std::vector<std::vector<double>> grid;    // partial-maxima grid, default diagonal
  Thresholds thresholds;

  std::size_t dims() const { return betas.size(); }
  ReturnTimeLaw make_law(double beta) const;
  void validate() const;

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct StatRow {
  std::string test;
  std::string subject;
  std::string statistic;
  double value = 0.0;
  double threshold = std::numeric_limits<double>::quiet_NaN();
  std::string cmp;   // "<=", ">=", or empty for informational rows
  bool pass = true;
};

struct ExperimentResult {
  std::string test;
  std::string version = kVersion;
  std::uint64_t seed = 0;
  std::string config_hash;
  bool pass = true;
  bool partial = false;
  std::vector<StatRow> rows;
  nlohmann::json samples = nlohmann::json::object();

  void add(StatRow row);
  void note(const std::string& subject, const std::string& stat, double value);
  void check_le(const std::string& subject, const std::string& stat, double value,
                double threshold);
  void check_ge(const std::string& subject, const std::string& stat, double value,
                double threshold);

  nlohmann::json to_json() const;
  std::string to_csv() const;
};

// Replicate-parallel ensemble; results[r] depends only on (seed, tag, r), so
// the parallel and serial paths agree bit-for-bit.
std::vector<double> run_ensemble(std::size_t reps, std::uint64_t seed,
                                 std::uint64_t tag, bool parallel,
                                 const std::function<double(std::size_t, RngStream)>& fn,
                                 bool* aborted = nullptr);

std::vector<std::vector<double>> run_ensemble_vec(
    std::size_t reps, std::uint64_t seed, std::uint64_t tag, bool parallel,
    const std::function<std::vector<double>(std::size_t, RngStream)>& fn,
    bool* aborted = nullptr);

// Theorem 4.1: b_n^{-1} eta_n => (C/2)^{1/alpha} eta_{alpha,beta}, checked on
// the closed unit box along the ladder plus disjoint open rectangles at the
// largest n. Frechet regime compares against the closed form, otherwise
// two-sample against the limit sampler, which is additionally certified
// non-Frechet.
ExperimentResult test_supmeasure_convergence(const ExperimentConfig& cfg);

// Theorem 4.2: the absolute-value analogue, against exp(-C x^-alpha) in the
// Frechet regime or max of two independent limit copies otherwise.
ExperimentResult test_abs_convergence(const ExperimentConfig& cfg);

// Theorems 5.1/5.2 through finite-dimensional distributions on a grid.
ExperimentResult test_partial_maxima_fdd(const ExperimentConfig& cfg);

// Proposition 3.1 sweep: m-fold intersection frequencies against a coupled
// resolution ladder (window >> shift scale; coarser rungs derived from the
// finest path so the refinement trend is monotone by construction).
ExperimentResult test_intersection_dichotomy(const ExperimentConfig& cfg);

// Marginal SaS law of X_0 via the empirical characteristic function plus a
// Hill tail-index check.
ExperimentResult test_marginal_sas(const ExperimentConfig& cfg);

}  // namespace sfe
