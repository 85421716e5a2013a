#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace sfe {

struct MeanSE {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

MeanSE mean_se(std::span<const double> xs);

// Kolmogorov distribution survival function P(K > x) = 2 sum (-1)^{k-1} e^{-2k^2x^2},
// with the theta-function form for small x.
double kolmogorov_sf(double x);

// One-sample KS distance of a sample against an explicit CDF.
double ks_statistic(std::vector<double> sample,
                    const std::function<double(double)>& cdf);
double ks_pvalue_one_sample(double d, std::size_t n);

// Two-sample KS distance and asymptotic p-value.
double ks_statistic_two_sample(std::vector<double> a, std::vector<double> b);
double ks_pvalue_two_sample(double d, std::size_t n, std::size_t m);

// Exact two-sided binomial test of k successes in n trials against p.
double binomial_two_sided_pvalue(std::uint64_t k, std::uint64_t n, double p);

// Hill estimator of the tail index from the top-k order statistics.
double hill_tail_index(std::vector<double> sample, std::size_t k);

// Least-squares slope of y against x (both already transformed, e.g. logs).
double regression_slope(std::span<const double> x, std::span<const double> y);

// Frechet fit by minimizing the KS distance over (alpha, scale); coarse grid
// around a quantile-matching start, then local refinement.
struct FrechetFit {
  double alpha = 0.0;
  double scale = 0.0;
  double ks = 1.0;
};
FrechetFit fit_frechet_min_ks(std::vector<double> sample);

}  // namespace sfe
