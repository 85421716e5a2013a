#include "sfe/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sfe {

MeanSE mean_se(std::span<const double> xs) {
  MeanSE r;
  r.n = xs.size();
  if (r.n == 0) return r;
  double s = 0.0;
  for (double x : xs) s += x;
  r.mean = s / static_cast<double>(r.n);
  double v = 0.0;
  for (double x : xs) v += (x - r.mean) * (x - r.mean);
  if (r.n > 1) r.se = std::sqrt(v / (static_cast<double>(r.n) * (r.n - 1.0)));
  return r;
}

double kolmogorov_sf(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 1.18) {
    // Jacobi theta form, accurate for small x
    const double pi = std::numbers::pi;
    const double t = std::exp(-pi * pi / (8.0 * x * x));
    const double cdf = std::sqrt(2.0 * pi) / x *
                       (t + std::pow(t, 9.0) + std::pow(t, 25.0) + std::pow(t, 49.0));
    return 1.0 - cdf;
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    s += (k % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::max(0.0, 2.0 * s);
}

double ks_statistic(std::vector<double> sample,
                    const std::function<double(double)>& cdf) {
  if (sample.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, (i + 1.0) / n - f);
    d = std::max(d, f - static_cast<double>(i) / n);
  }
  return d;
}

double ks_pvalue_one_sample(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  return kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d);
}

double ks_statistic_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("ks_statistic_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_pvalue_two_sample(double d, std::size_t n, std::size_t m) {
  const double ne = static_cast<double>(n) * m / (static_cast<double>(n) + m);
  const double sn = std::sqrt(ne);
  return kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d);
}

namespace {

double log_binom_pmf(std::uint64_t k, std::uint64_t n, double p) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
         k * std::log(p) + (n - k) * std::log1p(-p);
}

}  // namespace

double binomial_two_sided_pvalue(std::uint64_t k, std::uint64_t n, double p) {
  if (n == 0 || !(p > 0.0) || !(p < 1.0))
    throw std::invalid_argument("binomial_two_sided_pvalue: bad arguments");
  // sum of all outcomes no more likely than the observed one
  const double lk = log_binom_pmf(k, n, p);
  double s = 0.0;
  for (std::uint64_t i = 0; i <= n; ++i) {
    const double li = log_binom_pmf(i, n, p);
    if (li <= lk + 1e-7) s += std::exp(li);
  }
  return std::min(1.0, s);
}

double hill_tail_index(std::vector<double> sample, std::size_t k) {
  if (k + 1 > sample.size() || k == 0)
    throw std::invalid_argument("hill_tail_index: need k in [1, n-1]");
  std::sort(sample.begin(), sample.end(), std::greater<>());
  const double xk = sample[k];
  if (!(xk > 0.0)) throw std::invalid_argument("hill_tail_index: non-positive order stat");
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += std::log(sample[i] / xk);
  return static_cast<double>(k) / s;
}

double regression_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("regression_slope: bad input");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxy / sxx;
}

FrechetFit fit_frechet_min_ks(std::vector<double> sample) {
  std::sort(sample.begin(), sample.end());
  const std::size_t n = sample.size();
  if (n < 10) throw std::invalid_argument("fit_frechet_min_ks: sample too small");
  for (double x : sample)
    if (!(x > 0.0)) throw std::invalid_argument("fit_frechet_min_ks: non-positive value");

  // quantile-matching start: log-quantiles of Frechet are affine in
  // -log(-log q), slope 1/alpha
  auto q = [&](double u) { return sample[static_cast<std::size_t>(u * (n - 1))]; };
  const double y1 = std::log(q(0.25)), y2 = std::log(q(0.75));
  const double z1 = -std::log(-std::log(0.25)), z2 = -std::log(-std::log(0.75));
  double alpha0 = (z2 - z1) / std::max(1e-9, y2 - y1);
  alpha0 = std::clamp(alpha0, 0.05, 50.0);
  const double med = q(0.5);
  double scale0 = med * std::pow(std::log(2.0), 1.0 / alpha0);

  auto ks_at = [&](double a, double c) {
    double d = 0.0;
    const double nn = static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double f = std::exp(-std::pow(c / sample[i], a));
      d = std::max(d, (i + 1.0) / nn - f);
      d = std::max(d, f - static_cast<double>(i) / nn);
    }
    return d;
  };

  FrechetFit best{alpha0, scale0, ks_at(alpha0, scale0)};
  double width_a = 0.6, width_c = 0.6;  // log-space search half-widths
  for (int round = 0; round < 4; ++round) {
    for (int ia = -4; ia <= 4; ++ia) {
      for (int ic = -4; ic <= 4; ++ic) {
        const double a = best.alpha * std::exp(width_a * ia / 4.0);
        const double c = best.scale * std::exp(width_c * ic / 4.0);
        const double d = ks_at(a, c);
        if (d < best.ks) best = FrechetFit{a, c, d};
      }
    }
    width_a *= 0.35;
    width_c *= 0.35;
  }
  return best;
}

}  // namespace sfe
