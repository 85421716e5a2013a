#include "sfe/stable.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sfe {

double c_alpha(double alpha) {
  if (!(alpha > 0.0) || !(alpha < 2.0))
    throw std::invalid_argument("c_alpha: alpha must lie in (0,2)");
  if (alpha == 1.0) return 2.0 / std::numbers::pi;
  return (1.0 - alpha) /
         (std::tgamma(2.0 - alpha) * std::cos(std::numbers::pi * alpha / 2.0));
}

double frechet_cdf(double x, double alpha, double scale) {
  if (!(x > 0.0)) throw std::invalid_argument("frechet_cdf: x must be > 0");
  if (!(alpha > 0.0) || !(scale > 0.0))
    throw std::invalid_argument("frechet_cdf: alpha and scale must be > 0");
  return std::exp(-std::pow(scale / x, alpha));
}

double sample_one_sided_stable(double beta, double t, RngStream& rng) {
  if (!(beta > 0.0 && beta < 1.0))
    throw std::invalid_argument("sample_one_sided_stable: beta must lie in (0,1)");
  if (!(t > 0.0))
    throw std::invalid_argument("sample_one_sided_stable: t must be > 0");
  // Kanter: L(1) = (a(U)/E)^{(1-b)/b},
  //   a(u) = sin(b pi u)^{b/(1-b)} sin((1-b) pi u) / sin(pi u)^{1/(1-b)}.
  // Evaluated in log space; L(t) = t^{1/b} L(1).
  const double u = rng.uniform01();
  const double e = rng.exponential();
  const double pi = std::numbers::pi;
  const double log_a = (beta / (1.0 - beta)) * std::log(std::sin(beta * pi * u)) +
                       std::log(std::sin((1.0 - beta) * pi * u)) -
                       (1.0 / (1.0 - beta)) * std::log(std::sin(pi * u));
  const double x = std::exp(((1.0 - beta) / beta) * (log_a - std::log(e)));
  return std::pow(t, 1.0 / beta) * x;
}

void PoissonWeightSeq::extend(std::size_t count, RngStream& rng) {
  if (count <= gammas_.size()) return;
  gammas_.reserve(count);
  signs_.reserve(count);
  double last = gammas_.empty() ? 0.0 : gammas_.back();
  while (gammas_.size() < count) {
    last += rng.exponential();
    gammas_.push_back(last);
    signs_.push_back(rng.rademacher());
  }
}

PoissonWeightSeq poisson_weights(std::size_t count, RngStream& rng) {
  if (count < 1) throw std::invalid_argument("poisson_weights: count must be >= 1");
  PoissonWeightSeq seq;
  seq.extend(count, rng);
  return seq;
}

}  // namespace sfe
