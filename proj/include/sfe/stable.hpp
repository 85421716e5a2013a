#pragma once

#include <cstddef>
#include <vector>

#include "sfe/rng.hpp"

namespace sfe {

// Tail constant of the alpha-stable law:
//   C_a = (1-a) / (Gamma(2-a) cos(pi a/2))  for a != 1,  2/pi for a = 1.
// Continuous on (0,2); the a=1 value is the limit of the general formula.
double c_alpha(double alpha);

// Frechet CDF P(Y <= x) = exp(-(scale/x)^alpha), x > 0. This is the law of
// scale * Gamma_1^{-1/alpha} for a unit-rate Poisson first arrival Gamma_1.
double frechet_cdf(double x, double alpha, double scale);

// One increment L_beta(t) of the standard beta-stable subordinator,
// E exp(-theta L) = exp(-t theta^beta). Kanter's exact representation:
// no series truncation, so regenerative-set accuracy is limited only by
// the spatial grid downstream.
double sample_one_sided_stable(double beta, double t, RngStream& rng);

// Arrival times of a unit-rate Poisson process paired with Rademacher signs.
// extend() continues the same stream, so a longer sequence shares its prefix
// with a shorter one drawn from the same RngStream history.
class PoissonWeightSeq {
 public:
  PoissonWeightSeq() = default;

  void extend(std::size_t count, RngStream& rng);

  std::size_t size() const { return gammas_.size(); }
  double gamma(std::size_t j) const { return gammas_[j]; }   // j is 0-based
  int sign(std::size_t j) const { return signs_[j]; }
  const std::vector<double>& gammas() const { return gammas_; }
  const std::vector<int>& signs() const { return signs_; }

 private:
  std::vector<double> gammas_;
  std::vector<int> signs_;
};

PoissonWeightSeq poisson_weights(std::size_t count, RngStream& rng);

}  // namespace sfe
