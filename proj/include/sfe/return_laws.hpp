#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sfe/rng.hpp"

namespace sfe {

// Return-time distribution phi >= 1 with regularly varying survival
// P(phi > n) ~ const * n^{-beta}, 0 < beta < 1 (infinite mean). Two built-in
// laws with constant slowly varying factor so the chain normalizers stay in
// closed form:
//   sibuya: P(phi > n) = Gamma(n+1-beta) / (Gamma(1-beta) Gamma(n+1))
//   pareto: P(phi > n) = (n+1)^{-beta}
class ReturnTimeLaw {
 public:
  static ReturnTimeLaw sibuya(double beta);
  static ReturnTimeLaw pareto(double beta);

  double beta() const { return beta_; }
  const std::string& name() const { return name_; }

  // P(phi > n); survival(0) = 1 since phi >= 1 always.
  double survival(std::uint64_t n) const;

  // Inverse-transform draw of phi; saturates at 2^62 (far beyond any horizon).
  std::uint64_t sample(RngStream& rng) const;

 private:
  enum class Kind { kSibuya, kPareto };
  ReturnTimeLaw(Kind kind, double beta);

  Kind kind_;
  double beta_;
  double log_gamma_1mb_;         // log Gamma(1-beta), sibuya only
  std::vector<double> table_;    // survival(0..kTableSize-1), sibuya fast path
  std::string name_;
};

// Sorted zero set of one coordinate chain on {0,...,horizon}.
struct RenewalZeroSet {
  std::uint64_t horizon = 0;
  std::vector<std::uint64_t> points;
};

// (P(phi>0), ..., P(phi>n)): the first-zero decomposition weights. Their sum
// is exactly (b_n)^alpha for the countdown chain.
std::vector<double> first_zero_weights(const ReturnTimeLaw& law, std::uint64_t n);

// b_n = prod_i (sum_{k=0}^{n_i} survival_i(k))^{1/alpha}.
double normalizer_bn(std::span<const ReturnTimeLaw> laws,
                     std::span<const std::uint64_t> n, double alpha);

// Zero set of one coordinate under the conditioned measure eta_n^{(i)}:
// first point k with P(k) proportional to survival(k), then iid phi-gaps
// until the horizon is passed. Precomputes the first-point inversion table,
// so keep one sampler per (law, horizon) and reuse it across replicates.
class ConditionedZeroSetSampler {
 public:
  ConditionedZeroSetSampler(ReturnTimeLaw law, std::uint64_t horizon);

  RenewalZeroSet sample(RngStream& rng) const;
  std::uint64_t sample_first_point(RngStream& rng) const;

  double bn_alpha() const { return prefix_.back(); }
  std::uint64_t horizon() const { return horizon_; }
  const ReturnTimeLaw& law() const { return law_; }

 private:
  ReturnTimeLaw law_;
  std::uint64_t horizon_;
  std::vector<double> prefix_;   // prefix sums of survival(0..horizon)
};

RenewalZeroSet sample_conditioned_zero_set(const ReturnTimeLaw& law,
                                           std::uint64_t horizon, RngStream& rng);

// Pure renewal set started at 0 (gaps iid phi); the unshifted regenerative
// prelimit. May stop before the horizon only by passing it.
RenewalZeroSet sample_zero_set_from_origin(const ReturnTimeLaw& law,
                                           std::uint64_t horizon, RngStream& rng);

}  // namespace sfe
