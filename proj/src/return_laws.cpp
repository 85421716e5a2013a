#include "sfe/return_laws.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sfe {

namespace {

constexpr std::uint64_t kSaturated = std::uint64_t{1} << 62;
constexpr std::size_t kTableSize = 4096;

double lgamma_pos(double x) {
  // positive arguments only; avoids the signgam global
  return std::lgamma(x);
}

}  // namespace

ReturnTimeLaw::ReturnTimeLaw(Kind kind, double beta) : kind_(kind), beta_(beta) {
  if (!(beta > 0.0 && beta < 1.0))
    throw std::invalid_argument("ReturnTimeLaw: beta must lie in (0,1)");
  if (kind_ == Kind::kSibuya) {
    name_ = "sibuya";
    log_gamma_1mb_ = lgamma_pos(1.0 - beta);
    table_.resize(kTableSize);
    table_[0] = 1.0;
    // survival(n) = survival(n-1) * (n - beta) / n
    for (std::size_t n = 1; n < kTableSize; ++n)
      table_[n] = table_[n - 1] * (static_cast<double>(n) - beta) / static_cast<double>(n);
  } else {
    name_ = "pareto";
  }
}

ReturnTimeLaw ReturnTimeLaw::sibuya(double beta) { return ReturnTimeLaw(Kind::kSibuya, beta); }
ReturnTimeLaw ReturnTimeLaw::pareto(double beta) { return ReturnTimeLaw(Kind::kPareto, beta); }

double ReturnTimeLaw::survival(std::uint64_t n) const {
  if (kind_ == Kind::kPareto)
    return std::pow(static_cast<double>(n) + 1.0, -beta_);
  if (n < table_.size()) return table_[n];
  // log-Gamma differences, stable for any n
  const double nn = static_cast<double>(n);
  return std::exp(lgamma_pos(nn + 1.0 - beta_) - log_gamma_1mb_ - lgamma_pos(nn + 1.0));
}

std::uint64_t ReturnTimeLaw::sample(RngStream& rng) const {
  const double u = rng.uniform01();
  if (kind_ == Kind::kPareto) {
    // survival(n) <= u  iff  n >= u^{-1/beta} - 1
    const double x = std::pow(u, -1.0 / beta_) - 1.0;
    if (x >= static_cast<double>(kSaturated)) return kSaturated;
    const double c = std::ceil(x);
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(c));
  }
  // phi = min{ n >= 1 : survival(n) <= u }
  if (table_.back() <= u) {
    auto it = std::upper_bound(table_.begin() + 1, table_.end(), u, std::greater<double>());
    return static_cast<std::uint64_t>(it - table_.begin());
  }
  // rare far tail: asymptotic guess, gallop, then bisect on the exact survival
  const double guess = std::pow(u * std::exp(log_gamma_1mb_), -1.0 / beta_);
  if (!(guess < static_cast<double>(kSaturated))) return kSaturated;
  std::uint64_t lo = table_.size() - 1;  // survival(lo) > u here
  std::uint64_t hi = std::max<std::uint64_t>(2 * lo, static_cast<std::uint64_t>(guess));
  while (survival(hi) > u) {
    lo = hi;
    if (hi >= kSaturated / 2) return kSaturated;
    hi *= 2;
  }
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (survival(mid) <= u)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

std::vector<double> first_zero_weights(const ReturnTimeLaw& law, std::uint64_t n) {
  std::vector<double> w(n + 1);
  for (std::uint64_t k = 0; k <= n; ++k) w[k] = law.survival(k);
  return w;
}

double normalizer_bn(std::span<const ReturnTimeLaw> laws,
                     std::span<const std::uint64_t> n, double alpha) {
  if (laws.size() != n.size())
    throw std::invalid_argument("normalizer_bn: laws/n dimension mismatch");
  if (laws.empty()) throw std::invalid_argument("normalizer_bn: empty dimension");
  if (!(alpha > 0.0 && alpha < 2.0))
    throw std::invalid_argument("normalizer_bn: alpha must lie in (0,2)");
  double log_b = 0.0;
  for (std::size_t i = 0; i < laws.size(); ++i) {
    long double s = 0.0L;
    for (std::uint64_t k = 0; k <= n[i]; ++k) s += laws[i].survival(k);
    log_b += std::log(static_cast<double>(s)) / alpha;
  }
  return std::exp(log_b);
}

ConditionedZeroSetSampler::ConditionedZeroSetSampler(ReturnTimeLaw law,
                                                     std::uint64_t horizon)
    : law_(std::move(law)), horizon_(horizon) {
  prefix_.resize(horizon_ + 1);
  long double acc = 0.0L;
  for (std::uint64_t k = 0; k <= horizon_; ++k) {
    acc += law_.survival(k);
    prefix_[k] = static_cast<double>(acc);
  }
}

std::uint64_t ConditionedZeroSetSampler::sample_first_point(RngStream& rng) const {
  const double target = rng.uniform01() * prefix_.back();
  auto it = std::upper_bound(prefix_.begin(), prefix_.end(), target);
  if (it == prefix_.end()) --it;
  return static_cast<std::uint64_t>(it - prefix_.begin());
}

RenewalZeroSet ConditionedZeroSetSampler::sample(RngStream& rng) const {
  RenewalZeroSet z;
  z.horizon = horizon_;
  std::uint64_t t = sample_first_point(rng);
  z.points.push_back(t);
  while (true) {
    const std::uint64_t gap = law_.sample(rng);
    if (gap > horizon_ - t) break;  // also covers saturated gaps
    t += gap;
    z.points.push_back(t);
  }
  return z;
}

RenewalZeroSet sample_conditioned_zero_set(const ReturnTimeLaw& law,
                                           std::uint64_t horizon, RngStream& rng) {
  return ConditionedZeroSetSampler(law, horizon).sample(rng);
}

RenewalZeroSet sample_zero_set_from_origin(const ReturnTimeLaw& law,
                                           std::uint64_t horizon, RngStream& rng) {
  RenewalZeroSet z;
  z.horizon = horizon;
  std::uint64_t t = 0;
  z.points.push_back(0);
  while (true) {
    const std::uint64_t gap = law.sample(rng);
    if (gap > horizon - t) break;
    t += gap;
    z.points.push_back(t);
  }
  return z;
}

}  // namespace sfe
