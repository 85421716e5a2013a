#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sfe/box.hpp"
#include "sfe/regen.hpp"
#include "sfe/rng.hpp"

namespace sfe {

struct LimitAtom {
  double weight = 0.0;          // Gamma_j^{-1/alpha}, strictly decreasing in j
  std::vector<double> shift;    // V_j, coordinate i ~ x^{1-beta_i} on [0,1]
  ShiftedProductSet set;        // V_j + R_{beta,j}
};

// Truncated restricted representation of the limiting random sup measure on
// [0,1]^d: eta(B) = sup_{t in B} sum_j Gamma_j^{-1/alpha} 1{t in R~_j},
// evaluated by enumerating atom subsets S with a common dilated cell in B and
// maximizing sum_{j in S} weight_j. Proposition-style bound: fewer than
// l(beta) atoms can overlap; deeper overlaps found during evaluation are
// counted as resolution violations, not silently dropped (the value stays
// exact at the approximation resolution).
class LimitSupMeasureSample {
 public:
  LimitSupMeasureSample(double alpha, std::vector<double> betas, double delta,
                        std::vector<LimitAtom> atoms);

  double alpha() const { return alpha_; }
  const std::vector<double>& betas() const { return betas_; }
  double delta() const { return delta_; }
  std::size_t ell() const { return atoms_.size(); }
  const std::vector<LimitAtom>& atoms() const { return atoms_; }
  std::size_t dims() const { return betas_.size(); }

  // eta(B); max_overlap_out, when given, receives the deepest atom overlap
  // seen inside B.
  double eval(const RealBox& b, int* max_overlap_out = nullptr) const;

  // W(t) = eta([0,t]) per grid point.
  std::vector<double> field_on_grid(std::span<const std::vector<double>> grid) const;

  // componentwise minimum of the atom shifts: W vanishes strictly below it
  std::vector<double> min_shift() const;

 private:
  double alpha_;
  std::vector<double> betas_;
  double delta_;
  std::vector<LimitAtom> atoms_;
};

// Atom j draws its weight from the shared arrival stream and its shifts and
// regenerative components from substreams keyed by j, so a longer truncation
// extends a shorter one atom-for-atom.
LimitSupMeasureSample sample_limit_measure(double alpha,
                                           std::span<const double> betas,
                                           std::size_t ell, double delta,
                                           RngStream rng);

// Serial reference: scan every cell tuple of B and maximize the sum of
// covering atoms. Identical to eval() at the same resolution; cost is
// (1/delta)^d, keep boxes/resolutions small.
double grid_scan_sup_measure(const LimitSupMeasureSample& s, const RealBox& b);

struct ScaledLawResult {
  double factor = 0.0;       // prod_i c_i^{(1-beta_i)/alpha}
  double ks = 0.0;
  double pvalue = 0.0;
  std::size_t reps = 0;
};

// Self-similarity check: KS between eta([0,c]) and factor * eta([0,1]^d)
// over independent replicate halves.
ScaledLawResult scaled_law_check(double alpha, std::span<const double> betas,
                                 std::size_t ell, double delta,
                                 std::span<const double> c, std::size_t reps,
                                 std::uint64_t seed, bool parallel = true);

}  // namespace sfe
