#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "sfe/box.hpp"
#include "sfe/return_laws.hpp"
#include "sfe/rng.hpp"

namespace sfe {

struct FieldAtom {
  int sign = 1;                                        // epsilon_j
  double weight = 0.0;                                 // Gamma_j^{-1/alpha}
  std::vector<std::vector<std::uint64_t>> zero_sets;   // per coordinate, sorted
};

// One realization of the truncated series representation of the SaS field on
// the lattice box [0, n]:
//   X_k = b_n C_alpha^{1/alpha} sum_j eps_j Gamma_j^{-1/alpha}
//                               1{k_i in Z_j^{(i)} for all i}.
// Values are never materialized; every query works off the atoms' product
// supports. Box maxima are exact (equal to a dense scan, which is kept as the
// serial reference).
class FieldSample {
 public:
  FieldSample(std::vector<ReturnTimeLaw> laws, std::vector<std::uint64_t> box,
              double alpha, double bn, double calpha,
              std::vector<FieldAtom> atoms);

  std::size_t dims() const { return box_.size(); }
  const std::vector<std::uint64_t>& box() const { return box_; }
  double alpha() const { return alpha_; }
  double bn() const { return bn_; }
  double calpha() const { return calpha_; }
  std::size_t ell() const { return atoms_.size(); }
  const std::vector<FieldAtom>& atoms() const { return atoms_; }
  const std::vector<ReturnTimeLaw>& laws() const { return laws_; }
  double scale() const;  // b_n * C_alpha^{1/alpha}

  // X_k, recomputed from the atoms.
  double value_at(std::span<const std::int64_t> k) const;

  // eta_n(B) = max_{k/n in B} X_k. Throws std::domain_error when B contains
  // no lattice point. The maximum includes 0 whenever some lattice point of B
  // lies outside every atom's support.
  double sup_measure(const RealBox& b) const;

  // max_{k/n in B} |X_k|
  double abs_sup_measure(const RealBox& b) const;

  // M_n(t) = max_{0 <= k <= n t} X_k per grid point.
  std::vector<double> partial_maxima(std::span<const std::vector<double>> grid) const;

  // Upper bound on the union-of-supports size (with multiplicity).
  std::uint64_t support_size_bound() const;

  // Visit every lattice point covered by at least one atom, with its value.
  // d <= 2 only; refuses when the candidate product exceeds max_points.
  void for_each_nonzero(
      std::uint64_t max_points,
      const std::function<void(std::span<const std::int64_t>, double)>& fn) const;

 private:
  struct CoordTable {
    std::vector<std::int64_t> cell;  // covered cells, sorted
    std::vector<std::uint64_t> mask;
  };
  struct QueryContext;

  double box_max(const std::vector<IndexRange>& ranges,
                 std::span<const double> signed_weights) const;
  void run_query(const QueryContext& ctx, std::span<const double> signed_weights,
                 double& best) const;

  std::vector<ReturnTimeLaw> laws_;
  std::vector<std::uint64_t> box_;
  double alpha_;
  double bn_;
  double calpha_;
  std::vector<FieldAtom> atoms_;
  std::vector<CoordTable> tables_;  // full-box cover masks, built once (ell <= 64)
};

// Draw a field realization. Atom j's randomness comes from substreams keyed
// by j alone, so extending ell keeps the common prefix, and reusing the same
// replicate stream across a ladder of box sizes couples the ensembles.
FieldSample sample_field(std::span<const ReturnTimeLaw> laws,
                         std::span<const std::uint64_t> n, double alpha,
                         std::size_t ell, RngStream rng);

// Same, with prebuilt conditioned samplers (one per coordinate) to amortize
// the first-point tables across replicates.
FieldSample sample_field(const std::vector<ConditionedZeroSetSampler>& samplers,
                         double alpha, std::size_t ell, RngStream rng);

// Serial dense references: scan every lattice point of B. Used by tests and
// the benchmark; quadratic in the box, keep boxes small.
double dense_sup_measure(const FieldSample& f, const RealBox& b);
double dense_abs_sup_measure(const FieldSample& f, const RealBox& b);

}  // namespace sfe
