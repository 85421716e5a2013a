#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sfe/box.hpp"
#include "sfe/return_laws.hpp"
#include "sfe/rng.hpp"

namespace sfe {

// Grid approximation of a beta-stable regenerative set (closure of the range
// of the beta-stable subordinator) on [0, horizon]: the sorted cell indices c
// for which the set meets [c*delta, (c+1)*delta). The marking over-covers,
// never under-covers, so refinements shrink toward the true Lebesgue-null set.
struct RegenSetApprox {
  double horizon = 0.0;
  double delta = 0.0;
  std::vector<std::int64_t> cells;
  bool origin_included = false;

  double coverage_fraction() const {
    return static_cast<double>(cells.size()) * delta / horizon;
  }

  // Coupled coarse version: cell indices divided by factor. Used for the
  // refinement-monotonicity checks (same path at two resolutions).
  RegenSetApprox coarsened(int factor) const;
};

// Simulate the subordinator range on a time grid. The step is chosen so the
// expected spatially unresolved motion per step stays below delta/10; an
// increment <= delta marks every spanned cell, a larger one only its
// endpoints' cells.
RegenSetApprox sample_regen_set(double beta, double horizon, double delta,
                                RngStream& rng);

// Independent second construction: renewal zero set on {0,...,floor(scale*
// horizon)} scaled by 1/scale, binned at delta = 1/scale.
RegenSetApprox sample_regen_set_renewal(const ReturnTimeLaw& law,
                                        std::uint64_t scale, double horizon,
                                        RngStream& rng);

// l(beta) = min_i (1 - beta_i)^{-1}: strictly more than any admissible number
// of intersecting shifted products.
double ell_beta(std::span<const double> betas);

// Product of per-coordinate shifted regenerative sets prod_i (v_i + R_i),
// stored as shifted sorted cell lists at a common resolution.
struct ShiftedProductSet {
  double delta = 0.0;
  double horizon = 0.0;           // per-coordinate horizon of the shifted set
  std::vector<double> shift;
  std::vector<std::vector<std::int64_t>> cells;  // per coordinate, sorted

  std::size_t dims() const { return shift.size(); }
};

ShiftedProductSet make_shifted_product(std::span<const double> shift,
                                       std::span<const RegenSetApprox> comps);

// Coupled coarse version of a shifted product (cell indices divided by
// factor). Refining can only remove intersections, never create them.
ShiftedProductSet coarsen_shifted(const ShiftedProductSet& s, int factor);

// Dilated-cell membership: a cell c belongs to the closed delta-dilation of a
// set iff some marked cell is within one cell of c. All intersection queries
// use this convention (the true sets are Lebesgue-null, exact cell equality
// would almost always be false).
std::vector<std::int64_t> dilate_cells(std::span<const std::int64_t> cells,
                                       const IndexRange& range);

// Do all sets meet a common point of B, at the approximation resolution?
bool intersect_nonempty(std::span<const ShiftedProductSet> sets, const RealBox& b);

}  // namespace sfe
