#include "sfe/regen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sfe/stable.hpp"

namespace sfe {

RegenSetApprox RegenSetApprox::coarsened(int factor) const {
  if (factor < 1) throw std::invalid_argument("coarsened: factor must be >= 1");
  RegenSetApprox c;
  c.horizon = horizon;
  c.delta = delta * factor;
  c.origin_included = origin_included;
  c.cells.reserve(cells.size());
  for (std::int64_t cell : cells) {
    const std::int64_t cc = cell / factor;
    if (c.cells.empty() || c.cells.back() != cc) c.cells.push_back(cc);
  }
  return c;
}

RegenSetApprox sample_regen_set(double beta, double horizon, double delta,
                                RngStream& rng) {
  if (!(beta > 0.0 && beta < 1.0))
    throw std::invalid_argument("sample_regen_set: beta must lie in (0,1)");
  if (!(horizon > 0.0) || !(delta > 0.0) || !(delta < horizon))
    throw std::invalid_argument("sample_regen_set: need 0 < delta < horizon");

  RegenSetApprox r;
  r.horizon = horizon;
  r.delta = delta;
  r.origin_included = true;

  // E[L(h); L(h) <= delta] ~ h * delta^{1-beta} * beta / (Gamma(1-beta)(1-beta));
  // keep it below delta/10.
  const double h = std::tgamma(2.0 - beta) * std::pow(delta, beta) / (10.0 * beta);
  const std::int64_t last_cell = static_cast<std::int64_t>(std::ceil(horizon / delta)) - 1;

  double s = 0.0;
  std::int64_t prev_cell = 0;
  r.cells.push_back(0);
  while (s <= horizon) {
    const double jump = sample_one_sided_stable(beta, h, rng);
    const double s2 = s + jump;
    const std::int64_t c2 =
        std::min(last_cell, static_cast<std::int64_t>(std::floor(s2 / delta)));
    if (jump <= delta) {
      // below resolution: the whole spanned range counts as covered
      for (std::int64_t c = prev_cell + 1; c <= c2; ++c) r.cells.push_back(c);
      prev_cell = std::max(prev_cell, c2);
    } else if (s2 <= horizon) {
      if (c2 > prev_cell) {
        r.cells.push_back(c2);
        prev_cell = c2;
      }
    }
    s = s2;
  }
  return r;
}

RegenSetApprox sample_regen_set_renewal(const ReturnTimeLaw& law,
                                        std::uint64_t scale, double horizon,
                                        RngStream& rng) {
  if (scale < 1000)
    throw std::invalid_argument("sample_regen_set_renewal: scale must be >= 1000");
  const auto lattice_horizon =
      static_cast<std::uint64_t>(std::floor(scale * horizon));
  RenewalZeroSet z = sample_zero_set_from_origin(law, lattice_horizon, rng);
  RegenSetApprox r;
  r.horizon = horizon;
  r.delta = 1.0 / static_cast<double>(scale);
  r.origin_included = true;
  r.cells.assign(z.points.begin(), z.points.end());
  return r;
}

double ell_beta(std::span<const double> betas) {
  if (betas.empty()) throw std::invalid_argument("ell_beta: empty beta vector");
  double m = std::numeric_limits<double>::infinity();
  for (double b : betas) {
    if (!(b > 0.0 && b < 1.0))
      throw std::invalid_argument("ell_beta: betas must lie in (0,1)");
    m = std::min(m, 1.0 / (1.0 - b));
  }
  return m;
}

ShiftedProductSet make_shifted_product(std::span<const double> shift,
                                       std::span<const RegenSetApprox> comps) {
  if (shift.size() != comps.size() || shift.empty())
    throw std::invalid_argument("make_shifted_product: dimension mismatch");
  ShiftedProductSet p;
  p.delta = comps[0].delta;
  p.horizon = 0.0;
  p.shift.assign(shift.begin(), shift.end());
  p.cells.resize(comps.size());
  for (std::size_t i = 0; i < comps.size(); ++i) {
    if (comps[i].delta != p.delta)
      throw std::invalid_argument("make_shifted_product: resolution mismatch");
    if (!(shift[i] >= 0.0))
      throw std::invalid_argument("make_shifted_product: shifts must be >= 0");
    const auto offset =
        static_cast<std::int64_t>(std::llround(shift[i] / comps[i].delta));
    p.cells[i].reserve(comps[i].cells.size());
    for (std::int64_t c : comps[i].cells) p.cells[i].push_back(c + offset);
    p.horizon = std::max(p.horizon, shift[i] + comps[i].horizon);
  }
  return p;
}

ShiftedProductSet coarsen_shifted(const ShiftedProductSet& s, int factor) {
  if (factor < 1) throw std::invalid_argument("coarsen_shifted: factor must be >= 1");
  ShiftedProductSet c;
  c.delta = s.delta * factor;
  c.horizon = s.horizon;
  c.shift = s.shift;
  c.cells.resize(s.cells.size());
  for (std::size_t i = 0; i < s.cells.size(); ++i) {
    c.cells[i].reserve(s.cells[i].size());
    for (std::int64_t cell : s.cells[i]) {
      const std::int64_t cc = cell / factor;
      if (c.cells[i].empty() || c.cells[i].back() != cc) c.cells[i].push_back(cc);
    }
  }
  return c;
}

std::vector<std::int64_t> dilate_cells(std::span<const std::int64_t> cells,
                                       const IndexRange& range) {
  std::vector<std::int64_t> out;
  out.reserve(cells.size() * 3);
  // cells sorted; restrict to [range.lo-1, range.hi+1] before dilating
  auto lo = std::lower_bound(cells.begin(), cells.end(), range.lo - 1);
  auto hi = std::upper_bound(cells.begin(), cells.end(), range.hi + 1);
  for (auto it = lo; it != hi; ++it) {
    for (std::int64_t c = *it - 1; c <= *it + 1; ++c) {
      if (c < range.lo || c > range.hi) continue;
      if (out.empty() || c > out.back()) out.push_back(c);
    }
  }
  return out;
}

bool intersect_nonempty(std::span<const ShiftedProductSet> sets, const RealBox& b) {
  if (sets.empty()) throw std::invalid_argument("intersect_nonempty: no sets");
  const std::size_t d = sets[0].dims();
  const double delta = sets[0].delta;
  double horizon = 0.0;
  for (const auto& s : sets) {
    if (s.dims() != d || s.delta != delta)
      throw std::invalid_argument("intersect_nonempty: incompatible sets");
    horizon = std::max(horizon, s.horizon);
  }
  if (b.dims() != d) throw std::invalid_argument("intersect_nonempty: box dimension");

  const auto ranges = cell_ranges(b, delta, horizon);
  for (std::size_t i = 0; i < d; ++i) {
    if (ranges[i].empty()) return false;
    std::vector<std::int64_t> common = dilate_cells(sets[0].cells[i], ranges[i]);
    for (std::size_t j = 1; j < sets.size() && !common.empty(); ++j) {
      std::vector<std::int64_t> dj = dilate_cells(sets[j].cells[i], ranges[i]);
      std::vector<std::int64_t> tmp;
      std::set_intersection(common.begin(), common.end(), dj.begin(), dj.end(),
                            std::back_inserter(tmp));
      common.swap(tmp);
    }
    if (common.empty()) return false;
  }
  return true;
}

}  // namespace sfe
