#include "sfe/limit.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "sfe/stable.hpp"
#include "sfe/stats.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace sfe {

LimitSupMeasureSample::LimitSupMeasureSample(double alpha,
                                             std::vector<double> betas,
                                             double delta,
                                             std::vector<LimitAtom> atoms)
    : alpha_(alpha), betas_(std::move(betas)), delta_(delta), atoms_(std::move(atoms)) {
  if (betas_.empty()) throw std::invalid_argument("LimitSupMeasureSample: empty betas");
  if (atoms_.empty()) throw std::invalid_argument("LimitSupMeasureSample: no atoms");
  for (std::size_t j = 1; j < atoms_.size(); ++j)
    if (!(atoms_[j].weight < atoms_[j - 1].weight))
      throw std::invalid_argument("LimitSupMeasureSample: weights must decrease");
}

LimitSupMeasureSample sample_limit_measure(double alpha,
                                           std::span<const double> betas,
                                           std::size_t ell, double delta,
                                           RngStream rng) {
  if (ell < 1) throw std::invalid_argument("sample_limit_measure: ell must be >= 1");
  if (!(alpha > 0.0 && alpha < 2.0))
    throw std::invalid_argument("sample_limit_measure: alpha must lie in (0,2)");
  if (!(delta > 0.0 && delta <= 1e-3))
    throw std::invalid_argument(
        "sample_limit_measure: delta must give >= 1000 cells per coordinate");
  const std::size_t d = betas.size();

  RngStream gamma_stream = rng.child(1);
  PoissonWeightSeq seq = poisson_weights(ell, gamma_stream);

  std::vector<LimitAtom> atoms(ell);
  for (std::size_t j = 0; j < ell; ++j) {
    atoms[j].weight = std::pow(seq.gamma(j), -1.0 / alpha);
    atoms[j].shift.resize(d);
    std::vector<RegenSetApprox> comps(d);
    RngStream atom_stream = rng.child(2 + j);
    for (std::size_t i = 0; i < d; ++i) {
      RngStream shift_stream = atom_stream.child(2 * i);
      RngStream set_stream = atom_stream.child(2 * i + 1);
      // P(V <= x) = x^{1-beta}
      atoms[j].shift[i] = std::pow(shift_stream.uniform01(), 1.0 / (1.0 - betas[i]));
      comps[i] = sample_regen_set(betas[i], 1.0, delta, set_stream);
    }
    atoms[j].set = make_shifted_product(atoms[j].shift, comps);
  }
  return LimitSupMeasureSample(alpha, {betas.begin(), betas.end()}, delta,
                               std::move(atoms));
}

double LimitSupMeasureSample::eval(const RealBox& b, int* max_overlap_out) const {
  if (b.dims() != dims()) throw std::invalid_argument("eval: dimension mismatch");
  double horizon = 1.0;
  for (const auto& a : atoms_) horizon = std::max(horizon, a.set.horizon);
  const auto ranges = cell_ranges(b, delta_, horizon);

  // dilated, box-restricted cell lists per atom and coordinate
  const std::size_t ell = atoms_.size();
  std::vector<std::vector<std::vector<std::int64_t>>> dil(ell);
  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < ell; ++j) {
    dil[j].resize(dims());
    bool meets = true;
    for (std::size_t i = 0; i < dims() && meets; ++i) {
      if (ranges[i].empty()) {
        meets = false;
        break;
      }
      dil[j][i] = dilate_cells(atoms_[j].set.cells[i], ranges[i]);
      meets = !dil[j][i].empty();
    }
    if (meets) active.push_back(j);
  }

  double best = 0.0;
  int max_overlap = 0;
  if (active.empty()) {
    if (max_overlap_out) *max_overlap_out = 0;
    return 0.0;
  }

  std::vector<double> suffix(active.size() + 1, 0.0);
  for (std::size_t a = active.size(); a-- > 0;)
    suffix[a] = suffix[a + 1] + atoms_[active[a]].weight;

  // DFS over subsets with a common dilated cell in B; weights are positive so
  // subset values are dominated by their full cover patterns and the max
  // agrees with a dense grid scan at the same resolution.
  std::function<void(std::size_t, const std::vector<std::vector<std::int64_t>>&,
                     double, int)>
      dfs = [&](std::size_t next, const std::vector<std::vector<std::int64_t>>& lists,
                double v, int depth) {
        best = std::max(best, v);
        max_overlap = std::max(max_overlap, depth);
        for (std::size_t a = next; a < active.size(); ++a) {
          // weights sorted: no child can improve (slack guards float ulps so
          // the grid-scan oracle matches exactly)
          if (v + suffix[a] + 1e-12 * (1.0 + best) < best) break;
          const std::size_t j = active[a];
          std::vector<std::vector<std::int64_t>> inter(dims());
          bool nonempty = true;
          for (std::size_t i = 0; i < dims() && nonempty; ++i) {
            if (depth == 0) {
              inter[i] = dil[j][i];
            } else {
              std::set_intersection(lists[i].begin(), lists[i].end(),
                                    dil[j][i].begin(), dil[j][i].end(),
                                    std::back_inserter(inter[i]));
            }
            nonempty = !inter[i].empty();
          }
          if (!nonempty) continue;
          dfs(a + 1, inter, v + atoms_[j].weight, depth + 1);
        }
      };
  dfs(0, {}, 0.0, 0);

  if (max_overlap_out) *max_overlap_out = max_overlap;
  return best;
}

std::vector<double> LimitSupMeasureSample::field_on_grid(
    std::span<const std::vector<double>> grid) const {
  std::vector<double> out;
  out.reserve(grid.size());
  for (const auto& t : grid) {
    if (t.size() != dims())
      throw std::invalid_argument("field_on_grid: grid dimension mismatch");
    out.push_back(eval(RealBox::zero_to(t)));
  }
  return out;
}

std::vector<double> LimitSupMeasureSample::min_shift() const {
  std::vector<double> m(dims(), std::numeric_limits<double>::infinity());
  for (const auto& a : atoms_)
    for (std::size_t i = 0; i < dims(); ++i) m[i] = std::min(m[i], a.shift[i]);
  return m;
}

double grid_scan_sup_measure(const LimitSupMeasureSample& s, const RealBox& b) {
  if (s.ell() > 64)
    throw std::invalid_argument("grid_scan_sup_measure: at most 64 atoms");
  double horizon = 1.0;
  for (const auto& a : s.atoms()) horizon = std::max(horizon, a.set.horizon);
  const auto ranges = cell_ranges(b, s.delta(), horizon);
  const std::size_t d = s.dims();

  std::uint64_t cells = 1;
  for (const auto& r : ranges) {
    if (r.empty()) return 0.0;
    cells *= static_cast<std::uint64_t>(r.count());
    if (cells > (std::uint64_t{1} << 26))
      throw std::invalid_argument("grid_scan_sup_measure: box too large for grid scan");
  }

  // mask per cell per coordinate (dilated membership)
  std::vector<std::vector<std::uint64_t>> mask(d);
  for (std::size_t i = 0; i < d; ++i) {
    mask[i].assign(static_cast<std::size_t>(ranges[i].count()), 0);
    for (std::size_t j = 0; j < s.ell(); ++j) {
      for (std::int64_t c : dilate_cells(s.atoms()[j].set.cells[i], ranges[i]))
        mask[i][static_cast<std::size_t>(c - ranges[i].lo)] |= std::uint64_t{1} << j;
    }
  }

  double best = 0.0;
  std::vector<std::size_t> idx(d, 0);
  while (true) {
    std::uint64_t m = ~std::uint64_t{0};
    for (std::size_t i = 0; i < d; ++i) m &= mask[i][idx[i]];
    if (m != 0) {
      double v = 0.0;
      for (std::size_t j = 0; j < s.ell(); ++j)
        if (m & (std::uint64_t{1} << j)) v += s.atoms()[j].weight;
      best = std::max(best, v);
    }
    std::size_t i = 0;
    for (; i < d; ++i) {
      if (idx[i] + 1 < static_cast<std::size_t>(ranges[i].count())) {
        ++idx[i];
        break;
      }
      idx[i] = 0;
    }
    if (i == d) break;
  }
  return best;
}

ScaledLawResult scaled_law_check(double alpha, std::span<const double> betas,
                                 std::size_t ell, double delta,
                                 std::span<const double> c, std::size_t reps,
                                 std::uint64_t seed, bool parallel) {
  if (c.size() != betas.size())
    throw std::invalid_argument("scaled_law_check: c dimension mismatch");
  for (double ci : c)
    if (!(ci > 0.0 && ci <= 1.0))
      throw std::invalid_argument("scaled_law_check: c_i must lie in (0,1]");

  ScaledLawResult r;
  r.reps = reps;
  r.factor = 1.0;
  for (std::size_t i = 0; i < c.size(); ++i)
    r.factor *= std::pow(c[i], (1.0 - betas[i]) / alpha);

  const RealBox scaled = RealBox::closed(std::vector<double>(c.size(), 0.0),
                                         {c.begin(), c.end()});
  const RealBox unit = RealBox::unit(c.size());

  std::vector<double> a(reps), b(reps);
  const std::vector<double> bvec(betas.begin(), betas.end());
  const bool par = parallel;
#pragma omp parallel for schedule(dynamic) if (par)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(reps); ++i) {
    auto sa = sample_limit_measure(alpha, bvec, ell, delta,
                                   RngStream::seeded(seed, {0xA, static_cast<std::uint64_t>(i)}));
    a[i] = sa.eval(scaled);
    auto sb = sample_limit_measure(alpha, bvec, ell, delta,
                                   RngStream::seeded(seed, {0xB, static_cast<std::uint64_t>(i)}));
    b[i] = r.factor * sb.eval(unit);
  }
  r.ks = ks_statistic_two_sample(a, b);
  r.pvalue = ks_pvalue_two_sample(r.ks, reps, reps);
  return r;
}

}  // namespace sfe
