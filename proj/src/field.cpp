#include "sfe/field.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <functional>

#include "sfe/stable.hpp"

namespace sfe {

namespace {

std::span<const std::uint64_t> restrict_sorted(const std::vector<std::uint64_t>& v,
                                               const IndexRange& r) {
  auto lo = std::lower_bound(v.begin(), v.end(),
                             static_cast<std::uint64_t>(std::max<std::int64_t>(r.lo, 0)));
  auto hi = r.hi < 0 ? lo : std::upper_bound(lo, v.end(), static_cast<std::uint64_t>(r.hi));
  return {v.data() + (lo - v.begin()), static_cast<std::size_t>(hi - lo)};
}

}  // namespace

FieldSample::FieldSample(std::vector<ReturnTimeLaw> laws,
                         std::vector<std::uint64_t> box, double alpha, double bn,
                         double calpha, std::vector<FieldAtom> atoms)
    : laws_(std::move(laws)),
      box_(std::move(box)),
      alpha_(alpha),
      bn_(bn),
      calpha_(calpha),
      atoms_(std::move(atoms)) {
  if (laws_.size() != box_.size() || box_.empty())
    throw std::invalid_argument("FieldSample: dimension mismatch");
  if (atoms_.empty()) throw std::invalid_argument("FieldSample: need atoms");
  for (const auto& a : atoms_)
    if (a.zero_sets.size() != box_.size())
      throw std::invalid_argument("FieldSample: atom dimension mismatch");

  // cover-mask tables over the whole box, one pass per coordinate; box
  // queries slice them. Only possible with <= 64 atoms (one bit each).
  if (atoms_.size() <= 64) {
    tables_.resize(dims());
    for (std::size_t i = 0; i < dims(); ++i) {
      auto& t = tables_[i];
      if (box_[i] < (std::uint64_t{1} << 22)) {
        // dense scratch array, linear in the total support size
        std::vector<std::uint64_t> dense(box_[i] + 1, 0);
        for (std::size_t j = 0; j < atoms_.size(); ++j)
          for (std::uint64_t c : atoms_[j].zero_sets[i])
            dense[c] |= std::uint64_t{1} << j;
        for (std::uint64_t c = 0; c <= box_[i]; ++c)
          if (dense[c] != 0) {
            t.cell.push_back(static_cast<std::int64_t>(c));
            t.mask.push_back(dense[c]);
          }
      } else {
        std::vector<std::pair<std::int64_t, std::uint64_t>> entries;
        for (std::size_t j = 0; j < atoms_.size(); ++j)
          for (std::uint64_t c : atoms_[j].zero_sets[i])
            entries.emplace_back(static_cast<std::int64_t>(c), std::uint64_t{1} << j);
        std::sort(entries.begin(), entries.end());
        for (const auto& [c, bit] : entries) {
          if (!t.cell.empty() && t.cell.back() == c)
            t.mask.back() |= bit;
          else {
            t.cell.push_back(c);
            t.mask.push_back(bit);
          }
        }
      }
    }
  }
}

double FieldSample::scale() const { return bn_ * std::pow(calpha_, 1.0 / alpha_); }

double FieldSample::value_at(std::span<const std::int64_t> k) const {
  if (k.size() != dims()) throw std::invalid_argument("value_at: dimension mismatch");
  for (std::size_t i = 0; i < dims(); ++i)
    if (k[i] < 0 || static_cast<std::uint64_t>(k[i]) > box_[i])
      throw std::invalid_argument("value_at: point outside box");
  double acc = 0.0;
  for (const auto& a : atoms_) {
    bool in = true;
    for (std::size_t i = 0; i < dims() && in; ++i)
      in = std::binary_search(a.zero_sets[i].begin(), a.zero_sets[i].end(),
                              static_cast<std::uint64_t>(k[i]));
    if (in) acc += a.sign * a.weight;
  }
  return scale() * acc;
}

// Per-query view: slices of the cover tables, one per coordinate, ordered by
// the positive mass of each cell's mask. The box maximum is the max of
// v(mask_1(c_1) & ... & mask_d(c_d)) over cell tuples; since an AND can never
// carry more positive mass than any factor, scanning tuples in decreasing
// v+ order allows breaking as soon as the bound drops below the running best.
struct FieldSample::QueryContext {
  std::vector<IndexRange> ranges;
  std::vector<std::pair<std::size_t, std::size_t>> slice;  // [begin,end) per coord
  bool zero_attained = false;
};

namespace {

double signed_value(std::uint64_t m, std::span<const double> w) {
  double acc = 0.0;
  while (m != 0) {
    const int j = std::countr_zero(m);
    m &= m - 1;
    acc += w[j];
  }
  return acc;
}

}  // namespace

void FieldSample::run_query(const QueryContext& ctx,
                            std::span<const double> signed_weights,
                            double& best) const {
  const std::size_t d = dims();

  // per coordinate: distinct cover masks in the slice with their positive
  // mass, sorted by decreasing positive mass
  struct Entry {
    double pos;
    std::uint64_t mask;
  };
  std::vector<std::vector<Entry>> ordered(d);
  for (std::size_t i = 0; i < d; ++i) {
    const auto& t = tables_[i];
    std::vector<std::uint64_t> masks(t.mask.begin() + ctx.slice[i].first,
                                     t.mask.begin() + ctx.slice[i].second);
    std::sort(masks.begin(), masks.end());
    masks.erase(std::unique(masks.begin(), masks.end()), masks.end());
    ordered[i].reserve(masks.size());
    for (std::uint64_t m : masks) {
      double pos = 0.0;
      std::uint64_t b = m;
      while (b != 0) {
        const int j = std::countr_zero(b);
        b &= b - 1;
        pos += std::max(0.0, signed_weights[j]);
      }
      ordered[i].push_back({pos, m});
    }
    std::sort(ordered[i].begin(), ordered[i].end(),
              [](const Entry& a, const Entry& b) { return a.pos > b.pos; });
  }

  if (ctx.zero_attained) best = std::max(best, 0.0);

  auto slack = [&] { return 1e-9 * (1.0 + std::abs(best)); };

  // nested descent over coordinates, running AND, bound = min v+ so far
  std::function<void(std::size_t, std::uint64_t, double)> scan =
      [&](std::size_t i, std::uint64_t acc, double bound) {
        if (i == d) {
          if (acc != 0) best = std::max(best, signed_value(acc, signed_weights));
          return;
        }
        for (const Entry& e : ordered[i]) {
          const double b = std::min(bound, e.pos);
          if (b < best - slack()) break;  // sorted: nothing below can improve
          const std::uint64_t m = acc & e.mask;
          if (m == 0) continue;
          scan(i + 1, m, b);
        }
      };
  scan(0, ~std::uint64_t{0}, std::numeric_limits<double>::infinity());
}

double FieldSample::box_max(const std::vector<IndexRange>& ranges,
                            std::span<const double> signed_weights) const {
  if (atoms_.size() > 64)
    throw std::invalid_argument("box queries support at most 64 atoms");
  const std::size_t d = dims();

  QueryContext ctx;
  ctx.ranges = ranges;
  ctx.slice.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    const auto& t = tables_[i];
    ctx.slice[i] = {
        static_cast<std::size_t>(
            std::lower_bound(t.cell.begin(), t.cell.end(), ranges[i].lo) -
            t.cell.begin()),
        static_cast<std::size_t>(
            std::upper_bound(t.cell.begin(), t.cell.end(), ranges[i].hi) -
            t.cell.begin())};
  }

  // 0 is attained iff some lattice point in the box has an empty cover
  // pattern: an uncovered cell in some coordinate, or covered cells whose
  // masks AND to zero
  ctx.zero_attained = false;
  for (std::size_t i = 0; i < d && !ctx.zero_attained; ++i)
    if (static_cast<std::int64_t>(ctx.slice[i].second - ctx.slice[i].first) <
        ranges[i].count())
      ctx.zero_attained = true;
  if (!ctx.zero_attained) {
    std::vector<std::vector<std::uint64_t>> distinct(d);
    for (std::size_t i = 0; i < d; ++i) {
      distinct[i].assign(tables_[i].mask.begin() + ctx.slice[i].first,
                         tables_[i].mask.begin() + ctx.slice[i].second);
      std::sort(distinct[i].begin(), distinct[i].end());
      distinct[i].erase(std::unique(distinct[i].begin(), distinct[i].end()),
                        distinct[i].end());
    }
    std::function<bool(std::size_t, std::uint64_t)> search =
        [&](std::size_t i, std::uint64_t acc) -> bool {
      if (acc == 0) return true;
      if (i == d) return false;
      for (std::uint64_t m : distinct[i])
        if (search(i + 1, acc & m)) return true;
      return false;
    };
    ctx.zero_attained = search(0, ~std::uint64_t{0});
  }

  double best = -std::numeric_limits<double>::infinity();
  run_query(ctx, signed_weights, best);
  return scale() * best;
}

double FieldSample::sup_measure(const RealBox& b) const {
  const auto ranges = lattice_ranges(b, box_);
  for (const auto& r : ranges)
    if (r.empty()) throw std::domain_error("sup_measure: empty box (no lattice point)");
  std::vector<double> w(atoms_.size());
  for (std::size_t j = 0; j < atoms_.size(); ++j)
    w[j] = atoms_[j].sign * atoms_[j].weight;
  return box_max(ranges, w);
}

double FieldSample::abs_sup_measure(const RealBox& b) const {
  const auto ranges = lattice_ranges(b, box_);
  for (const auto& r : ranges)
    if (r.empty())
      throw std::domain_error("abs_sup_measure: empty box (no lattice point)");
  std::vector<double> w(atoms_.size()), wf(atoms_.size());
  for (std::size_t j = 0; j < atoms_.size(); ++j) {
    w[j] = atoms_[j].sign * atoms_[j].weight;
    wf[j] = -w[j];
  }
  return std::max(box_max(ranges, w), box_max(ranges, wf));
}

std::vector<double> FieldSample::partial_maxima(
    std::span<const std::vector<double>> grid) const {
  std::vector<double> out;
  out.reserve(grid.size());
  for (const auto& t : grid) {
    if (t.size() != dims())
      throw std::invalid_argument("partial_maxima: grid dimension mismatch");
    for (double ti : t)
      if (!(ti >= 0.0)) throw std::invalid_argument("partial_maxima: t must be >= 0");
    out.push_back(sup_measure(RealBox::zero_to(t)));
  }
  return out;
}

std::uint64_t FieldSample::support_size_bound() const {
  std::uint64_t total = 0;
  for (const auto& a : atoms_) {
    std::uint64_t p = 1;
    for (const auto& z : a.zero_sets) {
      p *= z.size();
      if (p > (std::uint64_t{1} << 40)) return std::uint64_t{1} << 40;
    }
    total += p;
  }
  return total;
}

void FieldSample::for_each_nonzero(
    std::uint64_t max_points,
    const std::function<void(std::span<const std::int64_t>, double)>& fn) const {
  if (dims() > 2)
    throw std::invalid_argument("for_each_nonzero: d <= 2 only");
  if (atoms_.size() > 64)
    throw std::invalid_argument("for_each_nonzero: at most 64 atoms");

  std::uint64_t candidates = 1;
  for (const auto& t : tables_) candidates *= std::max<std::size_t>(1, t.cell.size());
  if (candidates > max_points)
    throw std::runtime_error("for_each_nonzero: support too large to enumerate");

  const double sc = scale();
  auto value_of_mask = [&](std::uint64_t m) {
    double acc = 0.0;
    for (std::size_t j = 0; j < atoms_.size(); ++j)
      if (m & (std::uint64_t{1} << j)) acc += atoms_[j].sign * atoms_[j].weight;
    return sc * acc;
  };

  if (dims() == 1) {
    std::int64_t k[1];
    for (std::size_t a = 0; a < tables_[0].cell.size(); ++a) {
      k[0] = tables_[0].cell[a];
      fn(std::span<const std::int64_t>(k, 1), value_of_mask(tables_[0].mask[a]));
    }
    return;
  }
  std::int64_t k[2];
  for (std::size_t a = 0; a < tables_[0].cell.size(); ++a) {
    for (std::size_t b2 = 0; b2 < tables_[1].cell.size(); ++b2) {
      const std::uint64_t m = tables_[0].mask[a] & tables_[1].mask[b2];
      if (m == 0) continue;
      k[0] = tables_[0].cell[a];
      k[1] = tables_[1].cell[b2];
      fn(std::span<const std::int64_t>(k, 2), value_of_mask(m));
    }
  }
}

FieldSample sample_field(std::span<const ReturnTimeLaw> laws,
                         std::span<const std::uint64_t> n, double alpha,
                         std::size_t ell, RngStream rng) {
  std::vector<ConditionedZeroSetSampler> samplers;
  samplers.reserve(laws.size());
  for (std::size_t i = 0; i < laws.size(); ++i)
    samplers.emplace_back(laws[i], n[i]);
  return sample_field(samplers, alpha, ell, rng);
}

FieldSample sample_field(const std::vector<ConditionedZeroSetSampler>& samplers,
                         double alpha, std::size_t ell, RngStream rng) {
  if (samplers.empty()) throw std::invalid_argument("sample_field: no coordinates");
  if (ell < 1) throw std::invalid_argument("sample_field: ell must be >= 1");
  if (!(alpha > 0.0 && alpha < 2.0))
    throw std::invalid_argument("sample_field: alpha must lie in (0,2)");

  const std::size_t d = samplers.size();
  std::vector<ReturnTimeLaw> laws;
  std::vector<std::uint64_t> box;
  double log_bn = 0.0;
  for (const auto& s : samplers) {
    laws.push_back(s.law());
    box.push_back(s.horizon());
    log_bn += std::log(s.bn_alpha()) / alpha;
  }

  RngStream gamma_stream = rng.child(1);
  PoissonWeightSeq seq = poisson_weights(ell, gamma_stream);

  std::vector<FieldAtom> atoms(ell);
  for (std::size_t j = 0; j < ell; ++j) {
    atoms[j].sign = seq.sign(j);
    atoms[j].weight = std::pow(seq.gamma(j), -1.0 / alpha);
    atoms[j].zero_sets.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
      RngStream zs = rng.child(2 + j * d + i);
      atoms[j].zero_sets[i] = samplers[i].sample(zs).points;
    }
  }
  return FieldSample(std::move(laws), std::move(box), alpha, std::exp(log_bn),
                     c_alpha(alpha), std::move(atoms));
}

double dense_sup_measure(const FieldSample& f, const RealBox& b) {
  const auto ranges = lattice_ranges(b, f.box());
  std::uint64_t count = 1;
  for (const auto& r : ranges) {
    if (r.empty()) throw std::domain_error("dense_sup_measure: empty box");
    count *= static_cast<std::uint64_t>(r.count());
    if (count > (std::uint64_t{1} << 26))
      throw std::invalid_argument("dense_sup_measure: box too large for dense scan");
  }
  const std::size_t d = f.dims();
  std::vector<std::int64_t> k(d);
  for (std::size_t i = 0; i < d; ++i) k[i] = ranges[i].lo;
  double best = -std::numeric_limits<double>::infinity();
  while (true) {
    best = std::max(best, f.value_at(k));
    std::size_t i = 0;
    for (; i < d; ++i) {
      if (k[i] < ranges[i].hi) {
        ++k[i];
        break;
      }
      k[i] = ranges[i].lo;
    }
    if (i == d) break;
  }
  return best;
}

double dense_abs_sup_measure(const FieldSample& f, const RealBox& b) {
  const auto ranges = lattice_ranges(b, f.box());
  std::uint64_t count = 1;
  for (const auto& r : ranges) {
    if (r.empty()) throw std::domain_error("dense_abs_sup_measure: empty box");
    count *= static_cast<std::uint64_t>(r.count());
    if (count > (std::uint64_t{1} << 26))
      throw std::invalid_argument("dense_abs_sup_measure: box too large for dense scan");
  }
  const std::size_t d = f.dims();
  std::vector<std::int64_t> k(d);
  for (std::size_t i = 0; i < d; ++i) k[i] = ranges[i].lo;
  double best = 0.0;
  while (true) {
    best = std::max(best, std::abs(f.value_at(k)));
    std::size_t i = 0;
    for (; i < d; ++i) {
      if (k[i] < ranges[i].hi) {
        ++k[i];
        break;
      }
      k[i] = ranges[i].lo;
    }
    if (i == d) break;
  }
  return best;
}

}  // namespace sfe
