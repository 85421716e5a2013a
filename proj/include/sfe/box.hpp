#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace sfe {

// Axis-aligned box with per-face open/closed flags. Coordinates are in the
// normalized scale (t = k/n for lattice queries, t in [0,1]^d for the limit
// objects).
struct RealBox {
  std::vector<double> lo, hi;
  std::vector<bool> lo_open, hi_open;

  std::size_t dims() const { return lo.size(); }

  static RealBox closed(std::vector<double> lo, std::vector<double> hi) {
    RealBox b;
    b.lo = std::move(lo);
    b.hi = std::move(hi);
    b.lo_open.assign(b.lo.size(), false);
    b.hi_open.assign(b.lo.size(), false);
    b.validate();
    return b;
  }

  static RealBox open(std::vector<double> lo, std::vector<double> hi) {
    RealBox b = closed(std::move(lo), std::move(hi));
    b.lo_open.assign(b.lo.size(), true);
    b.hi_open.assign(b.lo.size(), true);
    return b;
  }

  static RealBox unit(std::size_t d) {
    return closed(std::vector<double>(d, 0.0), std::vector<double>(d, 1.0));
  }

  // closed box [0, t]
  static RealBox zero_to(std::span<const double> t) {
    return closed(std::vector<double>(t.size(), 0.0),
                  std::vector<double>(t.begin(), t.end()));
  }

  void validate() const {
    if (lo.size() != hi.size() || lo.size() != lo_open.size() ||
        lo.size() != hi_open.size() || lo.empty())
      throw std::invalid_argument("RealBox: inconsistent dimensions");
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (!(lo[i] <= hi[i])) throw std::invalid_argument("RealBox: lo > hi");
  }
};

struct IndexRange {
  std::int64_t lo = 0;
  std::int64_t hi = -1;  // inclusive; empty when hi < lo
  bool empty() const { return hi < lo; }
  std::int64_t count() const { return empty() ? 0 : hi - lo + 1; }
};

namespace detail {

inline bool nearly_integer(double x, double& rounded) {
  rounded = std::round(x);
  return std::abs(x - rounded) <= 1e-9 * (1.0 + std::abs(x));
}

}  // namespace detail

// Lattice points k with k/n in the box, one range per coordinate.
inline std::vector<IndexRange> lattice_ranges(const RealBox& b,
                                              std::span<const std::uint64_t> n) {
  if (b.dims() != n.size())
    throw std::invalid_argument("lattice_ranges: dimension mismatch");
  std::vector<IndexRange> r(b.dims());
  for (std::size_t i = 0; i < b.dims(); ++i) {
    const double nd = static_cast<double>(n[i]);
    double x = b.lo[i] * nd, rx;
    std::int64_t klo;
    if (detail::nearly_integer(x, rx))
      klo = static_cast<std::int64_t>(rx) + (b.lo_open[i] ? 1 : 0);
    else
      klo = static_cast<std::int64_t>(std::ceil(x));
    double y = b.hi[i] * nd, ry;
    std::int64_t khi;
    if (detail::nearly_integer(y, ry))
      khi = static_cast<std::int64_t>(ry) - (b.hi_open[i] ? 1 : 0);
    else
      khi = static_cast<std::int64_t>(std::floor(y));
    klo = std::max<std::int64_t>(klo, 0);
    khi = std::min<std::int64_t>(khi, static_cast<std::int64_t>(n[i]));
    r[i] = IndexRange{klo, khi};
  }
  return r;
}

// Cells [c*delta, (c+1)*delta) meeting the box, one range per coordinate;
// cells are clamped to [0, ceil(horizon/delta)).
inline std::vector<IndexRange> cell_ranges(const RealBox& b, double delta,
                                           double horizon) {
  std::vector<IndexRange> r(b.dims());
  const auto last_cell = static_cast<std::int64_t>(std::ceil(horizon / delta)) - 1;
  for (std::size_t i = 0; i < b.dims(); ++i) {
    double x = b.lo[i] / delta, rx;
    std::int64_t clo = detail::nearly_integer(x, rx)
                           ? static_cast<std::int64_t>(rx)
                           : static_cast<std::int64_t>(std::floor(x));
    double y = b.hi[i] / delta, ry;
    std::int64_t chi;
    if (detail::nearly_integer(y, ry))
      chi = static_cast<std::int64_t>(ry) - (b.hi_open[i] ? 1 : 0);
    else
      chi = static_cast<std::int64_t>(std::floor(y));
    clo = std::max<std::int64_t>(clo, 0);
    chi = std::min(chi, last_cell);
    r[i] = IndexRange{clo, chi};
  }
  return r;
}

}  // namespace sfe
