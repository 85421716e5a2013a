// Timing comparison of the parallel kernels against their serial references:
// OpenMP vs serial ensembles, sparse vs dense box maxima, subset enumeration
// vs grid scan. Prints one CSV row per case.

#include <chrono>
#include <cstdio>
#include <vector>

#include "sfe/field.hpp"
#include "sfe/limit.hpp"
#include "sfe/stable.hpp"
#include "sfe/verify.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

using namespace sfe;
using clock_t_ = std::chrono::steady_clock;

namespace {

double seconds_since(clock_t_::time_point t0) {
  return std::chrono::duration<double>(clock_t_::now() - t0).count();
}

void row(const char* name, double serial_s, double other_s, const char* other) {
  std::printf("%-34s %10.4fs %s %10.4fs  speedup %.2fx\n", name, serial_s, other,
              other_s, serial_s / other_s);
}

}  // namespace

int main() {
#if defined(_OPENMP)
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (no OpenMP)\n");
#endif
  std::printf("%-34s %11s %17s\n", "case", "serial", "comparison");

  // ensemble of field sup-measures, serial vs OpenMP
  {
    const std::vector<ReturnTimeLaw> laws = {ReturnTimeLaw::sibuya(0.8),
                                             ReturnTimeLaw::sibuya(0.8)};
    std::vector<ConditionedZeroSetSampler> samplers;
    for (const auto& l : laws) samplers.emplace_back(l, 10000);
    auto fn = [&](std::size_t, RngStream rng) {
      FieldSample f = sample_field(samplers, 1.5, 64, rng);
      return f.sup_measure(RealBox::unit(2)) / f.bn();
    };
    auto t0 = clock_t_::now();
    auto serial = run_ensemble(64, 1, 2, false, fn);
    const double ts = seconds_since(t0);
    t0 = clock_t_::now();
    auto par = run_ensemble(64, 1, 2, true, fn);
    const double tp = seconds_since(t0);
    row("field ensemble 64x (n=10^4)", ts, tp, "openmp");
    if (serial != par) std::printf("  MISMATCH: serial and parallel differ!\n");
  }

  // sparse vs dense box maximum
  {
    const std::vector<ReturnTimeLaw> laws = {ReturnTimeLaw::sibuya(0.6),
                                             ReturnTimeLaw::sibuya(0.6)};
    const std::vector<std::uint64_t> n = {50, 50};
    std::vector<FieldSample> fields;
    for (int i = 0; i < 200; ++i)
      fields.push_back(sample_field(laws, n, 1.5, 8, RngStream::seeded(3, {(std::uint64_t)i})));
    const RealBox full = RealBox::unit(2);
    auto t0 = clock_t_::now();
    double acc = 0.0;
    for (const auto& f : fields) acc += dense_sup_measure(f, full);
    const double td = seconds_since(t0);
    t0 = clock_t_::now();
    double acc2 = 0.0;
    for (const auto& f : fields) acc2 += f.sup_measure(full);
    const double tsp = seconds_since(t0);
    row("box max 200x (n=50^2, dense ref)", td, tsp, "sparse");
    if (acc != acc2) std::printf("  MISMATCH: dense and sparse differ!\n");
  }

  // subset enumeration vs grid scan
  {
    std::vector<double> betas = {0.8, 0.8};
    std::vector<LimitSupMeasureSample> samples;
    for (int i = 0; i < 50; ++i)
      samples.push_back(
          sample_limit_measure(1.0, betas, 6, 1e-3, RngStream::seeded(4, {(std::uint64_t)i})));
    const RealBox full = RealBox::unit(2);
    auto t0 = clock_t_::now();
    double acc = 0.0;
    for (const auto& s : samples) acc += grid_scan_sup_measure(s, full);
    const double tg = seconds_since(t0);
    t0 = clock_t_::now();
    double acc2 = 0.0;
    for (const auto& s : samples) acc2 += s.eval(full);
    const double te = seconds_since(t0);
    row("sup measure 50x (grid-scan ref)", tg, te, "enum");
    if (acc != acc2) std::printf("  MISMATCH: grid scan and enumeration differ!\n");
  }

  // conditioned zero-set sampling throughput
  {
    auto law = ReturnTimeLaw::sibuya(0.8);
    ConditionedZeroSetSampler sampler(law, 100000);
    auto rng = RngStream::seeded(5);
    auto t0 = clock_t_::now();
    std::size_t points = 0;
    for (int i = 0; i < 200; ++i) points += sampler.sample(rng).points.size();
    const double t = seconds_since(t0);
    std::printf("%-34s %10.4fs  (%.1fM points/s)\n", "zero sets 200x (n=10^5, b=0.8)", t,
                points / t / 1e6);
  }
  return 0;
}
