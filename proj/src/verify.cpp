#include "sfe/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sfe/field.hpp"
#include "sfe/limit.hpp"
#include "sfe/regen.hpp"
#include "sfe/stable.hpp"
#include "sfe/stats.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace sfe {

std::atomic<bool>& abort_flag() {
  static std::atomic<bool> flag{false};
  return flag;
}

ReturnTimeLaw ExperimentConfig::make_law(double beta) const {
  if (law == "sibuya") return ReturnTimeLaw::sibuya(beta);
  if (law == "pareto") return ReturnTimeLaw::pareto(beta);
  throw std::invalid_argument("unknown return law: " + law);
}

void ExperimentConfig::validate() const {
  if (betas.empty()) throw std::invalid_argument("config: betas empty");
  for (double b : betas)
    if (!(b > 0.0 && b < 1.0)) throw std::invalid_argument("config: beta out of (0,1)");
  if (!(alpha > 0.0 && alpha < 2.0))
    throw std::invalid_argument("config: alpha out of (0,2)");
  if (replicates < 100) throw std::invalid_argument("config: replicates must be >= 100");
  for (std::size_t i = 1; i < n_ladder.size(); ++i)
    if (n_ladder[i] <= n_ladder[i - 1])
      throw std::invalid_argument("config: n_ladder must be strictly increasing");
  if (n_ladder.empty()) throw std::invalid_argument("config: n_ladder empty");
  if (field_ell < 1 || limit_ell < 1) throw std::invalid_argument("config: ell >= 1");
  if (marginal_ell < 256)
    throw std::invalid_argument("config: marginal_ell must be >= 256");
  (void)make_law(betas[0]);
}

namespace {

template <typename T>
void get_to_if(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  get_to_if(j, "alpha", c.alpha);
  get_to_if(j, "betas", c.betas);
  get_to_if(j, "law", c.law);
  get_to_if(j, "n_ladder", c.n_ladder);
  get_to_if(j, "field_ell", c.field_ell);
  get_to_if(j, "limit_ell", c.limit_ell);
  get_to_if(j, "delta", c.delta);
  get_to_if(j, "replicates", c.replicates);
  get_to_if(j, "seed", c.seed);
  get_to_if(j, "couple_ladder", c.couple_ladder);
  get_to_if(j, "parallel", c.parallel);
  get_to_if(j, "marginal_ell", c.marginal_ell);
  get_to_if(j, "marginal_replicates", c.marginal_replicates);
  get_to_if(j, "marginal_thetas", c.marginal_thetas);
  get_to_if(j, "dichotomy_replicates", c.dichotomy_replicates);
  get_to_if(j, "dichotomy_window", c.dichotomy_window);
  get_to_if(j, "dichotomy_rungs", c.dichotomy_rungs);
  get_to_if(j, "grid", c.grid);
  if (j.contains("thresholds")) {
    const auto& t = j.at("thresholds");
    get_to_if(t, "ks_closed_form", c.thresholds.ks_closed_form);
    get_to_if(t, "ks_two_sample", c.thresholds.ks_two_sample);
    get_to_if(t, "ks_shift_law", c.thresholds.ks_shift_law);
    get_to_if(t, "freq_high", c.thresholds.freq_high);
    get_to_if(t, "freq_low", c.thresholds.freq_low);
    get_to_if(t, "frechet_reject", c.thresholds.frechet_reject);
    get_to_if(t, "cf_sigmas", c.thresholds.cf_sigmas);
    get_to_if(t, "hill_rel_err", c.thresholds.hill_rel_err);
    get_to_if(t, "pvalue_floor", c.thresholds.pvalue_floor);
  }
  c.validate();
  return c;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["alpha"] = alpha;
  j["betas"] = betas;
  j["law"] = law;
  j["n_ladder"] = n_ladder;
  j["field_ell"] = field_ell;
  j["limit_ell"] = limit_ell;
  j["delta"] = delta;
  j["replicates"] = replicates;
  j["seed"] = seed;
  j["couple_ladder"] = couple_ladder;
  j["parallel"] = parallel;
  j["marginal_ell"] = marginal_ell;
  j["marginal_replicates"] = marginal_replicates;
  j["marginal_thetas"] = marginal_thetas;
  j["dichotomy_replicates"] = dichotomy_replicates;
  j["dichotomy_window"] = dichotomy_window;
  j["dichotomy_rungs"] = dichotomy_rungs;
  j["grid"] = grid;
  j["thresholds"] = {{"ks_closed_form", thresholds.ks_closed_form},
                     {"ks_two_sample", thresholds.ks_two_sample},
                     {"ks_shift_law", thresholds.ks_shift_law},
                     {"freq_high", thresholds.freq_high},
                     {"freq_low", thresholds.freq_low},
                     {"frechet_reject", thresholds.frechet_reject},
                     {"cf_sigmas", thresholds.cf_sigmas},
                     {"hill_rel_err", thresholds.hill_rel_err},
                     {"pvalue_floor", thresholds.pvalue_floor}};
  return j;
}

void ExperimentResult::add(StatRow row) {
  if (!row.pass) pass = false;
  rows.push_back(std::move(row));
}

void ExperimentResult::note(const std::string& subject, const std::string& stat,
                            double value) {
  add(StatRow{test, subject, stat, value,
              std::numeric_limits<double>::quiet_NaN(), "", true});
}

void ExperimentResult::check_le(const std::string& subject, const std::string& stat,
                                double value, double threshold) {
  add(StatRow{test, subject, stat, value, threshold, "<=", value <= threshold});
}

void ExperimentResult::check_ge(const std::string& subject, const std::string& stat,
                                double value, double threshold) {
  add(StatRow{test, subject, stat, value, threshold, ">=", value >= threshold});
}

nlohmann::json ExperimentResult::to_json() const {
  nlohmann::json j;
  j["test"] = test;
  j["version"] = version;
  j["seed"] = seed;
  j["config_hash"] = config_hash;
  j["pass"] = pass;
  j["partial"] = partial;
  auto rs = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json o;
    o["subject"] = r.subject;
    o["statistic"] = r.statistic;
    o["value"] = r.value;
    if (!std::isnan(r.threshold)) {
      o["threshold"] = r.threshold;
      o["cmp"] = r.cmp;
    }
    o["pass"] = r.pass;
    rs.push_back(std::move(o));
  }
  j["rows"] = rs;
  j["samples"] = samples;
  return j;
}

std::string ExperimentResult::to_csv() const {
  std::ostringstream os;
  os << "test,subject,statistic,value,threshold,cmp,pass\n";
  for (const auto& r : rows) {
    os << r.test << ",\"" << r.subject << "\"," << r.statistic << ",";
    os.precision(12);
    os << r.value << ",";
    if (std::isnan(r.threshold))
      os << ",,";
    else
      os << r.threshold << "," << r.cmp << ",";
    os << (r.pass ? "1" : "0") << "\n";
  }
  return os.str();
}

std::vector<double> run_ensemble(std::size_t reps, std::uint64_t seed,
                                 std::uint64_t tag, bool parallel,
                                 const std::function<double(std::size_t, RngStream)>& fn,
                                 bool* aborted) {
  std::vector<double> out(reps, 0.0);
  std::atomic<bool> hit_abort{false};
  const bool par = parallel;
#pragma omp parallel for schedule(dynamic) if (par)
  for (std::int64_t r = 0; r < static_cast<std::int64_t>(reps); ++r) {
    if (abort_flag().load(std::memory_order_relaxed)) {
      hit_abort.store(true, std::memory_order_relaxed);
      continue;
    }
    out[r] = fn(static_cast<std::size_t>(r),
                RngStream::seeded(seed, {tag, static_cast<std::uint64_t>(r)}));
  }
  if (aborted) *aborted = hit_abort.load();
  return out;
}

std::vector<std::vector<double>> run_ensemble_vec(
    std::size_t reps, std::uint64_t seed, std::uint64_t tag, bool parallel,
    const std::function<std::vector<double>(std::size_t, RngStream)>& fn,
    bool* aborted) {
  std::vector<std::vector<double>> out(reps);
  std::atomic<bool> hit_abort{false};
  const bool par = parallel;
#pragma omp parallel for schedule(dynamic) if (par)
  for (std::int64_t r = 0; r < static_cast<std::int64_t>(reps); ++r) {
    if (abort_flag().load(std::memory_order_relaxed)) {
      hit_abort.store(true, std::memory_order_relaxed);
      continue;
    }
    out[r] = fn(static_cast<std::size_t>(r),
                RngStream::seeded(seed, {tag, static_cast<std::uint64_t>(r)}));
  }
  if (aborted) *aborted = hit_abort.load();
  return out;
}

namespace {

constexpr std::uint64_t kTagField = 0xF1E1D;
constexpr std::uint64_t kTagLimit = 0x111117;
constexpr std::uint64_t kTagLimit2 = 0x111118;
constexpr std::uint64_t kTagDichotomy = 0xD1C407;
constexpr std::uint64_t kTagMarginal = 0x3A96;

bool frechet_regime(const std::vector<double>& betas) {
  for (double b : betas)
    if (b <= 0.5) return true;
  return false;
}

std::string box_label(std::size_t d) {
  return "[0,1]^" + std::to_string(d);
}

struct FieldEnsembles {
  // values[rung][rep] of b_n^{-1} eta_n(box)
  std::vector<std::vector<double>> unit;
  bool aborted = false;
};

// Ensemble of normalized sup measures over the closed unit box along the
// ladder; zero-set streams are keyed by (rep, atom, coordinate) only, so the
// rungs are coupled when the same tag is reused.
FieldEnsembles field_unit_box_ensembles(const ExperimentConfig& cfg, bool absolute) {
  FieldEnsembles out;
  const std::size_t d = cfg.dims();
  for (std::size_t rung = 0; rung < cfg.n_ladder.size(); ++rung) {
    std::vector<ConditionedZeroSetSampler> samplers;
    samplers.reserve(d);
    for (std::size_t i = 0; i < d; ++i)
      samplers.emplace_back(cfg.make_law(cfg.betas[i]), cfg.n_ladder[rung]);
    const std::uint64_t tag = cfg.couple_ladder ? kTagField : kTagField + 977 * rung;
    bool aborted = false;
    const RealBox box = RealBox::unit(d);
    auto vals = run_ensemble(
        cfg.replicates, cfg.seed, tag, cfg.parallel,
        [&](std::size_t, RngStream rng) {
          FieldSample f = sample_field(samplers, cfg.alpha, cfg.field_ell, rng);
          const double v = absolute ? f.abs_sup_measure(box) : f.sup_measure(box);
          return v / f.bn();
        },
        &aborted);
    out.unit.push_back(std::move(vals));
    out.aborted = out.aborted || aborted;
  }
  return out;
}

void record_ladder_ks(ExperimentResult& res, const ExperimentConfig& cfg,
                      const std::vector<std::vector<double>>& per_rung,
                      const std::function<double(std::vector<double>)>& ks_of,
                      double threshold, const std::string& box) {
  std::vector<double> ds;
  for (std::size_t rung = 0; rung < per_rung.size(); ++rung) {
    const double dstat = ks_of(per_rung[rung]);
    ds.push_back(dstat);
    res.note("n=" + std::to_string(cfg.n_ladder[rung]) + " box=" + box,
             "ks_distance", dstat);
  }
  res.check_le("n=" + std::to_string(cfg.n_ladder.back()) + " box=" + box,
               "ks_distance", ds.back(), threshold);
  // non-increasing up to the sampling resolution of the KS statistic itself:
  // once every rung sits at the Monte Carlo floor the raw distances tie
  const double band = 1.0 / std::sqrt(static_cast<double>(cfg.replicates));
  bool mono = true;
  for (std::size_t k = 1; k < ds.size(); ++k) mono = mono && ds[k] <= ds[k - 1] + band;
  res.add(StatRow{res.test, "ladder box=" + box + " (tie band " + std::to_string(band) + ")",
                  "ks_nonincreasing", mono ? 1.0 : 0.0, 1.0, ">=", mono});
}

nlohmann::json sample_summary(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  // store at most 1000 sorted values
  nlohmann::json arr = nlohmann::json::array();
  const std::size_t step = std::max<std::size_t>(1, v.size() / 1000);
  for (std::size_t i = 0; i < v.size(); i += step) arr.push_back(v[i]);
  return arr;
}

}  // namespace

ExperimentResult test_supmeasure_convergence(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult res;
  res.test = "supmeasure_convergence";
  res.seed = cfg.seed;
  const std::size_t d = cfg.dims();
  const double ca = c_alpha(cfg.alpha);
  const double limit_scale = std::pow(ca / 2.0, 1.0 / cfg.alpha);
  const bool frechet = frechet_regime(cfg.betas);

  FieldEnsembles fe = field_unit_box_ensembles(cfg, /*absolute=*/false);
  res.partial = fe.aborted;

  for (std::size_t rung = 0; rung < fe.unit.size(); ++rung) {
    std::size_t zeros = 0;
    for (double v : fe.unit[rung])
      if (v == 0.0) ++zeros;
    if (zeros == fe.unit[rung].size())
      res.add(StatRow{res.test, "n=" + std::to_string(cfg.n_ladder[rung]),
                      "ensemble_underflow", 1.0, 0.0, "<=", false});
  }

  if (frechet) {
    // limit law on the unit box: exp(-(C/2) x^{-alpha})
    auto cdf = [&](double x) {
      return x <= 0.0 ? 0.0 : std::exp(-(ca / 2.0) * std::pow(x, -cfg.alpha));
    };
    record_ladder_ks(res, cfg, fe.unit,
                     [&](std::vector<double> v) { return ks_statistic(std::move(v), cdf); },
                     cfg.thresholds.ks_closed_form, box_label(d));
  } else {
    bool aborted = false;
    auto limit_vals = run_ensemble(
        cfg.replicates, cfg.seed, kTagLimit, cfg.parallel,
        [&](std::size_t, RngStream rng) {
          auto s = sample_limit_measure(cfg.alpha, cfg.betas, cfg.limit_ell,
                                        cfg.delta, rng);
          return limit_scale * s.eval(RealBox::unit(d));
        },
        &aborted);
    res.partial = res.partial || aborted;
    record_ladder_ks(
        res, cfg, fe.unit,
        [&](std::vector<double> v) {
          return ks_statistic_two_sample(std::move(v), limit_vals);
        },
        cfg.thresholds.ks_two_sample, box_label(d));

    // certify the limit ensemble is not Frechet
    FrechetFit fit = fit_frechet_min_ks(limit_vals);
    res.note("limit ensemble", "frechet_fit_alpha", fit.alpha);
    res.check_ge("limit ensemble", "frechet_fit_ks", fit.ks,
                 cfg.thresholds.frechet_reject);
    res.samples["limit_unit_box"] = sample_summary(limit_vals);
  }
  res.samples["field_unit_box_largest_n"] = sample_summary(fe.unit.back());

  // disjoint open rectangles at the largest n: field vs limit sampler,
  // per box and jointly through the max over boxes
  std::vector<RealBox> rects;
  rects.push_back(RealBox::open(std::vector<double>(d, 0.0), std::vector<double>(d, 0.45)));
  rects.push_back(RealBox::open(std::vector<double>(d, 0.55), std::vector<double>(d, 1.0)));

  std::vector<ConditionedZeroSetSampler> samplers;
  for (std::size_t i = 0; i < d; ++i)
    samplers.emplace_back(cfg.make_law(cfg.betas[i]), cfg.n_ladder.back());
  bool ab1 = false, ab2 = false;
  auto field_rect = run_ensemble_vec(
      cfg.replicates, cfg.seed, kTagField, cfg.parallel,
      [&](std::size_t, RngStream rng) {
        FieldSample f = sample_field(samplers, cfg.alpha, cfg.field_ell, rng);
        std::vector<double> v;
        for (const auto& b : rects) v.push_back(f.sup_measure(b) / f.bn());
        return v;
      },
      &ab1);
  auto limit_rect = run_ensemble_vec(
      cfg.replicates, cfg.seed, kTagLimit2, cfg.parallel,
      [&](std::size_t, RngStream rng) {
        auto s = sample_limit_measure(cfg.alpha, cfg.betas, cfg.limit_ell,
                                      cfg.delta, rng);
        std::vector<double> v;
        for (const auto& b : rects) v.push_back(limit_scale * s.eval(b));
        return v;
      },
      &ab2);
  res.partial = res.partial || ab1 || ab2;

  for (std::size_t bi = 0; bi < rects.size(); ++bi) {
    std::vector<double> a, b;
    for (const auto& v : field_rect)
      if (v.size() > bi) a.push_back(v[bi]);
    for (const auto& v : limit_rect)
      if (v.size() > bi) b.push_back(v[bi]);
    const double dstat = ks_statistic_two_sample(a, b);
    res.check_le("rect" + std::to_string(bi) + " n=" + std::to_string(cfg.n_ladder.back()),
                 "ks_distance", dstat, cfg.thresholds.ks_two_sample);
  }
  {
    std::vector<double> a, b;
    for (const auto& v : field_rect)
      if (!v.empty()) a.push_back(*std::max_element(v.begin(), v.end()));
    for (const auto& v : limit_rect)
      if (!v.empty()) b.push_back(*std::max_element(v.begin(), v.end()));
    const double dstat = ks_statistic_two_sample(a, b);
    res.check_le("max-over-rects n=" + std::to_string(cfg.n_ladder.back()),
                 "ks_distance", dstat, cfg.thresholds.ks_two_sample);
  }
  return res;
}

ExperimentResult test_abs_convergence(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult res;
  res.test = "abs_convergence";
  res.seed = cfg.seed;
  const std::size_t d = cfg.dims();
  const double ca = c_alpha(cfg.alpha);
  const double limit_scale = std::pow(ca / 2.0, 1.0 / cfg.alpha);
  const bool frechet = frechet_regime(cfg.betas);

  FieldEnsembles fe = field_unit_box_ensembles(cfg, /*absolute=*/true);
  res.partial = fe.aborted;

  if (frechet) {
    // max of two independent (C/2)-scaled Frechets: exp(-C x^{-alpha})
    auto cdf = [&](double x) {
      return x <= 0.0 ? 0.0 : std::exp(-ca * std::pow(x, -cfg.alpha));
    };
    record_ladder_ks(res, cfg, fe.unit,
                     [&](std::vector<double> v) { return ks_statistic(std::move(v), cdf); },
                     cfg.thresholds.ks_closed_form, box_label(d));
  } else {
    bool aborted = false;
    auto limit_vals = run_ensemble(
        cfg.replicates, cfg.seed, kTagLimit, cfg.parallel,
        [&](std::size_t, RngStream rng) {
          auto s1 = sample_limit_measure(cfg.alpha, cfg.betas, cfg.limit_ell,
                                         cfg.delta, rng.child(1));
          auto s2 = sample_limit_measure(cfg.alpha, cfg.betas, cfg.limit_ell,
                                         cfg.delta, rng.child(2));
          return limit_scale *
                 std::max(s1.eval(RealBox::unit(d)), s2.eval(RealBox::unit(d)));
        },
        &aborted);
    res.partial = res.partial || aborted;
    record_ladder_ks(
        res, cfg, fe.unit,
        [&](std::vector<double> v) {
          return ks_statistic_two_sample(std::move(v), limit_vals);
        },
        cfg.thresholds.ks_two_sample, box_label(d));
    res.samples["limit_abs_unit_box"] = sample_summary(limit_vals);
  }
  res.samples["field_abs_unit_box_largest_n"] = sample_summary(fe.unit.back());
  return res;
}

ExperimentResult test_partial_maxima_fdd(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult res;
  res.test = "partial_maxima_fdd";
  res.seed = cfg.seed;
  const std::size_t d = cfg.dims();
  const double limit_scale = std::pow(c_alpha(cfg.alpha) / 2.0, 1.0 / cfg.alpha);

  std::vector<std::vector<double>> grid = cfg.grid;
  if (grid.empty()) {
    for (double t : {0.25, 0.5, 0.75, 1.0}) grid.emplace_back(d, t);
  }
  if (grid.size() > 8) throw std::invalid_argument("fdd grid: at most 8 points");

  std::vector<ConditionedZeroSetSampler> samplers;
  for (std::size_t i = 0; i < d; ++i)
    samplers.emplace_back(cfg.make_law(cfg.betas[i]), cfg.n_ladder.back());

  bool ab1 = false, ab2 = false;
  // field vectors: (M_n(t_1..t_k), |M|_n(t_1..t_k)) / b_n
  auto field_vals = run_ensemble_vec(
      cfg.replicates, cfg.seed, kTagField, cfg.parallel,
      [&](std::size_t, RngStream rng) {
        FieldSample f = sample_field(samplers, cfg.alpha, cfg.field_ell, rng);
        std::vector<double> v = f.partial_maxima(grid);
        for (const auto& t : grid)
          v.push_back(f.abs_sup_measure(RealBox::zero_to(t)));
        for (double& x : v) x /= f.bn();
        return v;
      },
      &ab1);
  auto limit_vals = run_ensemble_vec(
      cfg.replicates, cfg.seed, kTagLimit, cfg.parallel,
      [&](std::size_t, RngStream rng) {
        auto s1 = sample_limit_measure(cfg.alpha, cfg.betas, cfg.limit_ell,
                                       cfg.delta, rng.child(1));
        auto s2 = sample_limit_measure(cfg.alpha, cfg.betas, cfg.limit_ell,
                                       cfg.delta, rng.child(2));
        std::vector<double> w1 = s1.field_on_grid(grid);
        std::vector<double> w2 = s2.field_on_grid(grid);
        std::vector<double> v;
        for (double x : w1) v.push_back(limit_scale * x);
        for (std::size_t g = 0; g < grid.size(); ++g)
          v.push_back(limit_scale * std::max(w1[g], w2[g]));
        return v;
      },
      &ab2);
  res.partial = ab1 || ab2;

  const std::size_t k = grid.size();
  auto column = [&](const std::vector<std::vector<double>>& rows, std::size_t c) {
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto& r : rows)
      if (r.size() > c) v.push_back(r[c]);
    return v;
  };

  // monotonicity along the (componentwise increasing) default grid
  std::size_t mono_viol_field = 0, mono_viol_limit = 0;
  for (const auto& r : field_vals)
    for (std::size_t g = 1; g < k && g < r.size(); ++g)
      if (r[g] < r[g - 1] - 1e-12) ++mono_viol_field;
  for (const auto& r : limit_vals)
    for (std::size_t g = 1; g < k && g < r.size(); ++g)
      if (r[g] < r[g - 1] - 1e-12) ++mono_viol_limit;
  res.add(StatRow{res.test, "field grid", "monotonicity_violations",
                  static_cast<double>(mono_viol_field), 0.0, "<=",
                  mono_viol_field == 0});
  res.add(StatRow{res.test, "limit grid", "monotonicity_violations",
                  static_cast<double>(mono_viol_limit), 0.0, "<=",
                  mono_viol_limit == 0});

  for (std::size_t g = 0; g < k; ++g) {
    const double dstat =
        ks_statistic_two_sample(column(field_vals, g), column(limit_vals, g));
    res.check_le("M_n(t" + std::to_string(g) + ")", "ks_distance", dstat,
                 cfg.thresholds.ks_two_sample);
  }
  // joint statistic: max over grid points (equals the value at the top corner
  // for monotone grids; kept for general grids)
  {
    std::vector<double> a, b;
    for (const auto& r : field_vals)
      if (r.size() >= k) a.push_back(*std::max_element(r.begin(), r.begin() + k));
    for (const auto& r : limit_vals)
      if (r.size() >= k) b.push_back(*std::max_element(r.begin(), r.begin() + k));
    res.check_le("max over grid", "ks_distance", ks_statistic_two_sample(a, b),
                 cfg.thresholds.ks_two_sample);
  }
  // pairwise increments along the grid
  for (std::size_t g = 1; g < k; ++g) {
    std::vector<double> a, b;
    for (const auto& r : field_vals)
      if (r.size() > g) a.push_back(r[g] - r[g - 1]);
    for (const auto& r : limit_vals)
      if (r.size() > g) b.push_back(r[g] - r[g - 1]);
    res.check_le("increment t" + std::to_string(g - 1) + "->t" + std::to_string(g),
                 "ks_distance", ks_statistic_two_sample(a, b),
                 cfg.thresholds.ks_two_sample);
  }
  // absolute variant per grid point
  for (std::size_t g = 0; g < k; ++g) {
    const double dstat = ks_statistic_two_sample(column(field_vals, k + g),
                                                 column(limit_vals, k + g));
    res.check_le("abs M_n(t" + std::to_string(g) + ")", "ks_distance", dstat,
                 cfg.thresholds.ks_two_sample);
  }
  return res;
}

ExperimentResult test_intersection_dichotomy(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult res;
  res.test = "intersection_dichotomy";
  res.seed = cfg.seed;
  const std::size_t d = cfg.dims();
  const double lb = ell_beta(cfg.betas);
  const int m_max = static_cast<int>(std::ceil(lb)) + 1;

  // shift scale 1, window in shift-scale units; the finest path is coarsened
  // for the coarser rungs so refinement trends are monotone pathwise.
  std::vector<int> rungs = cfg.dichotomy_rungs;  // cells per shift scale
  std::sort(rungs.begin(), rungs.end());
  const int fine = rungs.back();
  for (int r : rungs)
    if (r < 1 || fine % r != 0)
      throw std::invalid_argument("dichotomy_rungs must divide the finest rung");
  const double window = static_cast<double>(cfg.dichotomy_window);
  const double delta_fine = 1.0 / fine;

  // freq[rung][m-1] accumulated over replicates
  std::vector<std::vector<double>> freq(rungs.size(), std::vector<double>(m_max, 0.0));
  bool aborted = false;

  auto counts = run_ensemble_vec(
      cfg.dichotomy_replicates, cfg.seed, kTagDichotomy, cfg.parallel,
      [&](std::size_t, RngStream rng) {
        // m_max product sets, fine resolution, shifted
        std::vector<ShiftedProductSet> sets;
        for (int m = 0; m < m_max; ++m) {
          std::vector<double> shift(d);
          std::vector<RegenSetApprox> comps(d);
          RngStream sm = rng.child(m);
          for (std::size_t i = 0; i < d; ++i) {
            RngStream ss = sm.child(2 * i);
            RngStream sr = sm.child(2 * i + 1);
            shift[i] = std::pow(ss.uniform01(), 1.0 / (1.0 - cfg.betas[i]));
            comps[i] = sample_regen_set(cfg.betas[i], window, delta_fine, sr);
          }
          sets.push_back(make_shifted_product(shift, comps));
        }
        // result: [rung * m_max + (m-1)] = 1 if the first m sets intersect
        std::vector<double> hit(rungs.size() * m_max, 0.0);
        for (std::size_t ri = 0; ri < rungs.size(); ++ri) {
          const int factor = fine / rungs[ri];
          const std::int64_t last_cell =
              static_cast<std::int64_t>(window * rungs[ri]);
          const IndexRange range{0, last_cell};
          // per-coordinate running intersection over the first m sets
          std::vector<std::vector<std::int64_t>> inter(d);
          bool alive = true;
          for (int m = 0; m < m_max && alive; ++m) {
            const ShiftedProductSet coarse_set = coarsen_shifted(sets[m], factor);
            for (std::size_t i = 0; i < d && alive; ++i) {
              auto dil = dilate_cells(coarse_set.cells[i], range);
              if (m == 0) {
                inter[i] = std::move(dil);
              } else {
                std::vector<std::int64_t> tmp;
                std::set_intersection(inter[i].begin(), inter[i].end(), dil.begin(),
                                      dil.end(), std::back_inserter(tmp));
                inter[i].swap(tmp);
              }
              alive = !inter[i].empty();
            }
            if (alive) hit[ri * m_max + m] = 1.0;
          }
        }
        return hit;
      },
      &aborted);
  res.partial = aborted;

  for (const auto& hit : counts) {
    if (hit.empty()) continue;
    for (std::size_t ri = 0; ri < rungs.size(); ++ri)
      for (int m = 0; m < m_max; ++m)
        freq[ri][m] += hit[ri * m_max + m];
  }
  for (auto& row : freq)
    for (double& f : row) f /= static_cast<double>(cfg.dichotomy_replicates);

  for (int m = 1; m <= m_max; ++m) {
    // l(beta) is set by the smallest beta; |m(1-beta_min) - 1| measures the
    // distance to the intersection boundary
    const double beta_min = *std::min_element(cfg.betas.begin(), cfg.betas.end());
    const double margin = std::abs(m * (1.0 - beta_min) - 1.0);
    const bool near_critical = margin < 1e-9;
    for (std::size_t ri = 0; ri < rungs.size(); ++ri)
      res.note("m=" + std::to_string(m) + " cells_per_shift=" + std::to_string(rungs[ri]),
               "intersection_frequency", freq[ri][m - 1]);
    bool mono = true;
    for (std::size_t ri = 1; ri < rungs.size(); ++ri)
      mono = mono && freq[ri][m - 1] <= freq[ri - 1][m - 1] + 1e-12;
    res.add(StatRow{res.test, "m=" + std::to_string(m), "freq_nonincreasing_in_delta",
                    mono ? 1.0 : 0.0, 1.0, ">=", mono});
    const double finest = freq.back()[m - 1];
    if (near_critical) {
      res.note("m=" + std::to_string(m) + " (near-critical)",
               "intersection_frequency_finest", finest);
    } else if (m < lb) {
      res.check_ge("m=" + std::to_string(m) + " finest", "intersection_frequency",
                   finest, cfg.thresholds.freq_high);
    } else {
      res.check_le("m=" + std::to_string(m) + " finest", "intersection_frequency",
                   finest, cfg.thresholds.freq_low);
    }
  }
  return res;
}

ExperimentResult test_marginal_sas(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult res;
  res.test = "marginal_sas";
  res.seed = cfg.seed;

  // X_0 on the d=1, n=0 box: every zero set is {0} and b_n = 1, which makes
  // the truncation bias of the series smallest possible.
  const std::vector<ReturnTimeLaw> laws = {cfg.make_law(cfg.betas[0])};
  const std::vector<std::uint64_t> n0 = {0};
  std::vector<ConditionedZeroSetSampler> samplers;
  samplers.emplace_back(laws[0], 0);

  bool aborted = false;
  auto xs = run_ensemble(
      cfg.marginal_replicates, cfg.seed, kTagMarginal, cfg.parallel,
      [&](std::size_t, RngStream rng) {
        FieldSample f = sample_field(samplers, cfg.alpha, cfg.marginal_ell, rng);
        const std::int64_t zero[1] = {0};
        return f.value_at(std::span<const std::int64_t>(zero, 1));
      },
      &aborted);
  res.partial = aborted;

  for (double theta : cfg.marginal_thetas) {
    std::vector<double> cosv(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) cosv[i] = std::cos(theta * xs[i]);
    const MeanSE ms = mean_se(cosv);
    const double target = std::exp(-std::pow(std::abs(theta), cfg.alpha));
    const double err = std::abs(ms.mean - target);
    res.note("alpha=" + std::to_string(cfg.alpha) + " theta=" + std::to_string(theta),
             "cf_error", err);
    res.check_le("alpha=" + std::to_string(cfg.alpha) + " theta=" + std::to_string(theta),
                 "cf_error_over_se", err / ms.se, cfg.thresholds.cf_sigmas);
  }

  // Hill slope over the top 2% of the positive tail: wide enough that the
  // estimator's noise (alpha/sqrt(k)) sits well under the 10% tolerance,
  // narrow enough that the second-order tail correction stays ~2%
  std::vector<double> pos;
  for (double x : xs)
    if (x > 0.0) pos.push_back(x);
  const std::size_t k = std::max<std::size_t>(50, pos.size() / 50);
  const double hill = hill_tail_index(pos, k);
  res.note("alpha=" + std::to_string(cfg.alpha), "hill_alpha", hill);
  res.check_le("alpha=" + std::to_string(cfg.alpha), "hill_rel_error",
               std::abs(hill - cfg.alpha) / cfg.alpha, cfg.thresholds.hill_rel_err);
  return res;
}

}  // namespace sfe
