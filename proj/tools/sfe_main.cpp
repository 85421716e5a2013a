#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include "sfe/field.hpp"
#include "sfe/io.hpp"
#include "sfe/limit.hpp"
#include "sfe/regen.hpp"
#include "sfe/stable.hpp"
#include "sfe/verify.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace {

void handle_signal(int) { sfe::abort_flag().store(true); }

struct CommonOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "sfe-out";
  int threads = 0;
  std::string format = "json";
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "JSON config file");
  cmd->add_option("--seed", o.seed, "master seed (default: OS entropy, echoed to outputs)");
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--threads", o.threads, "worker threads (0 = all)");
  cmd->add_option("--format", o.format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
}

std::uint64_t resolve_seed(const CommonOpts& o, const nlohmann::json& cfg) {
  if (o.seed) return *o.seed;
  if (cfg.contains("seed")) return cfg["seed"].get<std::uint64_t>();
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

void apply_env_and_threads(CommonOpts& o) {
  if (const char* t = std::getenv("SFE_THREADS"); t && o.threads == 0)
    o.threads = std::atoi(t);
  if (const char* d = std::getenv("SFE_OUT"); d && o.out_dir == "sfe-out")
    o.out_dir = d;
#if defined(_OPENMP)
  if (o.threads > 0) omp_set_num_threads(o.threads);
#endif
}

nlohmann::json load_config_or_empty(const CommonOpts& o) {
  if (o.config_path.empty()) return nlohmann::json::object();
  return sfe::load_json_file(o.config_path);
}

// x-values for trend plots are encoded in the row subjects ("n=..." or
// "cells_per_shift=...")
std::string plot_csv_from_rows(const sfe::ExperimentResult& res) {
  std::ostringstream os;
  os << "x,series,y\n";
  for (const auto& r : res.rows) {
    if (r.statistic != "ks_distance" && r.statistic != "intersection_frequency")
      continue;
    const auto npos = r.subject.find("n=");
    const auto cpos = r.subject.find("cells_per_shift=");
    if (npos != std::string::npos && r.statistic == "ks_distance") {
      os << r.subject.substr(npos + 2, r.subject.find(' ', npos) - npos - 2) << ","
         << r.statistic << "," << r.value << "\n";
    } else if (cpos != std::string::npos) {
      const std::string m = r.subject.substr(0, r.subject.find(' '));
      os << r.subject.substr(cpos + 16) << "," << m << "," << r.value << "\n";
    }
  }
  return os.str();
}

sfe::SvgSeries series_of(const sfe::ExperimentResult& res, const std::string& stat,
                         const std::string& label) {
  sfe::SvgSeries s;
  s.label = label;
  for (const auto& r : res.rows) {
    if (r.statistic != stat) continue;
    const auto npos = r.subject.find("n=");
    if (npos == std::string::npos) continue;
    const auto end = r.subject.find(' ', npos);
    s.x.push_back(std::stod(r.subject.substr(npos + 2, end - npos - 2)));
    s.y.push_back(r.value);
  }
  return s;
}

void write_result(const sfe::ExperimentResult& res, const CommonOpts& o, bool svg) {
  const std::filesystem::path dir = o.out_dir;
  sfe::atomic_write_file(dir / (res.test + ".json"), res.to_json().dump(2) + "\n");
  sfe::atomic_write_file(dir / (res.test + ".csv"), res.to_csv());
  const std::string plot = plot_csv_from_rows(res);
  if (plot.find('\n') != plot.size() - 1)
    sfe::atomic_write_file(dir / (res.test + "_plot.csv"), plot);
  if (svg) {
    auto s = series_of(res, "ks_distance", "KS distance");
    if (!s.x.empty())
      sfe::atomic_write_file(dir / (res.test + ".svg"),
                             sfe::render_svg_lines(res.test, true, {s}));
  }
}

int run_verify(const CommonOpts& opts, const std::vector<std::string>& only, bool svg) {
  nlohmann::json raw = load_config_or_empty(opts);
  sfe::ExperimentConfig cfg = sfe::ExperimentConfig::from_json(raw);
  cfg.seed = resolve_seed(opts, raw);
  const std::string hash = sfe::config_hash(cfg.to_json());

  using TestFn = sfe::ExperimentResult (*)(const sfe::ExperimentConfig&);
  const std::vector<std::pair<std::string, TestFn>> all = {
      {"supmeasure_convergence", sfe::test_supmeasure_convergence},
      {"abs_convergence", sfe::test_abs_convergence},
      {"partial_maxima_fdd", sfe::test_partial_maxima_fdd},
      {"intersection_dichotomy", sfe::test_intersection_dichotomy},
      {"marginal_sas", sfe::test_marginal_sas},
  };

  bool all_pass = true, any_partial = false;
  nlohmann::json summary;
  summary["version"] = sfe::kVersion;
  summary["seed"] = cfg.seed;
  summary["config_hash"] = hash;
  summary["config"] = cfg.to_json();
  auto tests = nlohmann::json::array();

  for (const auto& [name, fn] : all) {
    if (!only.empty() &&
        std::find(only.begin(), only.end(), name) == only.end())
      continue;
    sfe::ExperimentResult res = fn(cfg);
    res.config_hash = hash;
    write_result(res, opts, svg);
    for (const auto& r : res.rows)
      if (!r.pass)
        std::cerr << "FAIL " << res.test << " | " << r.subject << " | "
                  << r.statistic << " = " << r.value << " (want " << r.cmp << " "
                  << r.threshold << ")\n";
    std::cout << (res.pass ? "PASS " : "FAIL ") << res.test
              << (res.partial ? " (partial)" : "") << "\n";
    all_pass = all_pass && res.pass;
    any_partial = any_partial || res.partial;
    tests.push_back({{"test", res.test}, {"pass", res.pass}, {"partial", res.partial}});
  }
  summary["tests"] = tests;
  summary["pass"] = all_pass;
  summary["partial"] = any_partial;
  sfe::atomic_write_file(std::filesystem::path(opts.out_dir) / "summary.json",
                         summary.dump(2) + "\n");
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);

  CLI::App app{"sfe: simulation and statistical verification of long-range "
               "dependent stable random fields and their extremal limits"};
  app.require_subcommand(1);

  // simulate-field
  auto* sim = app.add_subcommand("simulate-field",
                                 "sample one field realization, dump nonzero points");
  CommonOpts sim_o;
  add_common(sim, sim_o);
  double sim_alpha = 1.5;
  std::vector<double> sim_betas;
  std::vector<std::uint64_t> sim_n;
  std::string sim_law = "sibuya";
  std::size_t sim_ell = 64;
  std::uint64_t sim_max_points = 10000000;
  sim->add_option("--alpha", sim_alpha, "stability index in (0,2)");
  sim->add_option("--beta", sim_betas, "tail index per coordinate (repeat)");
  sim->add_option("--n", sim_n, "box size per coordinate (repeat)");
  sim->add_option("--law", sim_law, "sibuya or pareto")
      ->check(CLI::IsMember({"sibuya", "pareto"}));
  sim->add_option("--ell", sim_ell, "series truncation level");
  sim->add_option("--max-points", sim_max_points, "refuse dumps larger than this");

  // simulate-limit
  auto* lim = app.add_subcommand("simulate-limit",
                                 "sample the limiting sup measure, dump atoms");
  CommonOpts lim_o;
  add_common(lim, lim_o);
  double lim_alpha = 1.5;
  std::vector<double> lim_betas;
  std::size_t lim_ell = 16;
  double lim_delta = 1e-4;
  lim->add_option("--alpha", lim_alpha, "stability index in (0,2)");
  lim->add_option("--beta", lim_betas, "tail index per coordinate (repeat)");
  lim->add_option("--ell", lim_ell, "atom count");
  lim->add_option("--delta", lim_delta, "grid resolution");

  // verify + aliases
  auto* ver = app.add_subcommand("verify", "run the statistical verification suites");
  CommonOpts ver_o;
  add_common(ver, ver_o);
  std::vector<std::string> ver_only;
  bool ver_svg = false;
  ver->add_option("--only", ver_only,
                  "run a subset: supmeasure_convergence abs_convergence "
                  "partial_maxima_fdd intersection_dichotomy marginal_sas");
  ver->add_flag("--svg", ver_svg, "emit KS-vs-n trend charts");

  auto* inter = app.add_subcommand("intersections",
                                   "intersection dichotomy sweep (Prop. 3.1 regime)");
  CommonOpts inter_o;
  add_common(inter, inter_o);

  auto* marg = app.add_subcommand("marginal", "marginal SaS characteristic-function check");
  CommonOpts marg_o;
  add_common(marg, marg_o);

  // info
  auto* info = app.add_subcommand("info", "print derived constants for given parameters");
  double info_alpha = 1.0;
  std::vector<double> info_betas;
  std::vector<std::uint64_t> info_n;
  std::string info_law = "sibuya";
  info->add_option("--alpha", info_alpha, "stability index in (0,2)");
  info->add_option("--beta", info_betas, "tail index per coordinate (repeat)");
  info->add_option("--n", info_n, "box size per coordinate (repeat)");
  info->add_option("--law", info_law, "sibuya or pareto")
      ->check(CLI::IsMember({"sibuya", "pareto"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) {
      apply_env_and_threads(sim_o);
      nlohmann::json raw = load_config_or_empty(sim_o);
      if (sim_betas.empty() && raw.contains("betas"))
        sim_betas = raw["betas"].get<std::vector<double>>();
      if (sim_betas.empty()) sim_betas = {0.5, 0.5};
      if (raw.contains("alpha") && !sim->count("--alpha"))
        sim_alpha = raw["alpha"].get<double>();
      if (raw.contains("law") && !sim->count("--law"))
        sim_law = raw["law"].get<std::string>();
      if (sim_n.empty()) sim_n.assign(sim_betas.size(), 1000);
      if (sim_n.size() == 1 && sim_betas.size() > 1)
        sim_n.assign(sim_betas.size(), sim_n[0]);
      if (sim_n.size() != sim_betas.size())
        throw std::invalid_argument("--n and --beta dimension mismatch");
      const std::uint64_t seed = resolve_seed(sim_o, raw);

      std::vector<sfe::ReturnTimeLaw> laws;
      for (double b : sim_betas)
        laws.push_back(sim_law == "sibuya" ? sfe::ReturnTimeLaw::sibuya(b)
                                           : sfe::ReturnTimeLaw::pareto(b));
      auto f = sfe::sample_field(laws, sim_n, sim_alpha, sim_ell,
                                 sfe::RngStream::seeded(seed, {0x51}));
      std::ostringstream os;
      os.precision(17);
      os << "# schema=sfe-field-v1\n# seed=" << seed << "\n# alpha=" << sim_alpha
         << "\n# law=" << sim_law << "\n# beta=";
      for (std::size_t i = 0; i < sim_betas.size(); ++i)
        os << (i ? "," : "") << sim_betas[i];
      os << "\n# n=";
      for (std::size_t i = 0; i < sim_n.size(); ++i) os << (i ? "," : "") << sim_n[i];
      os << "\n# ell=" << sim_ell << "\n# b_n=" << f.bn()
         << "\n# c_alpha=" << f.calpha() << "\n";
      for (std::size_t i = 0; i < sim_n.size(); ++i) os << "k" << i + 1 << ",";
      os << "value\n";
      f.for_each_nonzero(sim_max_points,
                         [&](std::span<const std::int64_t> k, double v) {
                           for (auto ki : k) os << ki << ",";
                           os << v << "\n";
                         });
      sfe::atomic_write_file(std::filesystem::path(sim_o.out_dir) / "field.csv",
                             os.str());
      std::cout << "wrote " << (std::filesystem::path(sim_o.out_dir) / "field.csv").string()
                << "\n";
      return 0;
    }

    if (lim->parsed()) {
      apply_env_and_threads(lim_o);
      nlohmann::json raw = load_config_or_empty(lim_o);
      if (lim_betas.empty() && raw.contains("betas"))
        lim_betas = raw["betas"].get<std::vector<double>>();
      if (lim_betas.empty()) lim_betas = {0.7, 0.7};
      const std::uint64_t seed = resolve_seed(lim_o, raw);
      auto s = sfe::sample_limit_measure(lim_alpha, lim_betas, lim_ell, lim_delta,
                                         sfe::RngStream::seeded(seed, {0x52}));
      std::ostringstream os;
      os.precision(17);
      os << "# schema=sfe-limit-v1\n# seed=" << seed << "\n# alpha=" << lim_alpha
         << "\n# delta=" << lim_delta << "\n# eta_unit_box="
         << s.eval(sfe::RealBox::unit(lim_betas.size())) << "\natom,weight";
      for (std::size_t i = 0; i < lim_betas.size(); ++i) os << ",shift" << i + 1;
      os << ",cells_per_coord\n";
      for (std::size_t j = 0; j < s.ell(); ++j) {
        os << j + 1 << "," << s.atoms()[j].weight;
        for (double v : s.atoms()[j].shift) os << "," << v;
        os << ",";
        for (std::size_t i = 0; i < s.atoms()[j].set.cells.size(); ++i)
          os << (i ? "|" : "") << s.atoms()[j].set.cells[i].size();
        os << "\n";
      }
      sfe::atomic_write_file(std::filesystem::path(lim_o.out_dir) / "limit_atoms.csv",
                             os.str());
      std::cout << "wrote "
                << (std::filesystem::path(lim_o.out_dir) / "limit_atoms.csv").string()
                << "\n";
      return 0;
    }

    if (ver->parsed()) {
      apply_env_and_threads(ver_o);
      return run_verify(ver_o, ver_only, ver_svg);
    }
    if (inter->parsed()) {
      apply_env_and_threads(inter_o);
      return run_verify(inter_o, {"intersection_dichotomy"}, false);
    }
    if (marg->parsed()) {
      apply_env_and_threads(marg_o);
      return run_verify(marg_o, {"marginal_sas"}, false);
    }

    if (info->parsed()) {
      if (info_betas.empty()) info_betas = {0.5};
      std::cout << "C_alpha(" << info_alpha << ") = " << sfe::c_alpha(info_alpha)
                << "\n";
      std::cout << "ell(beta) = " << sfe::ell_beta(info_betas)
                << "  (max intersecting sets: "
                << static_cast<int>(std::ceil(sfe::ell_beta(info_betas))) - 1 << ")\n";
      bool frechet = false;
      for (double b : info_betas) frechet = frechet || b <= 0.5;
      std::cout << "limit regime: "
                << (frechet ? "Frechet (some beta <= 1/2)"
                            : "non-Frechet (all beta > 1/2)")
                << "\n";
      if (!info_n.empty()) {
        std::vector<sfe::ReturnTimeLaw> laws;
        for (double b : info_betas)
          laws.push_back(info_law == "sibuya" ? sfe::ReturnTimeLaw::sibuya(b)
                                              : sfe::ReturnTimeLaw::pareto(b));
        std::vector<std::uint64_t> n = info_n;
        if (n.size() == 1 && laws.size() > 1) n.assign(laws.size(), n[0]);
        std::cout << "b_n = " << sfe::normalizer_bn(laws, n, info_alpha) << "\n";
      }
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
