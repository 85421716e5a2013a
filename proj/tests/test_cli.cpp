#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#ifndef SFE_CLI_PATH
#define SFE_CLI_PATH "sfe"
#endif

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(SFE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

}  // namespace

TEST_CASE("cli: usage and config errors exit with 2") {
  CHECK(run("unknown-subcommand") == 2);
  CHECK(run("verify --no-such-flag") == 2);
  write("/tmp/sfe_cli_bad.json", "{ not json");
  CHECK(run("verify --config /tmp/sfe_cli_bad.json --out /tmp/sfe_cli_t") == 2);
  write("/tmp/sfe_cli_bad2.json", R"({"replicates": 10})");
  CHECK(run("verify --config /tmp/sfe_cli_bad2.json --out /tmp/sfe_cli_t") == 2);
}

TEST_CASE("cli: info runs") {
  CHECK(run("info --alpha 1.0 --beta 0.4 --beta 0.4 --n 1000") == 0);
}

TEST_CASE("cli: verify twice yields byte-identical results") {
  write("/tmp/sfe_cli_cfg.json",
        R"({"alpha": 1.0, "betas": [0.4, 0.4], "n_ladder": [500],
            "field_ell": 16, "limit_ell": 8, "replicates": 150,
            "marginal_replicates": 20000, "delta": 1e-3,
            "thresholds": {"ks_closed_form": 0.3, "ks_two_sample": 0.3,
                           "hill_rel_err": 0.3}})");
  CHECK(run("verify --only marginal_sas --only supmeasure_convergence "
            "--config /tmp/sfe_cli_cfg.json --seed 42 --out /tmp/sfe_cli_a") == 0);
  CHECK(run("verify --only marginal_sas --only supmeasure_convergence "
            "--config /tmp/sfe_cli_cfg.json --seed 42 --out /tmp/sfe_cli_b") == 0);
  const std::string a = slurp("/tmp/sfe_cli_a/marginal_sas.json");
  const std::string b = slurp("/tmp/sfe_cli_b/marginal_sas.json");
  REQUIRE(!a.empty());
  CHECK(a == b);
  const std::string sa = slurp("/tmp/sfe_cli_a/supmeasure_convergence.json");
  const std::string sb = slurp("/tmp/sfe_cli_b/supmeasure_convergence.json");
  REQUIRE(!sa.empty());
  CHECK(sa == sb);
  // outputs embed provenance
  CHECK(sa.find("config_hash") != std::string::npos);
  CHECK(sa.find("\"seed\": 42") != std::string::npos);
}

TEST_CASE("cli: simulate-field writes the documented schema") {
  CHECK(run("simulate-field --alpha 1.5 --beta 0.5 --beta 0.5 --n 100 --ell 8 "
            "--seed 7 --out /tmp/sfe_cli_f") == 0);
  const std::string csv = slurp("/tmp/sfe_cli_f/field.csv");
  CHECK(csv.find("# schema=sfe-field-v1") == 0);
  CHECK(csv.find("# b_n=") != std::string::npos);
  CHECK(csv.find("k1,k2,value") != std::string::npos);
  // the dump guard refuses oversized requests
  CHECK(run("simulate-field --alpha 1.5 --beta 0.9 --beta 0.9 --n 100000 "
            "--ell 64 --max-points 1000 --seed 7 --out /tmp/sfe_cli_f") == 1);
}
