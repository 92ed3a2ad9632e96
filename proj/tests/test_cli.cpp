#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "regdiag/experiment.hpp"

using namespace regdiag;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "regdiag_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json load_json(const fs::path& p) {
  std::ifstream in(p);
  json j;
  in >> j;
  return j;
}

ExperimentConfig severe_cfg(const fs::path& out) {
  ExperimentConfig cfg;
  cfg.kind = "synthetic";
  cfg.n = 48;
  cfg.decay = DecayModel::geometric(std::exp(2.0));
  cfg.beta = 1.0;
  cfg.eps = 1e-3;
  cfg.seeds = {1, 2, 3};
  cfg.out = out;
  return cfg;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(REGDIAG_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("generate writes a reproducible bundle") {
  const fs::path out1 = temp_dir("gen1");
  const fs::path out2 = temp_dir("gen2");
  ExperimentConfig cfg;
  cfg.kind = "shaw";
  cfg.n = 32;
  cfg.eps = 1e-3;
  cfg.seeds = {7};
  cfg.out = out1;
  cmd_generate(cfg);
  cfg.out = out2;
  cmd_generate(cfg);

  for (const char* name : {"A.csv", "b_true.csv", "x_true.csv", "b.csv", "e.csv", "meta.json"}) {
    CHECK(fs::exists(out1 / name));
    CHECK(slurp(out1 / name) == slurp(out2 / name));
  }
  const json meta = load_json(out1 / "meta.json");
  CHECK(meta["kind"] == "shaw");
  CHECK(meta["n"] == 32);
  CHECK(meta["seed"] == 7);
  CHECK(meta["eps"] == 1e-3);
  CHECK(meta.contains("eta"));
  CHECK(meta.contains("schema_version"));
}

TEST_CASE("generate validates the spec") {
  ExperimentConfig cfg;
  cfg.kind = "synthetic";
  cfg.n = 16;
  cfg.seeds = {1};
  cfg.out = temp_dir("genbad");
  CHECK_THROWS_AS(cmd_generate(cfg), ValidationError);  // missing decay
  CHECK_THROWS_AS(DecayModel::power_law(1.0, 0.4), ValidationError);
}

TEST_CASE("semiconv summary orders kstar against the tsvd index") {
  const fs::path out = temp_dir("semi");
  ExperimentConfig cfg;
  cfg.kind = "shaw";
  cfg.n = 64;
  cfg.eps = 1e-3;
  cfg.seeds = {1, 2};
  cfg.methods = {"lsqr", "cgls"};
  cfg.out = out;
  cmd_semiconv(cfg);

  const json summary = load_json(out / "summary.json");
  CHECK(summary["schema_version"] == 1);
  CHECK(summary["all_kstar_le_k0"].get<bool>());
  for (const json& run : summary["runs"]) {
    CHECK(run["methods"].contains("lsqr"));
    CHECK(run["methods"].contains("cgls"));
    CHECK(run["kstar_le_k0"].get<bool>());
  }
  CHECK(fs::exists(out / "seed1" / "series_lsqr.csv"));
  CHECK(fs::exists(out / "seed1" / "series_cgls.csv"));
  CHECK(fs::exists(out / "seed1" / "tsvd_curve.csv"));
  CHECK(fs::exists(out / "seed1" / "picard.csv"));
  CHECK(fs::exists(out / "seed1" / "filters.csv"));

  // header row and fixed column order
  std::ifstream in(out / "seed1" / "series_lsqr.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "k,rel_error,residual_norm,solution_norm");
}

TEST_CASE("semiconv lsqr and cgls curves coincide on a mild problem") {
  const fs::path out = temp_dir("semimild");
  ExperimentConfig cfg;
  cfg.kind = "synthetic";
  cfg.n = 32;
  cfg.decay = DecayModel::power_law(1.0, 0.52);
  cfg.beta = 1.0;
  cfg.eps = 1e-3;
  cfg.seeds = {5};
  cfg.kmax = 10;
  cfg.methods = {"lsqr", "cgls"};
  cfg.out = out;
  cmd_semiconv(cfg);

  auto read_col = [](const fs::path& f, int col) {
    std::ifstream in(f);
    std::string line;
    std::getline(in, line);
    std::vector<double> vals;
    while (std::getline(in, line)) {
      std::stringstream ss(line);
      std::string cell;
      for (int c = 0; std::getline(ss, cell, ','); ++c)
        if (c == col) vals.push_back(std::stod(cell));
    }
    return vals;
  };
  const std::vector<double> el = read_col(out / "seed5" / "series_lsqr.csv", 1);
  const std::vector<double> ec = read_col(out / "seed5" / "series_cgls.csv", 1);
  REQUIRE(el.size() == ec.size());
  for (std::size_t k = 0; k < el.size(); ++k)
    CHECK(std::abs(el[k] - ec[k]) <= 1e-8 * el[k]);
  CHECK(fs::exists(out / "seed5" / "filters.csv"));
}

TEST_CASE("diagnose honors the kmax cap") {
  const fs::path out = temp_dir("diagkmax");
  ExperimentConfig cfg = severe_cfg(out);
  cfg.seeds = {1};
  cfg.kmax = 5;
  cmd_diagnose(cfg);
  std::ifstream in(out / "seed1" / "sintheta.csv");
  std::string line;
  int rows = -1;  // header
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 5);
}

TEST_CASE("semiconv rejects an empty methods list") {
  ExperimentConfig cfg = severe_cfg(temp_dir("semibad"));
  cfg.methods = {};
  CHECK_THROWS_AS(cmd_semiconv(cfg), ValidationError);
  cfg.methods = {"sor"};
  CHECK_THROWS_AS(cmd_semiconv(cfg), ValidationError);
}

TEST_CASE("diagnose emits the expected tables with stable bytes") {
  const fs::path out1 = temp_dir("diag1");
  const fs::path out2 = temp_dir("diag2");
  ExperimentConfig cfg = severe_cfg(out1);
  cmd_diagnose(cfg);
  cfg.out = out2;
  cmd_diagnose(cfg);

  for (const char* name :
       {"sintheta.csv", "ritz_check.csv", "lagrange.csv", "ritz.csv", "bidiag_diag.csv"})
    CHECK(slurp(out1 / "seed1" / name) == slurp(out2 / "seed1" / name));

  std::ifstream in(out1 / "seed1" / "sintheta.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "k,sin_exact,sin_estimate,ratio,tan_theta,lagrange_max,k1");

  const json summary = load_json(out1 / "summary.json");
  const double gm = summary["ratio_geomean"].get<double>();
  CHECK(gm > 0.7);
  CHECK(gm < 1.3);
}

TEST_CASE("diagnose trends per decay family") {
  // moderate: lagrange_max column increases with k
  const fs::path outm = temp_dir("diagmod");
  ExperimentConfig cfg;
  cfg.kind = "synthetic";
  cfg.n = 48;
  cfg.decay = DecayModel::power_law(1.0, 3.0);
  cfg.beta = 1.0;
  cfg.eps = 1e-3;
  cfg.seeds = {1};
  cfg.kmax = 15;
  cfg.out = outm;
  cmd_diagnose(cfg);
  {
    std::ifstream in(outm / "seed1" / "sintheta.csv");
    std::string line;
    std::getline(in, line);
    double prev = 0.0;
    int rows = 0;
    while (std::getline(in, line)) {
      std::stringstream ss(line);
      std::string cell;
      std::vector<std::string> cells;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
      const double lmax = std::stod(cells[5]);
      if (rows >= 2) CHECK(lmax >= prev);  // k >= 2 rows carry the factors
      prev = lmax;
      ++rows;
    }
    CHECK(rows == 15);
  }

  // mild: sin_exact above 0.99 from k = 5 on
  const fs::path outx = temp_dir("diagmild");
  cfg.decay = DecayModel::power_law(1.0, 0.6);
  cfg.kmax = 12;
  cfg.out = outx;
  cmd_diagnose(cfg);
  {
    std::ifstream in(outx / "seed1" / "sintheta.csv");
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      std::stringstream ss(line);
      std::string cell;
      std::vector<std::string> cells;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
      if (std::stoi(cells[0]) >= 5) CHECK(std::stod(cells[1]) > 0.99);
    }
  }
}

TEST_CASE("generate writes one directory per seed for multi-seed runs") {
  const fs::path out = temp_dir("genmulti");
  ExperimentConfig cfg;
  cfg.kind = "deriv2";
  cfg.n = 16;
  cfg.seeds = {3, 4};
  cfg.out = out;
  cmd_generate(cfg);
  CHECK(fs::exists(out / "seed3" / "A.csv"));
  CHECK(fs::exists(out / "seed4" / "meta.json"));
  CHECK(load_json(out / "seed4" / "meta.json")["seed"] == 4);
}

TEST_CASE("report merges a semiconv run") {
  const fs::path out = temp_dir("repsemi");
  ExperimentConfig cfg;
  cfg.kind = "shaw";
  cfg.n = 32;
  cfg.eps = 1e-2;
  cfg.seeds = {1};
  cfg.methods = {"lsqr"};
  cfg.out = out;
  cmd_semiconv(cfg);
  cmd_report(out);
  const json rep = load_json(out / "report.json");
  CHECK_FALSE(rep["partial"].get<bool>());
  CHECK(rep["runs"][0].contains("series_lsqr"));
  CHECK(rep["runs"][0].contains("tsvd_curve"));
  CHECK(rep["runs"][0].contains("filters"));
  CHECK(rep["summary"]["runs"][0]["methods"]["lsqr"].contains("kstar"));
  CHECK_THROWS_AS(cmd_report(out / "nosuchdir"), ValidationError);
}

TEST_CASE("report merges a run directory") {
  const fs::path out = temp_dir("rep");
  ExperimentConfig cfg = severe_cfg(out);
  cfg.seeds = {1};
  cmd_diagnose(cfg);
  cmd_report(out);
  json rep = load_json(out / "report.json");
  CHECK(rep["schema_version"] == 1);
  CHECK_FALSE(rep["partial"].get<bool>());
  CHECK(rep["runs"][0].contains("sintheta"));
  CHECK(rep["runs"][0].contains("ritz_check"));

  fs::remove(out / "seed1" / "ritz_check.csv");
  cmd_report(out);
  rep = load_json(out / "report.json");
  CHECK(rep["partial"].get<bool>());
  CHECK(rep.contains("schema_version"));
}

TEST_CASE("cli binary exit codes and determinism") {
  const fs::path base = temp_dir("cli");
  const std::string gen = "generate --kind shaw --n 32 --eps 1e-3 --seed 7 --out ";
  CHECK(run_cli(gen + (base / "a").string()) == 0);
  CHECK(run_cli(gen + (base / "b").string()) == 0);
  CHECK(slurp(base / "a" / "A.csv") == slurp(base / "b" / "A.csv"));
  CHECK(slurp(base / "a" / "meta.json") == slurp(base / "b" / "meta.json"));

  CHECK(run_cli("generate --kind synthetic --n 16 --decay power:1:0.4 --seed 1 --out " +
                (base / "c").string()) == 2);
  CHECK(run_cli("semiconv --kind shaw --n 64 --eps 1e-3 --seed 1 --methods all --out " +
                (base / "d").string()) == 2);

  // a threaded run produces the same bytes as a serial one
  const std::string diag =
      "diagnose --kind synthetic --n 48 --decay geometric:7.38905609893065 --beta 1 "
      "--eps 1e-3 --seed 1 --seed 2 --seed 3 --out ";
  CHECK(run_cli(diag + (base / "p").string()) == 0);
  const std::string serial = "REGDIAG_THREADS=1 " + std::string(REGDIAG_CLI_PATH) + " " + diag +
                             (base / "q").string() + " >/dev/null 2>&1";
  CHECK(WEXITSTATUS(std::system(serial.c_str())) == 0);
  for (int s : {1, 2, 3})
    CHECK(slurp(base / "p" / ("seed" + std::to_string(s)) / "sintheta.csv") ==
          slurp(base / "q" / ("seed" + std::to_string(s)) / "sintheta.csv"));
}
