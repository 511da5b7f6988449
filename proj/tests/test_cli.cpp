#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "dynpriv/experiment.hpp"
#include "support.hpp"

using dynpriv::Json;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = DYNPRIV_CONFIG_DIR;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(const std::string& args, const fs::path& scratch) {
  const fs::path out = scratch / "stdout.txt", err = scratch / "stderr.txt";
  const std::string cmd = std::string("'") + DYNPRIV_CLI_PATH + "' " + args + " >'" +
                          out.string() + "' 2>'" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return {WEXITSTATUS(status), dynpriv::read_text_file(out), dynpriv::read_text_file(err)};
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

fs::path write_config(const fs::path& dir, const std::string& name, const Json& j) {
  dynpriv::write_if_changed(dir / name, j.dump(2));
  return dir / name;
}

// A copy of a shipped config with graph files made absolute.
Json shipped(const std::string& name) {
  Json j = dynpriv::read_json_file(kConfigs / name);
  if (j["graph"].contains("file")) {
    j["graph"]["file"] = (kConfigs / j["graph"]["file"].get<std::string>()).string();
  }
  return j;
}

}  // namespace

TEST_CASE("run writes the public artifacts and is deterministic") {
  const fs::path dir = testing::scratch_dir("cli_run");
  const fs::path cfg = kConfigs / "additive_attack.json";
  const Result a = cli("run --config " + q(cfg) + " --out " + q(dir / "a"), dir);
  REQUIRE(a.code == 0);
  CHECK(a.out.find("eta") != std::string::npos);
  for (const char* f : {"trajectory.csv", "analysis.json", "graph.json", "attacks.json"}) {
    CHECK(fs::exists(dir / "a" / f));
  }
  CHECK_FALSE(fs::exists(dir / "a" / "private"));

  REQUIRE(cli("run --config " + q(cfg) + " --out " + q(dir / "b"), dir).code == 0);
  for (const char* f : {"trajectory.csv", "analysis.json", "graph.json", "attacks.json"}) {
    CAPTURE(f);
    CHECK(dynpriv::read_text_file(dir / "a" / f) == dynpriv::read_text_file(dir / "b" / f));
  }
}

TEST_CASE("public artifacts carry no private values") {
  const fs::path dir = testing::scratch_dir("cli_privacy");
  const Json base = shipped("fig1.json");
  Json j = base;
  j["graph"]["generate"]["n"] = 12;
  j["graph"]["generate"]["extra_cycles"] = 3;
  j["integrator"]["horizon"] = 5;
  j["attacks"] = Json{{"additive", true}, {"affine_c_grid", {2}}, {"integral", true}};
  const fs::path cfg = write_config(dir, "cfg.json", j);

  REQUIRE(cli("run --config " + q(cfg) + " --out " + q(dir / "pub"), dir).code == 0);
  REQUIRE(cli("run --config " + q(cfg) + " --out " + q(dir / "priv") + " --emit-private", dir)
              .code == 0);

  std::vector<std::string> secrets;
  for (double v : dynpriv::read_json_file(dir / "priv/private/x0.json").at("x0")) {
    secrets.push_back(dynpriv::format_double(v));
  }
  for (const Json& p : dynpriv::read_json_file(dir / "priv/private/mask.json").at("params")) {
    for (const char* k : {"phi", "sigma", "gamma", "delta"}) {
      secrets.push_back(dynpriv::format_double(p.at(k).get<double>()));
    }
  }
  std::string published;
  for (const auto& e : fs::recursive_directory_iterator(dir / "pub")) {
    if (e.is_regular_file()) published += dynpriv::read_text_file(e.path());
  }
  for (const std::string& s : secrets) {
    CAPTURE(s);
    CHECK(published.find(s) == std::string::npos);
  }
  const std::string header = dynpriv::read_text_file(dir / "pub/trajectory.csv").substr(0, 40);
  CHECK(header.find("x_") == std::string::npos);
  CHECK(dynpriv::read_text_file(dir / "priv/trajectory.csv").rfind("t,x_0", 0) == 0);
}

TEST_CASE("halving the resolution leaves the consensus value unchanged") {
  const fs::path dir = testing::scratch_dir("cli_step");
  Json j = shipped("identity.json");
  j["integrator"]["horizon"] = 20;
  REQUIRE(cli("run --config " + q(write_config(dir, "a.json", j)) + " --out " + q(dir / "a"), dir)
              .code == 0);
  j["integrator"]["step"] = 2e-3;
  j["integrator"]["sample_every"] = 5;
  REQUIRE(cli("run --config " + q(write_config(dir, "b.json", j)) + " --out " + q(dir / "b"), dir)
              .code == 0);
  const Json a = dynpriv::read_json_file(dir / "a/analysis.json");
  const Json b = dynpriv::read_json_file(dir / "b/analysis.json");
  CHECK(std::abs(a["eta"].get<double>() - b["eta"].get<double>()) < 1e-6);
  CHECK(a["vmm_monotone"].get<bool>());
}

TEST_CASE("attack subcommand") {
  const fs::path dir = testing::scratch_dir("cli_attack");
  const fs::path cfg = kConfigs / "additive_attack.json";
  REQUIRE(cli("run --config " + q(cfg) + " --out " + q(dir / "run") + " --emit-private", dir)
              .code == 0);
  const Json x0 = dynpriv::read_json_file(dir / "run/private/x0.json").at("x0");
  dynpriv::write_if_changed(dir / "truth.json", x0.dump());

  const Result r = cli("attack --config " + q(cfg) + " --log " + q(dir / "run/trajectory.csv") +
                           " --truth " + q(dir / "truth.json"),
                       dir);
  REQUIRE(r.code == 0);
  const Json reports = Json::parse(r.out);
  bool saw_additive = false;
  for (const Json& rep : reports) {
    if (rep["attack"] != "additive") continue;
    saw_additive = true;
    for (const Json& v : rep["nodes"]) {
      CHECK(v["verdict"] == "recovered");
      CHECK(v["relative_error"].get<double>() < 1e-2);
    }
  }
  CHECK(saw_additive);

  const Result missing =
      cli("attack --config " + q(cfg) + " --log " + q(dir / "nope.csv"), dir);
  CHECK(missing.code == 2);
  CHECK(missing.err.find("nope.csv") != std::string::npos);
}

TEST_CASE("check subcommand") {
  const fs::path dir = testing::scratch_dir("cli_check");
  CHECK(cli("check " + q(kConfigs / "graphs/complete4.json"), dir).code == 1);
  CHECK(cli("check " + q(kConfigs / "graphs/cycle6.json"), dir).code == 0);
  const Result va = cli("check " + q(kConfigs / "masks/vanishing_affine.json") + " --out " +
                            q(dir / "va"),
                        dir);
  CHECK(va.code == 0);
  CHECK(dynpriv::read_json_file(dir / "va/check.json").at("pass").get<bool>());
  const Result constant = cli("check " + q(kConfigs / "masks/constant.json"), dir);
  CHECK(constant.code == 1);
  CHECK(constant.out.find("FAIL") != std::string::npos);
}

TEST_CASE("a one-point sweep matches a single run") {
  const fs::path dir = testing::scratch_dir("cli_sweep");
  Json j = shipped("sweep.json");
  j["sweep"] = Json{{"seeds", {7}}, {"sigma", {0.5}}, {"delta", {2}}};
  j["integrator"]["horizon"] = 30;
  const fs::path sweep_cfg = write_config(dir, "sweep.json", j);
  j.erase("sweep");
  j["seed"] = 7;
  j["mask"]["sigma"] = 0.5;
  j["mask"]["delta"] = 2;
  const fs::path run_cfg = write_config(dir, "run.json", j);

  const Result s = cli("sweep --config " + q(sweep_cfg) + " --out " + q(dir / "s"), dir);
  REQUIRE(s.code == 0);
  CHECK(s.out.find("1 computed") != std::string::npos);
  REQUIRE(cli("run --config " + q(run_cfg) + " --out " + q(dir / "r"), dir).code == 0);

  const fs::path point = dir / "s/points" / dynpriv::sweep_point_name(7, 0.5, 2);
  const Json from_sweep = dynpriv::read_json_file(point).at("analysis");
  const Json from_run = dynpriv::read_json_file(dir / "r/analysis.json");
  for (const char* k : {"eta", "conservation_residual", "public_average_drift",
                        "convergence_time", "vmm_monotone"}) {
    CAPTURE(k);
    CHECK(from_sweep[k] == from_run[k]);
  }

  const auto stamp = fs::last_write_time(point);
  const std::string csv = dynpriv::read_text_file(dir / "s/sweep.csv");
  const Result again = cli("sweep --config " + q(sweep_cfg) + " --out " + q(dir / "s"), dir);
  REQUIRE(again.code == 0);
  CHECK(again.out.find("0 computed") != std::string::npos);
  CHECK(again.out.find("aggregate unchanged") != std::string::npos);
  CHECK(fs::last_write_time(point) == stamp);
  CHECK(dynpriv::read_text_file(dir / "s/sweep.csv") == csv);
}

TEST_CASE("exit codes for bad input and numerical failure") {
  const fs::path dir = testing::scratch_dir("cli_errors");
  Json j = shipped("identity.json");
  j["integrator"]["step"] = 5.0;
  j["integrator"]["sample_every"] = 1;
  j["integrator"]["horizon"] = 500;
  CHECK(cli("run --config " + q(write_config(dir, "blowup.json", j)) + " --out " + q(dir / "o"),
            dir)
            .code == 3);

  j = shipped("identity.json");
  j["unknown_key"] = true;
  const Result bad =
      cli("run --config " + q(write_config(dir, "bad.json", j)) + " --out " + q(dir / "o"), dir);
  CHECK(bad.code == 2);
  CHECK(bad.err.find("unknown_key") != std::string::npos);

  CHECK(cli("run --config " + q(dir / "absent.json") + " --out " + q(dir / "o"), dir).code == 2);
  CHECK(cli("frobnicate", dir).code == 2);
  CHECK(cli("--help", dir).code == 0);
}

TEST_CASE("shipped sweep: faster masks never converge later") {
  const fs::path dir = testing::scratch_dir("cli_sweep_trend");
  REQUIRE(cli("sweep --config " + q(kConfigs / "sweep.json") + " --out " + q(dir), dir).code == 0);
  std::istringstream csv(dynpriv::read_text_file(dir / "sweep.csv"));
  std::string line;
  std::getline(csv, line);
  // seed -> (min rate, convergence time) per grid point
  std::map<long, std::vector<std::pair<double, double>>> by_seed;
  while (std::getline(csv, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    REQUIRE(cells.size() >= 4);
    const double t = cells[3].empty() ? HUGE_VAL : std::stod(cells[3]);
    by_seed[std::stol(cells[0])].push_back({std::min(std::stod(cells[1]), std::stod(cells[2])), t});
  }
  REQUIRE(by_seed.size() == 20);
  int monotone = 0;
  for (const auto& [seed, pts] : by_seed) {
    bool ok = true;
    for (const auto& a : pts)
      for (const auto& b : pts)
        if (a.first < b.first && a.second < b.second) ok = false;
    monotone += ok;
  }
  CHECK(monotone >= 18);
}
