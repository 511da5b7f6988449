#include <doctest.h>

#include <fstream>

#include "dynpriv/errors.hpp"
#include "dynpriv/experiment.hpp"
#include "dynpriv/io.hpp"
#include "support.hpp"

using namespace dynpriv;
namespace fs = std::filesystem;

TEST_CASE("graph and mask documents round-trip") {
  const WeightedDigraph g = random_balanced_digraph(7, 3, 2);
  CHECK(graph_from_json(Json::parse(graph_to_json(g).dump())) == g);
  for (MaskFamily f : kAllMaskFamilies) {
    const MaskSpec m = random_mask_spec(f, 5, 3);
    CHECK(mask_from_json(Json::parse(mask_to_json(m).dump())) == m);
  }
  CHECK_THROWS_AS(graph_from_json(Json{{"n", 2}}), ConfigError);
  CHECK_THROWS_AS(graph_from_json(Json::parse(R"({"n": 2, "edges": [[0, 1]]})")), ConfigError);
  CHECK_THROWS_AS(graph_from_json(Json::parse(R"({"n": 2, "edges": [[0, 5, 1]]})")), InvalidGraph);
  CHECK_THROWS_AS(mask_from_json(Json::parse(R"({"family": "Constant", "params": [{"c": 0.5}]})")),
                  InvalidParams);
}

TEST_CASE("numbers are written in shortest round-trip form") {
  CHECK(format_double(0.2) == "0.2");
  CHECK(format_double(1e-300) == "1e-300");
  const double third = 1.0 / 3.0;
  CHECK(std::stod(format_double(third)) == third);
}

TEST_CASE("trajectory CSV round-trips bit-exactly and hides x by default") {
  const MaskedSystem sys(build_laplacian(testing::directed_cycle(3)),
                         random_mask_spec(MaskFamily::VanishingAffine, 3, 1));
  const Trajectory tr = integrate(sys, std::vector<double>{1.0 / 3, -2, 7}, {0, 1, 0.1, 1});
  const fs::path dir = testing::scratch_dir("csv");

  const std::string pub = trajectory_csv(tr, false);
  CHECK(pub.substr(0, pub.find('\n')) == "t,y_0,y_1,y_2");
  CHECK(pub.find("0.3333333333333333") == std::string::npos);
  write_if_changed(dir / "pub.csv", pub);
  const PublicSamples s = read_public_csv(dir / "pub.csv");
  CHECK(s.times == tr.times);
  CHECK(s.y == tr.y);

  const std::string full = trajectory_csv(tr, true);
  CHECK(full.substr(0, full.find('\n')) == "t,x_0,x_1,x_2,y_0,y_1,y_2");
  write_if_changed(dir / "full.csv", full);
  CHECK(read_public_csv(dir / "full.csv").y == tr.y);
}

TEST_CASE("malformed logs are rejected with the path") {
  const fs::path dir = testing::scratch_dir("badcsv");
  auto write = [&](const char* name, const char* text) {
    std::ofstream(dir / name) << text;
    return dir / name;
  };
  CHECK_THROWS_AS(read_public_csv(dir / "missing.csv"), ConfigError);
  CHECK_THROWS_AS(read_public_csv(write("a.csv", "time,y_0\n0,1\n")), ConfigError);
  CHECK_THROWS_AS(read_public_csv(write("b.csv", "t,x_0\n0,1\n")), ConfigError);
  CHECK_THROWS_AS(read_public_csv(write("c.csv", "t,y_0\n0,abc\n")), ConfigError);
  CHECK_THROWS_AS(read_public_csv(write("d.csv", "t,y_0,y_1\n0,1\n")), ConfigError);
  CHECK_THROWS_AS(read_public_csv(write("e.csv", "t,y_1\n0,1\n")), ConfigError);
  try {
    read_public_csv(dir / "missing.csv");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("missing.csv") != std::string::npos);
  }
}

TEST_CASE("write_if_changed leaves identical files alone") {
  const fs::path dir = testing::scratch_dir("write");
  CHECK(write_if_changed(dir / "sub" / "f.txt", "abc"));
  CHECK_FALSE(write_if_changed(dir / "sub" / "f.txt", "abc"));
  CHECK(write_if_changed(dir / "sub" / "f.txt", "abd"));
  CHECK(read_text_file(dir / "sub" / "f.txt") == "abd");
  CHECK_FALSE(fs::exists(dir / "sub" / "f.txt.tmp"));
}

TEST_CASE("config parsing") {
  const fs::path dir = testing::scratch_dir("config");
  write_if_changed(dir / "g.json", graph_to_json(testing::directed_cycle(3)).dump());
  const Json base = Json::parse(R"({
    "seed": 5,
    "graph": {"file": "g.json"},
    "mask": {"family": "Additive", "ranges": {"delta": [0.5, 1]}},
    "x0": {"uniform": [-1, 1]},
    "integrator": {"step": 0.01, "horizon": 2, "sample_every": 5}
  })");
  const ExperimentConfig cfg = parse_config(base, dir);
  CHECK(cfg.seed == 5);
  CHECK(cfg.graph.file == dir / "g.json");
  CHECK(cfg.mask.family == MaskFamily::Additive);
  CHECK(cfg.mask.ranges.delta == std::array<double, 2>{0.5, 1});
  CHECK(cfg.integration.sample_every == 5);
  CHECK_FALSE(cfg.run_attacks);
  CHECK_FALSE(cfg.sweep);

  const Instance a = instantiate(cfg), b = instantiate(cfg);
  CHECK(a.mask == b.mask);
  CHECK(a.x0 == b.x0);
  for (double v : a.x0) CHECK(std::abs(v) <= 1);

  auto broken = [&](auto edit) {
    Json j = base;
    edit(j);
    return j;
  };
  CHECK_THROWS_AS(parse_config(broken([](Json& j) { j.erase("seed"); }), dir), ConfigError);
  CHECK_THROWS_AS(parse_config(broken([](Json& j) { j["colour"] = 1; }), dir), ConfigError);
  CHECK_THROWS_AS(parse_config(broken([](Json& j) { j["graph"]["file"] = "nope.json"; }), dir),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(broken([](Json& j) { j["integrator"]["step"] = -1; }), dir),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(broken([](Json& j) { j["mask"]["family"] = "Blur"; }), dir),
                  ConfigError);
  CHECK_THROWS_AS(
      parse_config(broken([](Json& j) { j["sweep"] = Json{{"sigma", Json::array()}, {"delta", {1}}}; }), dir),
      ConfigError);
  CHECK_THROWS_AS(load_config(dir / "absent.json"), ConfigError);
}

TEST_CASE("shipped configs parse") {
  for (const auto& entry : fs::directory_iterator(DYNPRIV_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(load_config(entry.path()));
  }
}
