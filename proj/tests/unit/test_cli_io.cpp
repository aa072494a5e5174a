#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "oracle.hpp"
#include "patchlab/errors.hpp"
#include "patchlab/experiment.hpp"
#include "patchlab/io.hpp"

using namespace patchlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("patchlab_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) { return read_text(p.string()); }

}  // namespace

TEST_CASE("curve round trip is bitwise") {
  fs::path p = scratch("circle.json");
  CurveState c = circle(64, 1.0);
  c.time = 0.1;
  save_curve(c, p.string());
  CurveState b = load_curve(p.string());
  CHECK(b.x == c.x);
  CHECK(b.y == c.y);
  CHECK(b.time == c.time);
  fs::remove(p);
}

TEST_CASE("saved ellipse reproduces its frame") {
  fs::path p = scratch("ellipse.json");
  CurveState e = ellipse(128, 2.0, 1.0);
  save_curve(e, p.string());
  CHECK(build_frame(load_curve(p.string())).kappa == build_frame(e).kappa);
  fs::remove(p);
}

TEST_CASE("intrinsic round trip") {
  fs::path p = scratch("intrinsic.json");
  CurveState e = ellipse(64, 2.0, 1.0);
  IntrinsicState s = intrinsic_from_curve(e, build_frame(e));
  save_intrinsic(s, p.string());
  AnySnapshot a = load_snapshot(p.string());
  REQUIRE(std::holds_alternative<IntrinsicState>(a));
  const auto& b = std::get<IntrinsicState>(a);
  CHECK(b.g == s.g);
  CHECK(b.kappa == s.kappa);
  CHECK(b.theta0 == s.theta0);
  CHECK(b.gamma0.x == s.gamma0.x);
  fs::remove(p);
}

TEST_CASE("malformed snapshots") {
  fs::path p = scratch("bad.json");
  write_text(p.string(), "{\"n\":16,\"x\":[0,1,2],\"y\":[0,1,2]}");
  try {
    load_curve(p.string());
    FAIL("expected MalformedFile");
  } catch (const MalformedFile& e) {
    CHECK(e.byte_offset() == 8);
  }
  write_text(p.string(), "{\"n\":16,\"x\":[0,1,}");
  CHECK_THROWS_AS(load_curve(p.string()), MalformedFile);
  write_text(p.string(), "[1,2]");
  CHECK_THROWS_AS(load_curve(p.string()), MalformedFile);
  fs::remove(p);
}

TEST_CASE("csv rows are written at full precision") {
  fs::path p = scratch("t.csv");
  {
    CsvWriter w(p.string(), {"a", "b"});
    w.row({0.1, 1.0 / 3.0});
    CHECK_THROWS(w.row({1.0}));
  }
  std::ifstream in(p);
  std::string h, r;
  std::getline(in, h);
  std::getline(in, r);
  CHECK(h == "a,b");
  CHECK(r == "0.10000000000000001,0.33333333333333331");
  fs::remove(p);
}

TEST_CASE("config parsing") {
  ExperimentConfig c = parse_config(R"({"kind":"simulate","initial":{"shape":"ellipse","a":3,"b":1}})");
  CHECK(c.kind == ExperimentKind::Simulate);
  CHECK(c.initial.kind == ShapeKind::Ellipse);
  CHECK(c.initial.a == 3.0);
  CHECK(c.simulation.n_nodes == 256);

  ExperimentConfig again = parse_config(config_to_json(c));
  CHECK(config_to_json(again) == config_to_json(c));

  try {
    parse_config("{\"kind\":\"simulate\",\n\"simulation\":{\n\"dtt\":1}}");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    std::string m = e.what();
    CHECK(m.find("simulation.dtt") != std::string::npos);
    CHECK(m.find("line 3") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("{\"kind\":\"simulate\",}"), ConfigError);
  CHECK_THROWS_AS(parse_config("{}"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"kind":"inflation"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"kind":"simulate","initial":{"shape":"circle","radius":0}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"kind":"simulate","simulation":{"n_nodes":17}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"kind":"simulate","diagnostics":{"beta":[1.5]}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"kind":"simulate","diagnostics":{"p_grid":["big"]}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"kind":"inflation","initial":{"shape":"illposed","epsilon":0.001}})"),
                  FeatureUnresolved);
  ExperimentConfig inf = parse_config(R"({"kind":"inflation","initial":{"shape":"illposed"},"diagnostics":{"p_grid":[2,"inf"]}})");
  CHECK(std::isinf(inf.diagnostics.p_grid[1]));
}

TEST_CASE("hilbert check experiment") {
  fs::path dir = scratch("hilbert");
  ExperimentConfig c = parse_config(R"({"kind":"hilbert_check","simulation":{"n_nodes":1024}})");
  c.output_dir = dir.string();
  ExperimentSummary s = run_experiment(c);
  CHECK(fs::exists(dir / "manifest.json"));
  std::string table = slurp(dir / "hilbert_check.csv");
  CHECK(table.rfind("identity,error,tolerance,pass\n", 0) == 0);
  CHECK(table.find(",0\n") == std::string::npos);
  CHECK(table.find("group_law") != std::string::npos);
  CHECK(table.find("l2_isometry") != std::string::npos);
  std::string manifest = slurp(dir / "manifest.json");
  CHECK(manifest.find("\"status\": \"ok\"") != std::string::npos);
  CHECK(manifest.find("wall_time_seconds") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("formulation comparison is deterministic") {
  std::string cfg = R"({"kind":"compare_formulations","initial":{"shape":"ellipse","a":2,"b":1},
    "simulation":{"n_nodes":256,"dt":0.001,"t_end":0.1,"snapshot_stride":20}})";
  fs::path d1 = scratch("cmp1"), d2 = scratch("cmp2");
  ExperimentConfig c = parse_config(cfg);
  c.output_dir = d1.string();
  run_experiment(c);
  c.output_dir = d2.string();
  run_experiment(c);
  for (const char* f : {"comparison.csv", "comparison.json"}) CHECK(slurp(d1 / f) == slurp(d2 / f));
  std::ifstream in(d1 / "comparison.csv");
  std::string line, last;
  while (std::getline(in, line)) last = line;
  double dk = std::stod(last.substr(last.find(',') + 1));
  CHECK(dk < 1e-5);
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST_CASE("simulate and diagnose experiments") {
  fs::path dir = scratch("sim");
  ExperimentConfig c = parse_config(R"({"kind":"simulate","initial":{"shape":"circle","radius":1.5},
    "simulation":{"n_nodes":32,"dt":0.05,"t_end":0.2,"snapshot_stride":2}})");
  c.output_dir = dir.string();
  ExperimentSummary s = run_experiment(c);
  CHECK(fs::exists(dir / "snapshot_00002.json"));
  CHECK(fs::exists(dir / "invariants.csv"));
  CHECK(slurp(dir / "invariants.csv").rfind("t,area,length,turning,cx,cy\n", 0) == 0);

  ExperimentConfig f = parse_config(R"({"kind":"diagnose","initial":{"shape":"file","path":"x"},
    "simulation":{"n_nodes":32},"diagnostics":{"beta":[0.25,0.5]}})");
  f.initial.path = (dir / "snapshot_00002.json").string();
  f.output_dir = (dir / "diag").string();
  run_experiment(f);
  CHECK(slurp(dir / "diag" / "velocity.csv").rfind("xi,vx,vy,dsv_t,dsv_n,d2sv_n,a\n", 0) == 0);
  CHECK(fs::exists(dir / "diag" / "diagnostics.json"));
  fs::remove_all(dir);
}

TEST_CASE("snapshot description") {
  fs::path p = scratch("desc.json");
  save_curve(circle(32, 1.0), p.string());
  std::string d = describe_snapshot(p.string());
  CHECK(d.find("kind        curve") != std::string::npos);
  CHECK(d.find("area        3.14159") != std::string::npos);
  fs::remove(p);
}
