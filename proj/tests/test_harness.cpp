#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "qdgd/config.hpp"
#include "qdgd/errors.hpp"
#include "qdgd/harness.hpp"

using namespace qdgd;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("qdgd_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("config defaults and overrides") {
  ExperimentConfig c;
  apply_json(c, "  \n");
  CHECK(c.n == 40);
  CHECK(c.d == 5);
  CHECK(c.bits == 16);
  CHECK(c.beta_clamp == 1.0);
  CHECK_NOTHROW(c.validate());

  apply_json(c, R"({"bits": 8, "beta_clamp": "off", "graph": {"edge_probability": 0.3}})");
  CHECK(c.bits == 8);
  CHECK(!c.beta_clamp);
  CHECK(c.graph.edge_probability == 0.3);

  ConfigOverrides o;
  o.bits = 4;
  apply_overrides(c, o);
  CHECK(c.bits == 4);

  ConfigOverrides zero;
  zero.bits = 0;
  ExperimentConfig z;
  apply_overrides(z, zero);
  CHECK_THROWS_WITH_AS(z.validate(), "invalid field bits: must lie in [1, 32]", ConfigError);

  ExperimentConfig bad;
  CHECK_THROWS_WITH_AS(apply_json(bad, R"({"colour": 1})"), "invalid field colour: unknown field",
                       ConfigError);
  CHECK_THROWS_AS(apply_json(bad, R"({"bits": "many"})"), ConfigError);
  CHECK_THROWS_AS(apply_json(bad, R"({"eta_mode": "middle"})"), ConfigError);
  CHECK_THROWS_AS(apply_json(bad, "{"), ConfigError);

  ExperimentConfig nd;
  nd.n = 3;
  CHECK_THROWS_WITH_AS(nd.validate(), "invalid field n: must be at least d", ConfigError);
}

TEST_CASE("config json round trip") {
  ExperimentConfig c;
  c.bits = 12;
  c.beta_clamp.reset();
  c.eta_mode = EtaMode::Appendix;
  c.operating_radius = 3.5;
  c.graph.edges_file = "g.edges";
  ExperimentConfig back;
  apply_json(back, to_json_text(c));
  CHECK(to_json_text(back) == to_json_text(c));
  CHECK(back.eta_mode == EtaMode::Appendix);
  CHECK(!back.beta_clamp);
}

TEST_CASE("load_config reads the file, then flags") {
  auto dir = scratch("load");
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "c.json");
    f << R"({"bits": 8, "iterations": 20})";
  }
  ConfigOverrides o;
  o.bits = 4;
  auto c = load_config((dir / "c.json").string(), o);
  CHECK(c.bits == 4);
  CHECK(c.iterations == 20);
  CHECK_THROWS_AS(load_config((dir / "missing.json").string(), {}), ConfigError);
}

TEST_CASE("run with K = 1") {
  ExperimentConfig c;
  c.iterations = 1;
  c.output_dir = scratch("k1").string();
  std::stringstream out, err;
  REQUIRE(cmd_run(c, out, err) == kExitOk);
  CHECK(out.str().rfind("final k=1 ", 0) == 0);
  std::ifstream in(fs::path(c.output_dir) / "trace.csv");
  auto rows = read_trace_csv(in);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].k == 0);
  CHECK(rows[1].k == 1);
  for (auto name : {"config.json", "graph.edges", "instance.csv", "fig2.dat"}) {
    CHECK(fs::exists(fs::path(c.output_dir) / name));
  }
  ExperimentConfig echoed;
  apply_json(echoed, slurp(fs::path(c.output_dir) / "config.json"));
  CHECK(echoed.iterations == 1);
}

TEST_CASE("replicas share the instance and differ in quantizer randomness") {
  ExperimentConfig c;
  c.n = 8;
  c.d = 2;
  c.graph.edge_probability = 0.5;
  c.iterations = 200;
  c.replicas = 3;
  c.jobs = 3;
  c.baseline = true;
  c.output_dir = scratch("replicas").string();
  std::stringstream out, err;
  REQUIRE(cmd_run(c, out, err) == kExitOk);
  const fs::path dir(c.output_dir);
  const auto t0 = slurp(dir / "trace_r0.csv");
  const auto t1 = slurp(dir / "trace_r1.csv");
  const auto t2 = slurp(dir / "trace_r2.csv");
  CHECK(!t0.empty());
  CHECK(t0 != t1);
  CHECK(t1 != t2);
  CHECK(!fs::exists(dir / "trace.csv"));
  CHECK(fs::exists(dir / "baseline_trace.csv"));
  CHECK(fs::exists(dir / "fig2_baseline.dat"));
  CHECK(out.str().find("relative_objective_diff=") != std::string::npos);

  // Thread count does not change the artifacts.
  c.jobs = 1;
  c.output_dir = scratch("replicas_serial").string();
  REQUIRE(cmd_run(c, out, err) == kExitOk);
  CHECK(slurp(fs::path(c.output_dir) / "trace_r1.csv") == t1);
  CHECK(slurp(fs::path(c.output_dir) / "graph.edges") == slurp(dir / "graph.edges"));
  CHECK(slurp(fs::path(c.output_dir) / "instance.csv") == slurp(dir / "instance.csv"));
}

TEST_CASE("assumption violation exits 2 and keeps the partial trace") {
  ExperimentConfig c;
  c.n = 4;
  c.d = 2;
  c.graph.edge_probability = 0.6;
  c.seed = 3;
  c.iterations = 50;
  c.output_dir = scratch("violation").string();
  std::stringstream out, err;
  CHECK(cmd_run(c, out, err) == kExitAssumption);
  CHECK(err.str().find("gradient-bound violation: round ") != std::string::npos);
  CHECK(err.str().find("agent ") != std::string::npos);
  const auto trace = slurp(fs::path(c.output_dir) / "trace.csv");
  CHECK(trace.find("# error: gradient-bound violation") != std::string::npos);
}

TEST_CASE("bound command") {
  std::stringstream out, err;
  BoundOptions empty;
  CHECK(cmd_bound(empty, out, err) == kExitOk);
  CHECK(out.str() == "T,measured_gap,theoretical_bound,ratio\n");

  BoundOptions o;
  o.config.iterations = 10;
  o.T = {1, 5, 2000};
  std::stringstream table;
  CHECK(cmd_bound(o, table, err) == kExitOk);
  std::string line;
  std::getline(table, line);
  std::getline(table, line);
  CHECK(line.rfind("1,", 0) == 0);
  int rows = 1;
  while (std::getline(table, line)) ++rows;
  CHECK(rows == 3);

  BoundOptions zero;
  zero.T = {0};
  CHECK_THROWS_AS(cmd_bound(zero, out, err), ConfigError);
}

TEST_CASE("bound table from trace rows") {
  RateBoundInputs in{1.0, 1.0, 1.0, 1, 1, 1, 0.0, 0.0};
  std::vector<TraceRow> rows = {{0, std::vector<double>(12, 0.0)}, {1, std::vector<double>(12, 0.0)}};
  rows[1].values[5] = 8.0;  // V_1
  rows[1].values[2] = 0.5;  // max_i gap
  auto table = tabulate_bound(in, rows, {1, 7});
  REQUIRE(table.size() == 2);
  in.v1 = 8.0;
  CHECK(table[0].bound == rate_bound(in, 1));
  CHECK(table[0].measured == 0.5);
  CHECK(*table[0].ratio == 0.5 / table[0].bound);
  CHECK(!table[1].measured);
  std::stringstream csv;
  write_bound_csv(csv, table);
  CHECK(csv.str().find("\n7,,") != std::string::npos);
}

TEST_CASE("graph emit and load") {
  auto dir = scratch("graph");
  fs::create_directories(dir);
  const auto path = (dir / "g.edges").string();
  std::stringstream out, err;
  CHECK(cmd_graph_emit(3, 1.0, 1, 10, path, out, err) == kExitOk);
  CHECK(slurp(path) == "3 3\n0 1\n0 2\n1 2\n");
  std::stringstream summary;
  CHECK(cmd_graph_load(path, summary, err) == kExitOk);
  CHECK(summary.str().rfind("n=3 m=3 sigma2=0.2", 0) == 0);
}

TEST_CASE("verify command") {
  std::stringstream out, err;
  VerifyOptions o;
  CHECK(cmd_verify(o, out, err) == kExitOk);
  CHECK(out.str().find("\"passed\": true") != std::string::npos);

  std::stringstream out2;
  o.sigma2_offset = 0.5;
  CHECK(cmd_verify(o, out2, err) == kExitCheckFailed);
  CHECK(out2.str().find("claimed spectral gap non-positive") != std::string::npos);

  std::stringstream out3;
  o.sigma2_offset = 0.0;
  o.unquantized = true;
  CHECK(cmd_verify(o, out3, err) == kExitOk);
  CHECK(out3.str().find("\"max_quantization_error_ratio\": 0.0") != std::string::npos);
}
