#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ldp/config.hpp"
#include "ldp/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>

using namespace ldp;

namespace {

Json minimal_doc() {
  return Json::parse(R"({
    "problem": {
      "operator": {"kind": "scalar_linear", "a": 1.0},
      "noise": {"kind": "affine", "sigma": [1.0], "kappa": 0.0},
      "marks": {"points": [1.0], "nu": [1.0]},
      "horizon": 1.0,
      "x0": 1.0
    }
  })");
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("ldp_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("minimal document fills in defaults") {
  const auto rs = make_run_setup(minimal_doc());
  CHECK(rs.seed == 1);
  CHECK(rs.eps == doctest::Approx(0.1));
  CHECK(rs.problem.space.dim() == 1);
  CHECK(rs.problem.horizon == doctest::Approx(1.0));
  CHECK(rs.psi.cells() == 16);
  CHECK(rs.psi.values().minCoeff() == doctest::Approx(1.0));
  CHECK(rs.problem.x0[0] == doctest::Approx(1.0));
}

TEST_CASE("unknown keys are rejected with their json pointer") {
  auto doc = minimal_doc();
  doc["problem"]["operator"]["typo"] = 1;
  try {
    make_run_setup(doc);
    FAIL("expected a config error");
  } catch (const config_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("/problem/operator") != std::string::npos);
    CHECK(msg.find("typo") != std::string::npos);
  }
}

TEST_CASE("type mismatches carry a path") {
  auto doc = minimal_doc();
  doc["problem"]["operator"]["a"] = "one";
  try {
    make_run_setup(doc);
    FAIL("expected a config error");
  } catch (const config_error& e) {
    CHECK(std::string(e.what()).find("/problem/operator/a") !=
          std::string::npos);
  }
}

TEST_CASE("factory complaints surface as config errors") {
  auto doc = minimal_doc();
  doc["problem"]["operator"]["a"] = -2.0;
  CHECK_THROWS_AS(make_run_setup(doc), config_error);
}

TEST_CASE("sigma must match the mark count") {
  auto doc = minimal_doc();
  doc["problem"]["noise"]["sigma"] = {1.0, 2.0};
  CHECK_THROWS_AS(make_run_setup(doc), config_error);
}

TEST_CASE("grid operators build their space from cells") {
  auto doc = minimal_doc();
  doc["problem"]["operator"] = {
      {"kind", "p_laplace"}, {"p", 2.0}, {"cells", 24}, {"length", 1.0},
      {"damping", 0.0}};
  doc["problem"]["x0"] = {{"profile", "sine"}, {"amplitude", 0.5}};
  const auto rs = make_run_setup(doc);
  CHECK(rs.problem.space.dim() == 24);
  CHECK(rs.problem.space.v_norm_kind() == VNormKind::w1p);
  CHECK(rs.problem.x0.size() == 24);
  CHECK(rs.problem.x0.maxCoeff() <= 0.5 + 1e-12);
}

TEST_CASE("sine profiles need a grid space") {
  auto doc = minimal_doc();
  doc["problem"]["x0"] = {{"profile", "sine"}, {"amplitude", 0.5}};
  CHECK_THROWS_AS(make_run_setup(doc), config_error);
}

TEST_CASE("explicit control grids are validated") {
  auto doc = minimal_doc();
  doc["control"] = {{"time_grid", {0.0, 0.5, 1.0}},
                    {"values", {{2.0}, {0.5}}}};
  const auto rs = make_run_setup(doc);
  CHECK(rs.psi.cells() == 2);
  CHECK(rs.psi.values()(0, 0) == doctest::Approx(2.0));

  doc["control"]["time_grid"] = {0.0, 0.5, 0.9};  // does not end at horizon
  CHECK_THROWS_AS(make_run_setup(doc), config_error);
}

TEST_CASE("run block drives the solver options") {
  auto doc = minimal_doc();
  doc["run"] = {{"seed", 42}, {"dt", 0.005}, {"eps", 0.25}, {"paths", 12},
                {"scheme", "explicit_euler"}};
  const auto rs = make_run_setup(doc);
  CHECK(rs.seed == 42);
  CHECK(rs.sim.dt == doctest::Approx(0.005));
  CHECK(rs.solve.dt == doctest::Approx(0.005));
  CHECK(rs.eps == doctest::Approx(0.25));
  CHECK(rs.paths == 12);
  CHECK(rs.sim.scheme == TimeScheme::explicit_euler);
}

TEST_CASE("event parsing checks component bounds") {
  auto doc = minimal_doc();
  doc["event"] = {{"kind", "terminal_threshold"}, {"component", 0},
                  {"threshold", 0.5}, {"direction", 1}};
  const auto rs = make_run_setup(doc);
  REQUIRE(has_event(rs));
  const auto ev = event_spec(rs);
  CHECK(ev.kind == EventKind::terminal_threshold);
  CHECK(ev.threshold == doctest::Approx(0.5));

  doc["event"]["component"] = 3;
  CHECK_THROWS_AS(make_run_setup(doc), config_error);
}

TEST_CASE("tail options build the minimizer grid") {
  auto doc = minimal_doc();
  doc["tail"] = {{"eps", {0.4, 0.2}}, {"paths", 100}, {"grid_cells", 4}};
  const auto rs = make_run_setup(doc);
  const auto opts = tail_options(rs);
  CHECK(opts.control_grid.size() == 5);
  CHECK(opts.control_grid[4] == doctest::Approx(1.0));
  CHECK(opts.paths == 100);
}

TEST_CASE("closed form oracle matches the hand computation") {
  auto doc = minimal_doc();
  doc["skeleton"] = {{"oracle", true}};
  doc["control"] = {{"constant", 2.0}, {"cells", 4}};
  const auto rs = make_run_setup(doc);
  REQUIRE(skeleton_oracle_requested(rs));
  // dY/dt = -Y + 1, Y(0) = 1 is stationary
  CHECK(skeleton_oracle_terminal(rs, 0.5)[0] == doctest::Approx(1.0));
  CHECK(skeleton_oracle_terminal(rs, 1.0)[0] == doctest::Approx(1.0));
}

TEST_CASE("oracle refuses state dependent noise") {
  auto doc = minimal_doc();
  doc["skeleton"] = {{"oracle", true}};
  doc["problem"]["noise"]["kappa"] = 0.5;
  const auto rs = make_run_setup(doc);
  CHECK_THROWS_AS(skeleton_oracle_terminal(rs, 1.0), config_error);
}

TEST_CASE("json files load with position errors") {
  TempDir tmp;
  const auto good = tmp.path / "good.json";
  std::ofstream(good) << R"({"a": 1})";
  CHECK(load_json_file(good)["a"] == 1);

  const auto bad = tmp.path / "bad.json";
  std::ofstream(bad) << R"({"a": )";
  CHECK_THROWS_AS(load_json_file(bad), config_error);
  CHECK_THROWS_AS(load_json_file(tmp.path / "missing.json"), config_error);
}

TEST_CASE("digests have known values") {
  CHECK(fnv1a64("") == 14695981039346656037ULL);
  CHECK(hex64(fnv1a64("")) == "cbf29ce484222325");
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("double formatting round trips") {
  for (const double x : {0.1, 1.0, -3.25, 1e-300, 12345.6789,
                         0.30000000000000004}) {
    const std::string s = format_double(x);
    CHECK(std::stod(s) == x);
  }
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("artifact writer emits a manifest with digests") {
  TempDir tmp;
  const auto dir = tmp.path / "run";
  {
    ArtifactWriter w(dir, 99);
    w.write_text("hello.txt", "hello\n");
    w.write_json("data.json", Json{{"k", 1}});
    w.finalize();
  }
  const auto manifest = load_json_file(dir / "manifest.json");
  CHECK(manifest["seed"] == 99);
  REQUIRE(manifest["files"].size() == 2);
  bool found = false;
  for (const auto& f : manifest["files"]) {
    if (f["name"] == "hello.txt") {
      found = true;
      CHECK(f["bytes"] == 6);
      CHECK(f["fnv1a64"] == hex64(fnv1a64("hello\n")));
    }
  }
  CHECK(found);
}

TEST_CASE("report serialization carries rows and series") {
  ExperimentReport rep;
  rep.name = "demo";
  rep.verdict = Verdict::pass;
  VerdictRow row;
  row.name = "slope";
  row.observed = 1.25;
  row.threshold = 0.45;
  row.relation = ">=";
  row.passed = true;
  rep.rows.push_back(row);
  MetricSeries s;
  s.name = "curve";
  s.points.push_back({0.5, 2.0, 0.1});
  rep.series.push_back(s);
  const Json j = report_to_json(rep);
  CHECK(j["name"] == "demo");
  CHECK(j["verdict"] == "pass");
  CHECK(j["rows"][0]["name"] == "slope");
  CHECK(j["series"][0]["points"][0]["x"] == 0.5);

  const std::string csv = series_csv(s);
  CHECK(csv.find("x,y,stderr") != std::string::npos);
  CHECK(csv.find("0.5,2,0.1") != std::string::npos);
}
