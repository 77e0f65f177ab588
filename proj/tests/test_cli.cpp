#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli_runner.hpp"
#include "flatdyn/report_io.hpp"

using namespace flatdyn;
using flatdyn::testing::run_cli;

namespace {

Json json_of(const std::string& s) { return Json::parse(s); }

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "flatdyn_cli_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("analyze") {
  auto r = run_cli("analyze --field \"x1,x2\" --dim 2");
  REQUIRE(r.exit_code == 0);
  auto j = json_of(r.out);
  CHECK(j["spectrum"]["classification"] == "HyperbolicSource");
  CHECK(j["spectrum"]["eigenvalues"][0]["re"] == 1.0);
  CHECK(j["spectrum"]["eigenvalues"][1]["re"] == 1.0);
  CHECK(j["inner_product"]["verdict"] == true);

  r = run_cli("analyze --field \"x2,-x1\" --dim 2");
  REQUIRE(r.exit_code == 0);
  CHECK(json_of(r.out)["spectrum"]["classification"] == "NonHyperbolic");

  CHECK(run_cli("analyze --field \"x1 + * x2\"").exit_code == 2);
  CHECK(run_cli("analyze --field \"x1,x2\" --dim 3").exit_code == 2);
  CHECK(run_cli("analyze --field \"x1 - 1\"").exit_code == 3);
  CHECK(run_cli("analyze").exit_code == 2);
  CHECK(run_cli("frobnicate").exit_code == 2);
  CHECK(run_cli("--help").exit_code == 0);
}

TEST_CASE("flow") {
  auto r = run_cli("flow --field \"-x1\" --dim 1 --x0 1 --t 1");
  REQUIRE(r.exit_code == 0);
  auto j = json_of(r.out);
  CHECK(std::abs(j["final_state"][0].get<double>() - std::exp(-1.0)) <= 1e-8);
  CHECK(j["termination"] == "ReachedTMax");

  r = run_cli("flow --field x1 --dim 1 --x0 0 --t 5");
  REQUIRE(r.exit_code == 0);
  j = json_of(r.out);
  CHECK(j["final_state"][0] == 0.0);
  CHECK(j["termination"] == "ConvergedToSingularity");

  r = run_cli("flow --field x1 --x0 0.5 --direction backward");
  REQUIRE(r.exit_code == 0);
  j = json_of(r.out);
  CHECK(j["termination"] == "ConvergedToSingularity");
  CHECK(std::abs(j["fit"]["lambda"].get<double>() - 1.0) <= 1e-3);

  const auto csv = scratch("orbit.csv");
  r = run_cli("flow --field \"x2,-x1\" --x0 0.5,0 --t 2 --method rk4 --step 0.01 --out " + csv.string());
  REQUIRE(r.exit_code == 0);
  std::ifstream in(csv);
  const Orbit o = read_orbit_csv(in);
  CHECK(o.size() == 201);
  CHECK(o.termination == Termination::ReachedTMax);
  CHECK(o.final_state()(0) == doctest::Approx(0.5 * std::cos(2.0)).epsilon(1e-8));

  CHECK(run_cli("flow --field x1 --x0 1,2").exit_code == 2);
  CHECK(run_cli("flow --field x1 --x0 abc").exit_code == 2);
  CHECK(run_cli("flow --field x1 --x0 0.5 --direction sideways").exit_code == 2);
  CHECK(run_cli("flow --field x1 --x0 5000").exit_code == 2);
}

TEST_CASE("certify") {
  auto r = run_cli("certify --catalog paper-example-n2-zero-f");
  REQUIRE(r.exit_code == 0);
  CHECK(json_of(r.out)["certificate"]["conclusion"] == "MustVanish");

  r = run_cli("certify --catalog flat-bump-1d");
  REQUIRE(r.exit_code == 0);
  CHECK(json_of(r.out)["certificate"]["conclusion"] == "HypothesisFailed(constant)");

  r = run_cli("certify --catalog rotation-2d");
  REQUIRE(r.exit_code == 0);
  CHECK(json_of(r.out)["certificate"]["conclusion"] == "HypothesisFailed(spectrum)");

  r = run_cli("certify --catalog flat-bump-1d --rhs=norm");
  CHECK(r.exit_code == 4);
  CHECK(json_of(r.out)["certificate"]["conclusion"] == "Inconclusive");

  r = run_cli("certify --field x1 --f \"x1^2\" --c 1.9");
  REQUIRE(r.exit_code == 0);
  CHECK(json_of(r.out)["certificate"]["conclusion"] == "HypothesisFailed(constant)");

  // Global flags work before or after the subcommand and are recorded.
  r = run_cli("--seed 5 certify --catalog power-2c-1d --radius 0.5");
  REQUIRE(r.exit_code == 0);
  {
    const auto j = json_of(r.out);
    CHECK(j["certificate"]["seed"] == 5);
    CHECK(j["certificate"]["radius"] == 0.5);
  }
  r = run_cli("certify --catalog power-2c-1d --seed 5 --radius 0.5");
  CHECK(json_of(r.out)["certificate"]["seed"] == 5);

  CHECK(run_cli("certify --catalog nosuch").exit_code == 2);
  CHECK(run_cli("certify --field x1").exit_code == 2);
  CHECK(run_cli("certify --catalog flat-bump-1d --rhs=maybe").exit_code == 2);
}

TEST_CASE("certify plot data") {
  const auto dir = scratch("plots");
  std::filesystem::remove_all(dir);
  const auto r = run_cli("certify --catalog power-2c-1d --emit-plot-data " + dir.string());
  REQUIRE(r.exit_code == 0);
  for (const char* name : {"flatness.csv", "ratio_sup.csv", "witness.csv"})
    CHECK(std::filesystem::exists(dir / name));
  std::ifstream fin(dir / "flatness.csv");
  const auto fr = read_flatness_csv(fin);
  CHECK(fr.radii.size() == 12);
  CHECK(fr.k_max == 8);
  std::ifstream win(dir / "witness.csv");
  const auto w = read_witness_csv(win);
  CHECK(w.times.size() > 10);
  std::ifstream sin(dir / "ratio_sup.csv");
  CHECK(read_ratio_sup_csv(sin).size() == 16);
}

TEST_CASE("spec files and inline overrides") {
  const auto spec = scratch("spec.json");
  {
    std::ofstream out(spec);
    out << R"({"field": ["x1", "x2"], "f": "x1^2 + x2^2", "seed": 3, "radius": 0.8})";
  }
  auto r = run_cli("--spec " + spec.string() + " certify");
  REQUIRE(r.exit_code == 0);
  auto j = json_of(r.out);
  CHECK(j["certificate"]["seed"] == 3);
  CHECK(j["certificate"]["radius"] == 0.8);
  CHECK(j["certificate"]["conclusion"] == "HypothesisFailed(flatness)");

  r = run_cli("--spec " + spec.string() + " certify --f 0 --seed 4");
  REQUIRE(r.exit_code == 0);
  j = json_of(r.out);
  CHECK(j["certificate"]["seed"] == 4);
  CHECK(j["certificate"]["conclusion"] == "MustVanish");

  CHECK(run_cli("--spec /nonexistent/spec.json analyze").exit_code == 2);
  const auto bad = scratch("bad.json");
  {
    std::ofstream out(bad);
    out << "{not json";
  }
  CHECK(run_cli("--spec " + bad.string() + " analyze").exit_code == 2);
}

TEST_CASE("flatness command") {
  auto r = run_cli("flatness --f x1 --dim 1");
  REQUIRE(r.exit_code == 0);
  CHECK(json_of(r.out)["flatness"]["verdict"][1] == false);

  r = run_cli("flatness --catalog-f flat-bump-1d --kmax 8");
  REQUIRE(r.exit_code == 0);
  CHECK(json_of(r.out)["flatness"]["overall_verdict"] == true);

  r = run_cli("flatness --f \"x1^3\" --kmax 5");
  REQUIRE(r.exit_code == 0);
  const auto v = json_of(r.out)["flatness"]["verdict"];
  REQUIRE(v.size() == 6);
  for (int k = 0; k <= 5; ++k) CHECK(v[k] == (k <= 2));

  const auto csv = scratch("flat.csv");
  r = run_cli("flatness --f \"exp(-1/(x1^2))\" --radii 0.5,0.2,0.1 --csv " + csv.string());
  REQUIRE(r.exit_code == 0);
  std::ifstream in(csv);
  CHECK(read_flatness_csv(in).radii == std::vector<double>{0.5, 0.2, 0.1});

  CHECK(run_cli("flatness --f x1 --catalog-f flat-bump-1d").exit_code == 2);
  CHECK(run_cli("flatness --f x1 --radii 0.1,0.2,0.3").exit_code == 2);
}

TEST_CASE("gronwall command") {
  const auto orbit = scratch("g_orbit.csv");
  REQUIRE(run_cli("flow --field x1 --x0 0.1 --t 1 --out " + orbit.string()).exit_code == 0);
  auto r = run_cli("gronwall --field x1 --f \"x1^2\" --orbit " + orbit.string() + " --c 2");
  REQUIRE(r.exit_code == 0);
  CHECK(json_of(r.out)["verdict"] == true);

  const auto csv = scratch("g.csv");
  r = run_cli("gronwall --field x1 --f \"x1^2\" --x0 0.1 --t 1 --c 1.9 --csv " + csv.string());
  REQUIRE(r.exit_code == 0);
  CHECK(json_of(r.out)["verdict"] == false);
  std::ifstream in(csv);
  const auto g = read_gronwall_csv(in);
  CHECK(g.times.front() == 0.0);
  CHECK(g.observed.front() == doctest::Approx(0.01));

  CHECK(run_cli("gronwall --field x1 --f x1 --c 1").exit_code == 2);
  CHECK(run_cli("gronwall --field \"x1,x2\" --f x1 --orbit " + orbit.string() + " --c 1").exit_code == 2);
}

TEST_CASE("catalog command") {
  auto r = run_cli("catalog list");
  REQUIRE(r.exit_code == 0);
  for (const char* name : {"paper-example-n2-zero-f", "flat-bump-1d", "power-2c-1d", "rotation-2d", "linear-sink-2d"})
    CHECK(r.out.find(name) != std::string::npos);
  CHECK(r.out == run_cli("catalog list").out);

  r = run_cli("catalog show flat-bump-1d");
  REQUIRE(r.exit_code == 0);
  const auto j = json_of(r.out);
  CHECK(j["spec"]["f"] == "exp(-1/(x1^2))");
  CHECK(j["spec"]["f_origin_value"] == 0.0);

  CHECK(run_cli("catalog show nosuch").exit_code == 2);
  CHECK(run_cli("catalog").exit_code == 2);
}

TEST_CASE("determinism and indentation") {
  const auto a = run_cli("certify --catalog flat-bump-1d --seed 7");
  const auto b = run_cli("certify --catalog flat-bump-1d --seed 7");
  CHECK(a.out == b.out);
  const auto compact = run_cli("certify --catalog flat-bump-1d --seed 7 --json-indent -1");
  CHECK(compact.out.find('\n') == compact.out.size() - 1);
  CHECK(json_of(compact.out) == json_of(a.out));
}
