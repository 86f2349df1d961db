#include "doctest.h"

#include "zeroeff/cli.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace zeroeff;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "zeroeff");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("zeroeff_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void put(const fs::path& p, const std::string& text) {
  std::ofstream o(p, std::ios::binary);
  o << text;
}

}  // namespace

TEST_CASE("fnv1a known answers") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("simulate: manifest, provenance and determinism") {
  const auto dir = scratch("sim");
  put(dir / "c.json", R"({"seed": 7, "simulate": {"dgp": "two_point", "n": 2000}})");
  const auto a = run({"simulate", "--config", (dir / "c.json").string(), "--out", (dir / "a").string()});
  REQUIRE(a.code == 0);
  const auto b = run({"simulate", "--config", (dir / "c.json").string(), "--out", (dir / "b").string(), "--threads", "3"});
  REQUIRE(b.code == 0);
  CHECK(slurp(dir / "a" / "dataset.csv") == slurp(dir / "b" / "dataset.csv"));
  CHECK(slurp(dir / "a" / "manifest.json") == slurp(dir / "b" / "manifest.json"));

  const auto m = nlohmann::json::parse(slurp(dir / "a" / "manifest.json"));
  CHECK(m["theta_1"]["log1p"].get<double>() == doctest::Approx(0.4774).epsilon(1e-4));
  CHECK(m["find_scale_applicable"].get<bool>());
  CHECK(m["provenance"]["seed"].get<std::uint64_t>() == 7);
  CHECK(m["provenance"]["version"].get<std::string>() == kVersion);
  CHECK(slurp(dir / "a" / "dataset.csv").rfind("# zeroeff", 0) == 0);

  // a different seed changes data but not the config hash of other fields
  const auto c = run({"simulate", "--config", (dir / "c.json").string(), "--out", (dir / "c").string(), "--seed", "8"});
  REQUIRE(c.code == 0);
  CHECK(slurp(dir / "a" / "dataset.csv") != slurp(dir / "c" / "dataset.csv"));
}

TEST_CASE("simulate: zero extensive margin marks the scale search inapplicable") {
  const auto dir = scratch("sim0");
  put(dir / "c.json", R"({"simulate": {"dgp": "lognormal", "p_pos0": 0.5, "p_pos1": 0.5, "n": 100}})");
  REQUIRE(run({"simulate", "--config", (dir / "c.json").string(), "--out", dir.string()}).code == 0);
  CHECK_FALSE(nlohmann::json::parse(slurp(dir / "manifest.json"))["find_scale_applicable"].get<bool>());
}

TEST_CASE("simulate: invalid DGP parameters exit 2") {
  const auto dir = scratch("simbad");
  put(dir / "c.json", R"({"simulate": {"dgp": "lognormal", "p_pos0": 1.5}})");
  const auto r = run({"simulate", "--config", (dir / "c.json").string(), "--out", dir.string()});
  CHECK(r.code == 2);
  put(dir / "d.json", R"({"simulate": {"dgp": "nope"}})");
  CHECK(run({"simulate", "--config", (dir / "d.json").string(), "--out", dir.string()}).code == 2);
  put(dir / "e.json", "{\n  \"simulate\": {\n    \"n\": ,\n  }\n}\n");
  const auto e = run({"simulate", "--config", (dir / "e.json").string(), "--out", dir.string()});
  CHECK(e.code == 2);
  CHECK(e.err.find("line 3") != std::string::npos);
  put(dir / "f.json", R"({"simulate": {"n": "many"}})");
  const auto f = run({"simulate", "--config", (dir / "f.json").string(), "--out", dir.string()});
  CHECK(f.code == 2);
  CHECK(f.err.find("simulate.n") != std::string::npos);
}

TEST_CASE("sensitivity: summary row and missing column") {
  const auto dir = scratch("sens");
  put(dir / "sim.json", R"({"seed": 3, "simulate": {"dgp": "lognormal", "p_pos0": 1, "p_pos1": 1, "mu0": 5, "mu1": 5.2, "n": 4000}})");
  REQUIRE(run({"simulate", "--config", (dir / "sim.json").string(), "--out", (dir / "data").string()}).code == 0);
  put(dir / "s.json", R"({"input": {"path": "data/dataset.csv"}, "sensitivity": {"grid": [1, 10, 100], "targets": [1]}})");
  const auto r = run({"sensitivity", "--config", (dir / "s.json").string(), "--out", (dir / "out").string()});
  REQUIRE(r.code == 0);
  const auto s = nlohmann::json::parse(slurp(dir / "out" / "rescale_summary.json"));
  // no zeros: the rescale barely moves the estimate
  CHECK(std::abs(s["ext_margin"].get<double>()) < 1e-12);
  CHECK(std::abs(s["pct_change"].get<double>()) < 1.0);
  CHECK(slurp(dir / "out" / "scale_search.csv").find("NoExtensiveMargin") != std::string::npos);

  put(dir / "m.json", R"({"input": {"path": "data/dataset.csv", "outcome": "earnings"}})");
  const auto miss = run({"sensitivity", "--config", (dir / "m.json").string(), "--out", (dir / "out2").string()});
  CHECK(miss.code == 2);
  CHECK(miss.err.find("MissingColumn") != std::string::npos);
}

TEST_CASE("estimate: tables, empty list and runtime failure") {
  const auto dir = scratch("est");
  put(dir / "data.csv", "y,d\n0,0\n0,0\n10,0\n20,0\n0,1\n10,1\n20,1\n30,1\n");
  put(dir / "e.json", R"({"input": {"path": "data.csv"},
    "estimate": {"estimators": ["lee", "selection", "calibrated", "ate_pct_means"], "x_list": [0, 0.1, 1, 3]}})");
  const auto r = run({"estimate", "--config", (dir / "e.json").string(), "--out", (dir / "out").string()});
  REQUIRE(r.code == 0);
  const auto lee = nlohmann::json::parse(slurp(dir / "out" / "lee.json"));
  CHECK(lee["levels"]["lower"].get<double>() == 0.0);
  CHECK(lee["levels"]["upper"].get<double>() == 10.0);
  const auto table = slurp(dir / "out" / "lee_selection_table.csv");
  CHECK(table.find("row,lee_log,lee_levels,c=0,c=0.25,c=0.5") != std::string::npos);
  CHECK(table.find(",5,") != std::string::npos);
  CHECK(slurp(dir / "out" / "calibrated.csv").find("row,x=0,x=0.1,x=1,x=3") != std::string::npos);

  put(dir / "empty.json", R"({"input": {"path": "data.csv"}, "estimate": {"estimators": []}})");
  CHECK(run({"estimate", "--config", (dir / "empty.json").string(), "--out", (dir / "o2").string()}).code == 2);

  put(dir / "zeros.csv", "y,d\n0,0\n0,0\n1,1\n2,1\n");
  put(dir / "z.json", R"({"input": {"path": "zeros.csv"}, "estimate": {"estimators": ["ate_pct_means"]}})");
  const auto z = run({"estimate", "--config", (dir / "z.json").string(), "--out", (dir / "o3").string()});
  CHECK(z.code == 1);
  CHECK(z.err.find("ZeroControlMean") != std::string::npos);
}

TEST_CASE("lab: bundled marginals, verdicts and malformed g table") {
  const auto dir = scratch("lab");
  put(dir / "m.csv", "arm,value,prob\n1,1,0.5\n1,2,0.5\n0,1,0.5\n0,3,0.5\n");
  put(dir / "l.json", R"({"lab": {"marginals": "m.csv", "g": ["pct_change", "log_ratio"]}})");
  REQUIRE(run({"lab", "--config", (dir / "l.json").string(), "--out", (dir / "out").string()}).code == 0);
  const auto rep = nlohmann::json::parse(slurp(dir / "out" / "lab_report.json"));
  CHECK(rep["g"][0]["coupling_range"]["min"].get<double>() == doctest::Approx(-1.0 / 6.0).epsilon(1e-12));
  CHECK(rep["g"][0]["coupling_range"]["max"].get<double>() == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  CHECK(rep["g"][1]["coupling_range"]["verdict"].get<std::string>() == "point identified");

  put(dir / "g.csv", "y1,y0,g\n1,1,abc\n");
  put(dir / "bad.json", R"({"lab": {"marginals": "m.csv", "g_table": "g.csv"}})");
  CHECK(run({"lab", "--config", (dir / "bad.json").string(), "--out", (dir / "o2").string()}).code == 2);
}

TEST_CASE("usage errors exit 2") {
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"simulate", "--threads", "zero"}).code == 2);
  CHECK(run({"--version"}).code == 0);
}
