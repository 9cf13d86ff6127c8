#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "curvflow/cli.hpp"
#include "curvflow/error.hpp"
#include "curvflow/io.hpp"

using namespace curvflow;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  const fs::path d = fs::temp_directory_path() / "curvflow_test_cli";
  fs::create_directories(d);
  return d;
}

std::string path(const std::string& name) { return (scratch() / name).string(); }

void write_text(const std::string& p, const std::string& text) {
  std::ofstream(p) << text;
}

// Message of the ValidationError raised while parsing `text`.
std::string off_error(const std::string& text) {
  std::istringstream in(text);
  try {
    io::parse_off(in, "m.off");
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

const char* kOctahedron =
    "OFF\n"
    "# regular octahedron\n"
    "6 8 12\n"
    "1 0 0\n-1 0 0\n0 1 0\n0 -1 0\n0 0 1\n0 0 -1\n"
    "3 0 2 4\n3 2 1 4\n3 1 3 4\n3 3 0 4\n"
    "3 2 0 5\n3 1 2 5\n3 3 1 5\n3 0 3 5\n";

}  // namespace

TEST_CASE("OFF parsing") {
  std::istringstream in(kOctahedron);
  const auto m = io::parse_off(in);
  CHECK(m.vertices.size() == 6);
  CHECK(m.faces.size() == 8);
  const auto t = mesh::validate(m);
  CHECK(t.euler == 2);
  CHECK(t.genus == 0);
  CHECK(t.edges == 12);

  CHECK(off_error("OFX\n1 0 0\n") == "m.off: malformed header at line 1");
  CHECK(off_error("OFF\n") == "m.off: missing counts at line 2");
  CHECK(off_error("OFF\n3 x\n") == "m.off: malformed counts at line 2");
  CHECK(off_error("OFF\n3 1 0\n0 0 0\n1 0\n") == "m.off: malformed vertex at line 4");
  CHECK(off_error("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n4 0 1 2 0\n") == "m.off: non-triangle face at line 6");
  CHECK(off_error("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 3\n") == "m.off: vertex index out of range at line 6");
  CHECK(off_error("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 1\n") == "m.off: degenerate face at line 6");
  CHECK(off_error("OFF\n3 2 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n3 0 1 2\n") == "m.off: non-manifold edge at line 7");
  // An open surface: a single triangle has unmatched edges.
  CHECK(off_error("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n").find("non-manifold edge") != std::string::npos);
  CHECK(off_error("OFF\n3 1 0\n0 0 0\n").find("unexpected end of file") != std::string::npos);
  CHECK_THROWS_AS(io::load_mesh(path("does_not_exist.off")), ValidationError);
}

TEST_CASE("OFF round trip is exact") {
  const auto m = mesh::icosphere(2);
  const std::string p = path("ico.off");
  io::save_mesh(m, p);
  const auto back = io::load_mesh(p);
  REQUIRE(back.vertices.size() == m.vertices.size());
  REQUIRE(back.faces == m.faces);
  for (std::size_t i = 0; i < m.vertices.size(); ++i) CHECK(back.vertices[i] == m.vertices[i]);
}

TEST_CASE("CSV and JSON helpers") {
  const std::string p = path("t.csv");
  {
    io::CsvWriter w(p, {"a", "b"});
    w.row({0.1, 1.0 / 3.0});
    w.row("summary", {2.0});
    CHECK_THROWS_AS(w.row({1.0}), ValidationError);
  }
  const auto t = io::read_csv(p);
  REQUIRE(t.rows.size() == 1);
  CHECK(t.values("a")[0] == 0.1);
  CHECK(t.values("b")[0] == 1.0 / 3.0);
  CHECK_THROWS_AS(t.column("c"), ValidationError);

  const std::string j = path("t.json");
  io::write_json(j, {{"x", 1.0 / 3.0}, {"bad", std::nan("")}, {"n", 3}});
  const auto doc = io::read_json(j);
  CHECK(doc["x"].get<double>() == 1.0 / 3.0);
  CHECK(doc["bad"].is_null());
  CHECK(doc["n"].get<int>() == 3);
  write_text(j, "{ not json");
  CHECK_THROWS_AS(io::read_json(j), ValidationError);
}

TEST_CASE("exit codes") {
  CHECK(cli::run({"--help"}) == 0);
  CHECK(cli::run({"--version"}) == 0);
  CHECK(cli::run(std::vector<std::string>{}) == 1);
  CHECK(cli::run({"nonsense"}) == 1);
  CHECK(cli::run({"geom", "report", "--amp", "abc"}) == 1);
  CHECK(cli::run({"geom", "report", "--mode", "2", "--out", path("g.json")}) == 1);
  CHECK(cli::run({"mesh", "report", "--in", path("missing.off"), "--out", path("m.json")}) == 1);
  CHECK(cli::run({"vpmcf", "run", "--init", "blob", "--out", path("v.csv")}) == 1);
  CHECK(cli::run({"vpmcf", "run", "--h", "-1", "--out", path("v.csv")}) == 1);
  // The optimizer cannot reach this tolerance within its iteration budget.
  CHECK(cli::run({"vpmcf", "run", "--T", "0.02", "--h", "0.02", "--grad-tol", "1e-30", "--out", path("v.csv")}) == 2);
  // Balls closer than two voxels collide in the first step.
  CHECK(cli::run({"ms", "run", "--n", "32", "--T", "0.01", "--init", "balls:2:0.3", "--out", path("ms.csv")}) == 2);
}

TEST_CASE("flags win over the config file") {
  const std::string cfg = path("cfg.json"), out = path("sweep.csv");
  write_text(cfg, R"({"n": 3, "seed": 7, "amp": 0.04})");
  REQUIRE(cli::run({"alexandrov", "sweep", "--config", cfg, "--seed", "11", "--out", out}) == 0);
  const auto man = io::read_json(out + ".manifest.json");
  CHECK(man["config"]["seed"].get<int>() == 11);
  CHECK(man["config"]["n"].get<int>() == 3);
  CHECK(man["config"]["amp"].get<double>() == 0.04);
  CHECK(man["seed"].get<int>() == 11);
  CHECK(man["version"].get<std::string>() == "curvflow 1.0.0");
  CHECK(man["wall_clock_seconds"].get<double>() >= 0.0);
  CHECK(man["outputs"][0].get<std::string>() == out);
  CHECK(man["command_line"].get<std::string>().find("--seed 11") != std::string::npos);

  const auto table = io::read_csv(out);
  REQUIRE(table.rows.size() == 3);
  CHECK(table.values("seed") == std::vector<double>{11, 12, 13});
  CHECK(table.values("amplitude")[0] == 0.04);
  std::ifstream raw(out);
  std::string text((std::istreambuf_iterator<char>(raw)), std::istreambuf_iterator<char>());
  CHECK(text.find("\nsummary_max,2,6,0.040000000000000001,nan,nan,nan,") != std::string::npos);
  CHECK(text.find("\nsummary_min,") != std::string::npos);

  write_text(cfg, R"({"bogus": 1})");
  CHECK(cli::run({"alexandrov", "sweep", "--config", cfg, "--out", out}) == 1);
  write_text(cfg, R"({"n": "three"})");
  CHECK(cli::run({"alexandrov", "sweep", "--config", cfg, "--out", out}) == 1);
  CHECK(cli::run({"alexandrov", "sweep", "--config", path("absent.json"), "--out", out}) == 1);
}

TEST_CASE("mesh commands") {
  const std::string off = path("oct.off"), rep = path("oct.json");
  write_text(off, kOctahedron);
  REQUIRE(cli::run({"mesh", "report", "--in", off, "--out", rep}) == 0);
  const auto j = io::read_json(rep);
  CHECK(j["topology"]["euler"].get<int>() == 2);
  CHECK(j["angle_deficit_sum"].get<double>() == doctest::Approx(4 * 3.141592653589793).epsilon(1e-12));

  const std::string tor = path("torus.off");
  REQUIRE(cli::run({"mesh", "torus", "--n-major", "24", "--n-minor", "12", "--out", tor}) == 0);
  REQUIRE(cli::run({"mesh", "report", "--in", tor, "--out", rep}) == 0);
  CHECK(io::read_json(rep)["topology"]["genus"].get<int>() == 1);
}

TEST_CASE("flow commands and rate fit") {
  const std::string trace = path("v.csv"), ledger = path("v.json"), fit = path("fit.json");
  REQUIRE(cli::run({"vpmcf", "run", "--T", "0.1", "--h", "0.02", "--L", "12", "--out", trace, "--ledger", ledger}) == 0);
  const auto t = io::read_csv(trace);
  CHECK(t.rows.size() == 6);
  const auto P = t.values("P");
  for (std::size_t i = 1; i < P.size(); ++i) CHECK(P[i] <= P[i - 1]);
  const auto led = io::read_json(ledger);
  CHECK(led["steps"].get<int>() == 5);
  CHECK(led["max_comparison_slack"].get<double>() <= 1e-10);

  REQUIRE(cli::run({"fit", "--in", trace, "--out", fit}) == 0);
  const auto f = io::read_json(fit);
  CHECK(f["rate"].get<double>() < 0.0);
  CHECK(f["points"].get<int>() == 3);
  CHECK(cli::run({"fit", "--in", trace, "--observable", "nope", "--out", fit}) == 1);

  const std::string ms = path("ms.csv"), msl = path("ms.json");
  REQUIRE(cli::run({"ms", "run", "--n", "32", "--T", "0.02", "--out", ms, "--ledger", msl}) == 0);
  const auto m = io::read_csv(ms);
  CHECK(m.rows.size() == 3);
  for (double r : m.values("poisson_residual")) CHECK(r < 1e-12);
  CHECK(io::read_json(msl)["max_mass_drift"].get<double>() < 1e-10);
}
