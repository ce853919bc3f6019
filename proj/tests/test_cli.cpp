#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "svarspec/cli.hpp"
#include "svarspec/io.hpp"

using namespace svarspec;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  io::Json report;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "svarspec");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  io::Json report;
  if (!out.str().empty() && out.str().front() == '{') report = io::Json::parse(out.str());
  return {code, report, err.str()};
}

std::string data(const std::string& name) { return SVARSPEC_TEST_DATA "/" + name; }

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "svarspec_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("validate") {
  const Run ok = run({"validate", "--graph", data("instrument_graph.json")});
  CHECK(ok.code == kExitOk);
  CHECK(ok.report["outputs"]["latent"] == io::Json::array({"l"}));
  CHECK(ok.report["inputs"][data("instrument_graph.json")].get<std::string>().size() == 64);
  CHECK(run({"validate", "--graph", data("invalid_latent_target.json")}).code == kExitValidation);
  CHECK(run({"validate", "--graph", data("invalid_negative_lag.json")}).code == kExitValidation);
  CHECK(run({"validate", "--graph", data("missing.json")}).code == kExitValidation);
  CHECK(run({"validate"}).code == kExitValidation);
  CHECK(run({"frobnicate"}).code == kExitValidation);
}

TEST_CASE("input digests are SHA-256") {
  const fs::path p = scratch("abc.json");
  std::ofstream(p) << "abc";
  const Run r = run({"validate", "--graph", p.string()});
  CHECK(r.code == kExitValidation);
  CHECK(r.report["inputs"][p.string()] == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("queries") {
  const std::string g = data("chain3_graph.json");
  CHECK(run({"query", "dsep", "--graph", g, "--x", "a", "--y", "c", "--z", "b"}).report["outputs"]["d_separated"] == true);
  CHECK(run({"query", "dsep", "--graph", g, "--x", "a", "--y", "c"}).report["outputs"]["d_separated"] == false);
  CHECK(run({"query", "tsep", "--graph", g, "--x", "a", "--y", "c"}).report["outputs"]["size"] == 1);
  CHECK(run({"query", "rank", "--graph", g, "--x", "a", "--y", "c"}).code == kExitValidation);
  const Run rank = run({"query", "rank", "--graph", data("fork_graph.json"), "--x", "2", "--y", "3", "--seed", "4"});
  CHECK(rank.code == kExitOk);
  CHECK(rank.report["outputs"]["generic_rank"] == 1);
  CHECK(rank.report["seeds"] == io::Json::array({4}));
  const Run treks = run({"query", "treks", "--graph", data("instrument_graph.json"), "--x", "v", "--y", "w"});
  CHECK(treks.report["outputs"]["treks"][0]["treks"].size() == 4);
  CHECK(run({"query", "bogus", "--graph", g}).code == kExitValidation);
  CHECK(run({"query", "dsep", "--graph", g, "--x", "a", "--y", "a"}).code == kExitValidation);
}

TEST_CASE("spectrum output matches the library") {
  const Run r = run({"spectrum", "--graph", data("instrument_graph.json"), "--params", data("instrument_params.json")});
  REQUIRE(r.code == kExitOk);
  const TimeSeriesGraph tsg = io::graph_from_json(io::read_json_file(data("instrument_graph.json")));
  const SvarParams p = io::params_from_json(tsg, io::read_json_file(data("instrument_params.json")));
  CHECK(io::ratmatrix_from_json(r.report["outputs"]["spectrum"]["S"]) == spectrum(tsg, p).s);
  CHECK(run({"spectrum", "--graph", data("instrument_graph.json"), "--params", data("instrument_unstable_params.json")}).code ==
        kExitValidation);
}

TEST_CASE("identify and replay") {
  const fs::path cert = scratch("cert.json");
  const Run id = run({"identify", "--graph", data("latent_chain_graph.json"), "--seed", "12", "--out", cert.string()});
  REQUIRE(id.code == kExitOk);
  CHECK(id.report["outputs"]["solved_edges"] == 3);
  const fs::path params = scratch("params.json");
  std::ofstream(params) << id.report["outputs"]["params"].dump();
  const Run again = run({"identify", "--graph", data("latent_chain_graph.json"), "--seed", "12", "--out", scratch("cert2.json").string()});
  CHECK(slurp(cert) == slurp(scratch("cert2.json")));
  const Run replay = run({"replay", "--graph", data("latent_chain_graph.json"), "--certificate", cert.string(), "--params", params.string()});
  CHECK(replay.code == kExitOk);
  CHECK(replay.report["outputs"]["matches_certificate"] == true);
  CHECK(run({"identify", "--graph", data("latent_chain_graph.json")}).code == kExitValidation);
}

TEST_CASE("a non-generic spectrum exits with code 3") {
  const fs::path s = scratch("identity_spectrum.json");
  std::ofstream(s) << io::to_json(RatMatrix::identity({"u", "v", "w"})).dump();
  const Run r = run({"identify", "--graph", data("instrument_graph.json"), "--spectrum", s.string()});
  CHECK(r.code == kExitNonGeneric);
  CHECK(r.report["status"] == kExitNonGeneric);
}

TEST_CASE("simulate, estimate and discover") {
  const fs::path series = scratch("series.tsv");
  const std::string g = data("chain3_graph.json"), p = data("chain3_params.json");
  CHECK(run({"simulate", "--graph", g, "--params", p, "--out", series.string()}).code == kExitValidation);
  REQUIRE(run({"simulate", "--graph", g, "--params", p, "--seed", "3", "--length", "32768", "--out", series.string()}).code ==
          kExitOk);
  const std::string first = slurp(series);
  run({"simulate", "--graph", g, "--params", p, "--seed", "3", "--length", "32768", "--out", series.string()});
  CHECK(slurp(series) == first);

  const Run est = run({"estimate", "--series", series.string(), "--segments", "31", "--frequencies", "0.5,1.5"});
  CHECK(est.code == kExitOk);
  CHECK(est.report["outputs"]["segments"] == 31);
  CHECK(run({"estimate", "--series", series.string(), "--segment-length", "100000"}).code == kExitEstimation);
  CHECK(run({"estimate", "--series", series.string(), "--frequencies", "abc"}).code == kExitValidation);

  const Run exact = run({"discover", "--graph", g, "--params", p});
  CHECK(exact.code == kExitOk);
  CHECK(exact.report["outputs"]["cpdag"]["undirected"].size() == 2);
  const Run empirical = run({"discover", "--series", series.string(), "--threshold", "0.2"});
  CHECK(empirical.code == kExitOk);
  CHECK(empirical.report["outputs"]["cpdag"] == exact.report["outputs"]["cpdag"]);
  CHECK_FALSE(empirical.report["warnings"].empty());
}
