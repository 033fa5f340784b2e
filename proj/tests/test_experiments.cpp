#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include <sys/wait.h>

#include "crlab/experiments.hpp"

using namespace crlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("crlab_exp_" + name);
  fs::remove_all(p);
  return p;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(CRLAB_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

ExperimentConfig load(const std::string& file) {
  return experiment_from_json(Json::parse(read_file(fs::path(CRLAB_SOURCE_DIR) / "configs" / file)));
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("shipped configs parse and round-trip") {
  int seen = 0;
  for (const auto& e : fs::directory_iterator(fs::path(CRLAB_SOURCE_DIR) / "configs")) {
    if (e.path().extension() != ".json") continue;
    ++seen;
    const auto c = experiment_from_json(Json::parse(read_file(e.path())));
    CHECK(experiment_from_json(to_json(c)) == c);
  }
  CHECK(seen >= 6);
}

TEST_CASE("grid text") {
  CHECK(parse_grid("96x32") == Grid{96, 32});
  CHECK_THROWS_AS(parse_grid("96"), Error);
  CHECK_THROWS_AS(parse_grid("96x32x2"), Error);
  CHECK_THROWS_AS(parse_grid("2x2"), Error);
}

TEST_CASE("verdicts combine") {
  CHECK(combine(Verdict::pass, Verdict::indecisive) == Verdict::indecisive);
  CHECK(combine(Verdict::indecisive, Verdict::wrong) == Verdict::wrong);
  CHECK(combine(Verdict::pass, Verdict::pass) == Verdict::pass);
}

TEST_CASE("schema violations name the offending path") {
  Json j = {{"name", "x"}, {"kind", "index"}, {"inputs", {{"problems", {{{"name", "p"}, {"problem", {{"builder", "plane"}, {"weight", "big"}}}}}}}}};
  try {
    experiment_from_json(j);
    FAIL("expected config error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::config);
    CHECK(std::string(e.what()).find("/inputs/problems/0/problem/weight") != std::string::npos);
  }
  CHECK_THROWS_AS(experiment_from_json(Json{{"name", ""}, {"kind", "vdim"}}), Error);
  CHECK_THROWS_AS(experiment_from_json(Json{{"name", "a"}, {"kind", "bake"}}), Error);
}

TEST_CASE("spectrum of the zero loop lists 2 pi k") {
  auto c = load("spectrum_zero.json");
  c.output_dir = scratch("spectrum").string();
  const auto r = run_experiment(c);
  CHECK(r.exit_code() == 0);
  const auto csv = read_file(fs::path(c.output_dir) / "spectrum.csv");
  CHECK(csv.find("zero,6.28318530717958") != std::string::npos);
  CHECK(csv.find("zero,0,2,true") != std::string::npos);
  CHECK(csv.find('\r') == std::string::npos);
}

TEST_CASE("vdim output is byte-identical for a fixed seed") {
  auto c = load("vdim_canonical.json");
  c.output_dir = scratch("vdim_a").string();
  CHECK(run_experiment(c).exit_code() == 0);
  const auto a = read_file(fs::path(c.output_dir) / "vdim.csv");
  c.output_dir = scratch("vdim_b").string();
  run_experiment(c);
  CHECK(read_file(fs::path(c.output_dir) / "vdim.csv") == a);
  c.seed += 1;
  c.output_dir = scratch("vdim_c").string();
  run_experiment(c);
  CHECK(read_file(fs::path(c.output_dir) / "vdim.csv") != a);
}

TEST_CASE("a wrong expectation exits 1") {
  ExperimentConfig c;
  c.name = "wrong";
  c.kind = ExperimentKind::index;
  c.output_dir = scratch("wrong").string();
  c.inputs = {{"problems",
               {{{"name", "cyl"},
                 {"problem", {{"builder", "trivial_cylinder"}, {"weights", {-1, 1}}, {"grid", {{"s_nodes", 48}, {"t_nodes", 8}}}}},
                 {"expect", {{"index", 5}}}}}}};
  c = experiment_from_json(to_json(c));
  const auto r = run_experiment(c);
  CHECK(r.exit_code() == 1);
  CHECK(r.summary.find("FAIL") != std::string::npos);
}

TEST_CASE("an indecisive rank exits 2") {
  ExperimentConfig c;
  c.name = "indecisive";
  c.kind = ExperimentKind::index;
  c.output_dir = scratch("indecisive").string();
  // an absurd gap requirement can never be met
  c.inputs = {{"policy", {{"min_gap", 1e300}}},
              {"problems",
               {{{"name", "cyl"},
                 {"problem", {{"builder", "trivial_cylinder"}, {"weights", {1, 1}}, {"grid", {{"s_nodes", 48}, {"t_nodes", 8}}}}},
                 {"expect", {{"index", -2}}}}}}};
  CHECK(run_experiment(experiment_from_json(to_json(c))).exit_code() == 2);
}

TEST_CASE("command line exit codes") {
  const auto out = scratch("cli");
  const std::string cfg = std::string(CRLAB_SOURCE_DIR) + "/configs/vdim_canonical.json";
  CHECK(cli("vdim --config " + cfg + " --out " + out.string() + " --seed 3") == 0);
  CHECK(fs::exists(out / "summary.txt"));
  CHECK(fs::exists(out / "result.json"));
  // config for another subcommand
  CHECK(cli("index --config " + cfg + " --out " + out.string()) == 1);
  CHECK(cli("vdim --config /nonexistent.json") == 1);
  CHECK(cli("vdim --grid 12 --out " + out.string()) == 1);
  CHECK(cli("frobnicate") == 1);
}

}  // TEST_SUITE
