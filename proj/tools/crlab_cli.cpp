// Command-line front end: one subcommand per experiment kind.

#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "crlab/experiments.hpp"

namespace {

struct Options {
  std::string config;
  std::string out;
  long long seed = -1;
  std::string grid;
  double smax = 0.0;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crlab: indices of weighted Cauchy-Riemann operators on cylinders"};
  app.require_subcommand(1);

  const std::map<std::string, crlab::ExperimentKind> kinds{
      {"spectrum", crlab::ExperimentKind::spectrum},
      {"index", crlab::ExperimentKind::index},
      {"sweep-delta", crlab::ExperimentKind::sweep},
      {"glue", crlab::ExperimentKind::glue},
      {"vdim", crlab::ExperimentKind::vdim},
      {"reproduce-all", crlab::ExperimentKind::reproduce_all},
  };
  Options opt;
  for (const auto& [name, kind] : kinds) {
    auto* sub = app.add_subcommand(name, std::string("run an experiment of kind ") + crlab::to_string(kind));
    sub->add_option("--config", opt.config, "experiment config (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output directory (overrides output_dir)");
    sub->add_option("--seed", opt.seed, "seed for randomized suites")->check(CLI::NonNegativeNumber);
    sub->add_option("--grid", opt.grid, "grid override <s>x<t>");
    sub->add_option("--smax", opt.smax, "truncation length override")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  const auto kind = kinds.at(name);
  try {
    crlab::Json j;
    if (!opt.config.empty()) {
      try {
        j = crlab::Json::parse(crlab::read_file(opt.config));
      } catch (const crlab::Json::parse_error& e) {
        throw crlab::Error(crlab::ErrorCode::config, opt.config + ": " + e.what());
      }
    } else {
      j = {{"name", name}, {"inputs", crlab::Json::object()}};
    }
    if (!j.is_object()) throw crlab::Error(crlab::ErrorCode::config, "/: expected an object");
    if (!j.contains("kind")) j["kind"] = crlab::to_string(kind);
    if (j["kind"] != crlab::to_string(kind)) {
      throw crlab::Error(crlab::ErrorCode::config, "/kind: config is for '" + j["kind"].dump() +
                                                       "', subcommand is " + name);
    }
    if (!opt.out.empty()) j["output_dir"] = opt.out;
    if (opt.seed >= 0) j["seed"] = static_cast<std::uint64_t>(opt.seed);
    if (!opt.grid.empty()) j["grid"] = opt.grid;
    if (opt.smax > 0.0) j["s_max"] = opt.smax;

    const auto config = crlab::experiment_from_json(j);
    const auto result = crlab::run_experiment(config);
    std::cout << result.summary;
    return result.exit_code();
  } catch (const crlab::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
